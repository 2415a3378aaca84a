import math

import numpy as np
import pytest

from analysis.estimation import fidelities_from_counts
from analysis.robustness import (
    MismatchPair,
    QuadraticErrorForm,
    biased_fidelity_psi,
    biased_fidelity_psi_perp,
    biased_mean,
    clone_a_analysis,
    clone_b_analysis,
    error_bound,
    mean_gradient,
    mean_hessian,
    robustness_sweep,
    symmetric_bound_factor,
    taylor_form,
)
from conftest import random_eta_values, random_machine
from errors import ParameterError
from machine.cloner import MachineTriple, machine_triple
from machine.detection import EfficiencyPair, bias_counts, ideal_probabilities
from quantum.states import mub_bases

SYMMETRIC = MachineTriple(5 / 6, 5 / 6, 2 / 3)
TRIVIAL = MachineTriple(0.5, 1.0, 0.5)


def test_unbiased_detectors_give_true_fidelity(rng):
    for machine in [SYMMETRIC, TRIVIAL] + [random_machine(rng) for _ in range(10)]:
        unit = EfficiencyPair.unit()
        assert biased_fidelity_psi(machine, unit) == pytest.approx(machine.f_a, abs=1e-15)
        assert biased_fidelity_psi_perp(machine, unit) == pytest.approx(machine.f_a, abs=1e-15)
        assert clone_b_analysis(machine, unit).mean == pytest.approx(machine.f_b, abs=1e-15)


def test_saw_tooth_direction():
    eta = EfficiencyPair(1.0, 0.9)
    assert biased_fidelity_psi(SYMMETRIC, eta) < 5 / 6 < biased_fidelity_psi_perp(SYMMETRIC, eta)


def test_perp_formula_is_inverse_substitution(rng):
    for _ in range(20):
        machine = random_machine(rng)
        eta = EfficiencyPair(*random_eta_values(rng))
        assert biased_fidelity_psi(machine, eta.inverse()) == pytest.approx(
            biased_fidelity_psi_perp(machine, eta), abs=1e-14
        )


def test_exact_formulas_match_simulation_path(rng):
    bases = mub_bases()
    for _ in range(50):
        t = float(rng.uniform(0, 1))
        eta = EfficiencyPair(*random_eta_values(rng, 0.5, 2.0))
        machine = machine_triple(t)
        basis = bases[int(rng.integers(3))]

        psi_counts = bias_counts(ideal_probabilities(basis.psi, basis, t), eta, 1e4)
        perp_counts = bias_counts(ideal_probabilities(basis.psi_perp, basis, t), eta, 1e4)
        f_a_psi, f_b_psi = fidelities_from_counts(psi_counts, "psi")
        f_a_perp, f_b_perp = fidelities_from_counts(perp_counts, "perp")

        clone_a = clone_a_analysis(machine, eta)
        clone_b = clone_b_analysis(machine, eta)
        assert f_a_psi == pytest.approx(clone_a.f_psi, abs=1e-12)
        assert f_a_perp == pytest.approx(clone_a.f_perp, abs=1e-12)
        assert (f_a_psi + f_a_perp) / 2 == pytest.approx(biased_mean(machine, eta), abs=1e-12)
        assert f_b_psi == pytest.approx(clone_b.f_psi, abs=1e-12)
        assert f_b_perp == pytest.approx(clone_b.f_perp, abs=1e-12)


def test_ten_percent_mismatch_costs_about_half_a_per_mille():
    error = abs(biased_mean(SYMMETRIC, EfficiencyPair.from_mismatch(0.1, 0.0)) - 5 / 6)
    assert 2.5e-4 <= error <= 1e-3
    assert error == pytest.approx(5 / 108 * 0.01, rel=0.2)


def test_linear_terms_cancel(rng):
    for machine in [SYMMETRIC] + [random_machine(rng) for _ in range(50)]:
        np.testing.assert_allclose(mean_gradient(machine), [0.0, 0.0], atol=1e-8)


def test_symmetric_taylor_coefficients():
    form = taylor_form(SYMMETRIC)
    assert form.coeff_aa == pytest.approx(-5 / 108, abs=1e-15)
    assert form.coeff_ab == pytest.approx(1 / 54, abs=1e-15)
    assert form.coeff_bb == pytest.approx(1 / 108, abs=1e-15)


def test_trivial_machine_coefficients():
    form = taylor_form(TRIVIAL)
    assert (form.coeff_aa, form.coeff_ab, form.coeff_bb) == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)


def test_taylor_form_matches_numerical_second_derivatives(rng):
    for machine in [SYMMETRIC] + [random_machine(rng) for _ in range(20)]:
        form = taylor_form(machine)
        hessian = mean_hessian(machine)
        assert hessian[0, 0] / 2 == pytest.approx(form.coeff_aa, abs=1e-6)
        assert hessian[0, 1] == pytest.approx(form.coeff_ab, abs=1e-6)
        assert hessian[1, 1] / 2 == pytest.approx(form.coeff_bb, abs=1e-6)


def _residual(machine, form, eps_a, eps_b):
    eps = MismatchPair(eps_a, eps_b)
    return abs(biased_mean(machine, eps.to_eta()) - machine.f_a - form.evaluate(eps))


def test_taylor_residual_is_cubic():
    form = taylor_form(SYMMETRIC)
    fit_axis = np.linspace(-0.05, 0.05, 11)
    k = max(
        _residual(SYMMETRIC, form, a, b) / (abs(a) + abs(b)) ** 3
        for a in fit_axis for b in fit_axis if (a, b) != (0.0, 0.0)
    )
    assert k > 0
    for a in np.linspace(-0.1, 0.1, 21):
        for b in np.linspace(-0.1, 0.1, 21):
            assert _residual(SYMMETRIC, form, a, b) <= 5 * k * (abs(a) + abs(b)) ** 3 + 1e-15


def test_symmetric_bound_factor():
    form = taylor_form(SYMMETRIC)
    assert form.bound_factor == pytest.approx((2 + math.sqrt(10)) / 108, abs=1e-15)
    assert symmetric_bound_factor() == pytest.approx(0.047799, abs=1e-6)
    assert error_bound(form, MismatchPair(0.0, 0.0)) == 0.0


def test_bound_dominates_quadratic_form(rng):
    for machine in [SYMMETRIC] + [random_machine(rng) for _ in range(5)]:
        form = taylor_form(machine)
        for eps_a, eps_b in rng.uniform(-0.5, 0.5, size=(1000, 2)):
            eps = MismatchPair(eps_a, eps_b)
            assert abs(form.evaluate(eps)) <= error_bound(form, eps) + 1e-15


def test_quadratic_form_at_origin():
    assert QuadraticErrorForm(1.0, 2.0, 3.0).evaluate(MismatchPair(0.0, 0.0)) == 0.0


def test_clone_b_mirrors_clone_a_on_symmetric_machine(rng):
    for _ in range(20):
        eps_a, eps_b = rng.uniform(-0.2, 0.2, size=2)
        clone_b = clone_b_analysis(SYMMETRIC, EfficiencyPair.from_mismatch(eps_a, eps_b))
        clone_a = clone_a_analysis(SYMMETRIC, EfficiencyPair.from_mismatch(eps_b, eps_a))
        assert clone_b.f_psi == pytest.approx(clone_a.f_psi, abs=1e-15)
        assert clone_b.f_perp == pytest.approx(clone_a.f_perp, abs=1e-15)
        assert clone_b.mean == pytest.approx(clone_a.mean, abs=1e-15)


def test_mismatch_domain_matches_efficiency_range():
    for eps in (-1.0, -0.9, -0.81, 4.5, float("nan")):
        with pytest.raises(ParameterError):
            MismatchPair(eps, 0.0)
        with pytest.raises(ParameterError):
            MismatchPair(0.0, eps)
    for eps in (-0.79, 0.0, 3.9):
        assert biased_mean(SYMMETRIC, MismatchPair(eps, eps).to_eta()) > 0.5
    eta = MismatchPair(0.046, -0.16).to_eta()
    assert (eta.eta_a, eta.eta_b) == pytest.approx((1.046, 0.84), abs=1e-15)


def test_robustness_sweep_rows():
    rows = robustness_sweep(SYMMETRIC, eps_max=0.1, points=5)
    assert len(rows) == 25
    for eps_a, eps_b, exact_a, quad_a, bound_a, exact_b, quad_b, bound_b in rows:
        assert bound_a >= abs(quad_a) - 1e-15
        assert bound_b >= abs(quad_b) - 1e-15
        assert exact_a == pytest.approx(quad_a, abs=1e-3)
        if (eps_a, eps_b) == (0.1, 0.0):
            assert abs(exact_a) == pytest.approx(5e-4, rel=0.5)
    for eps_max in (0.8, 0.9, 1.5, 0.0):
        with pytest.raises(ParameterError):
            robustness_sweep(SYMMETRIC, eps_max=eps_max)
    assert len(robustness_sweep(SYMMETRIC, eps_max=0.79, points=3)) == 9
