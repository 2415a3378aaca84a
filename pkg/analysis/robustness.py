"""
Closed-form effect of miscalibrated detector efficiencies on the measured
clone fidelities of a covariant machine.

Mismatches are eps = eta - 1. Clone B results come from the clone A formulas
with the labels A and B interchanged on both the machine and the efficiencies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from constants import CON_DETECT, CON_ROBUST
from errors import ParameterError
from machine.cloner import MachineTriple
from machine.detection import EfficiencyPair


@dataclass(frozen=True)
class MismatchPair:
    eps_a: float
    eps_b: float

    def __post_init__(self):
        low, high = CON_DETECT["eta_min"], CON_DETECT["eta_max"]
        for name, value in (("eps_a", self.eps_a), ("eps_b", self.eps_b)):
            if not (math.isfinite(value) and low <= 1.0 + value <= high):
                raise ParameterError(f"{name} = {value!r} puts the efficiency 1 + eps outside [{low}, {high}]")

    def to_eta(self) -> EfficiencyPair:
        return EfficiencyPair.from_mismatch(self.eps_a, self.eps_b)

    def swapped(self) -> "MismatchPair":
        return MismatchPair(self.eps_b, self.eps_a)


@dataclass(frozen=True)
class QuadraticErrorForm:
    """Second-order mean-fidelity error coeff_aa eps_a^2 + coeff_ab eps_a eps_b + coeff_bb eps_b^2."""

    coeff_aa: float
    coeff_ab: float
    coeff_bb: float

    def evaluate(self, eps: MismatchPair) -> float:
        return (self.coeff_aa * eps.eps_a ** 2
                + self.coeff_ab * eps.eps_a * eps.eps_b
                + self.coeff_bb * eps.eps_b ** 2)

    def matrix(self) -> np.ndarray:
        half = self.coeff_ab / 2.0
        return np.array([[self.coeff_aa, half], [half, self.coeff_bb]])

    @property
    def bound_factor(self) -> float:
        """Largest eigenvalue magnitude of the form's symmetric matrix."""
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrix()))))


@dataclass(frozen=True)
class CloneAnalysis:
    f_psi: float
    f_perp: float
    mean: float
    form: QuadraticErrorForm


def biased_fidelity_psi(machine: MachineTriple, eta: EfficiencyPair) -> float:
    p, d_a, d_b, d_ab = machine.diagonal
    numerator = p + d_a * eta.eta_b
    return numerator / (numerator + d_b * eta.eta_a + d_ab * eta.eta_a * eta.eta_b)


def biased_fidelity_psi_perp(machine: MachineTriple, eta: EfficiencyPair) -> float:
    p, d_a, d_b, d_ab = machine.diagonal
    numerator = p * eta.eta_a * eta.eta_b + d_a * eta.eta_a
    return numerator / (numerator + d_b * eta.eta_b + d_ab)


def biased_mean(machine: MachineTriple, eta: EfficiencyPair) -> float:
    return 0.5 * (biased_fidelity_psi(machine, eta) + biased_fidelity_psi_perp(machine, eta))


def taylor_form(machine: MachineTriple) -> QuadraticErrorForm:
    f_a, f_b, p = machine.f_a, machine.f_b, machine.p
    return QuadraticErrorForm(
        coeff_aa=0.5 * f_a * (1.0 - f_a) * (1.0 - 2.0 * f_a),
        coeff_ab=(2.0 * f_a - 1.0) * (f_a * f_b - p),
        coeff_bb=0.5 * (p - f_a * f_b) * (1.0 - 2.0 * f_b),
    )


def error_bound(form: QuadraticErrorForm, eps: MismatchPair) -> float:
    """|Q(eps)| <= |lambda|_max (eps_a^2 + eps_b^2)"""
    return form.bound_factor * (eps.eps_a ** 2 + eps.eps_b ** 2)


def clone_a_analysis(machine: MachineTriple, eta: EfficiencyPair) -> CloneAnalysis:
    f_psi = biased_fidelity_psi(machine, eta)
    f_perp = biased_fidelity_psi_perp(machine, eta)
    return CloneAnalysis(f_psi, f_perp, 0.5 * (f_psi + f_perp), taylor_form(machine))


def clone_b_analysis(machine: MachineTriple, eta: EfficiencyPair) -> CloneAnalysis:
    return clone_a_analysis(machine.swapped(), eta.swapped())


def _mean_at(machine: MachineTriple, eps_a: float, eps_b: float) -> float:
    return biased_mean(machine, EfficiencyPair.from_mismatch(eps_a, eps_b))


def mean_gradient(machine: MachineTriple, step: float = CON_ROBUST["fd_step"]) -> np.ndarray:
    """Central-difference gradient of the mean fidelity in (eps_a, eps_b) at zero mismatch."""
    return np.array([
        (_mean_at(machine, step, 0.0) - _mean_at(machine, -step, 0.0)) / (2 * step),
        (_mean_at(machine, 0.0, step) - _mean_at(machine, 0.0, -step)) / (2 * step),
    ])


def mean_hessian(machine: MachineTriple, step: float = 1e-4) -> np.ndarray:
    center = _mean_at(machine, 0.0, 0.0)
    h_aa = (_mean_at(machine, step, 0.0) - 2 * center + _mean_at(machine, -step, 0.0)) / step ** 2
    h_bb = (_mean_at(machine, 0.0, step) - 2 * center + _mean_at(machine, 0.0, -step)) / step ** 2
    h_ab = (_mean_at(machine, step, step) - _mean_at(machine, step, -step)
            - _mean_at(machine, -step, step) + _mean_at(machine, -step, -step)) / (4 * step ** 2)
    return np.array([[h_aa, h_ab], [h_ab, h_bb]])


def robustness_sweep(
    machine: MachineTriple,
    eps_max: float = CON_ROBUST["eps_max"],
    points: int = CON_ROBUST["eps_points"],
) -> list[tuple[float, ...]]:
    """Rows (eps_a, eps_b, exact_a, quadratic_a, bound_a, exact_b, quadratic_b, bound_b)."""
    if not 0.0 < eps_max < CON_ROBUST["eps_limit"]:
        raise ParameterError(f"eps_max must lie in (0, {CON_ROBUST['eps_limit']:g}), got {eps_max!r}")
    form_a = taylor_form(machine)
    form_b = taylor_form(machine.swapped())
    rows = []
    for eps_a in np.linspace(-eps_max, eps_max, points):
        for eps_b in np.linspace(-eps_max, eps_max, points):
            eps = MismatchPair(float(eps_a), float(eps_b))
            eta = eps.to_eta()
            swapped = eps.swapped()
            rows.append((
                eps.eps_a,
                eps.eps_b,
                biased_mean(machine, eta) - machine.f_a,
                form_a.evaluate(eps),
                error_bound(form_a, eps),
                clone_b_analysis(machine, eta).mean - machine.f_b,
                form_b.evaluate(swapped),
                error_bound(form_b, swapped),
            ))
    return rows


def symmetric_bound_factor() -> float:
    """(2 + sqrt(10)) / 108, the bound factor of the optimal symmetric cloner."""
    return (2.0 + math.sqrt(10.0)) / 108.0
