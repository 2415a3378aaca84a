"""
Partial-symmetrization cloner.

The idler photon (maximally mixed blank copy) is subsystem A, the signal photon
carrying |psi> is subsystem B. The filter V_S = Pi_+ + t Pi_- attenuates the
singlet component by the amplitude transmittance t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from constants import CON_CLONER, TOL
from errors import ParameterError
from quantum.linalg import partial_trace, tensor, to_product_frame
from quantum.states import BasisPair, DensityMatrix2, DensityMatrix4, PureState

SINGLET = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2)
PI_MINUS = np.outer(SINGLET, SINGLET)
PI_PLUS = np.eye(4) - PI_MINUS


def check_t(t: float) -> float:
    t = float(t)
    if not CON_CLONER["t_min"] <= t <= CON_CLONER["t_max"] or math.isnan(t):
        raise ParameterError(f"transmittance t must lie in [0, 1], got {t!r}")
    return t


@dataclass(frozen=True)
class ClonerParams:
    t: float

    def __post_init__(self):
        object.__setattr__(self, "t", check_t(self.t))

    @property
    def fidelities(self) -> tuple[float, float]:
        return clone_fidelities(self.t)

    @property
    def p(self) -> float:
        return 2.0 / (3.0 + self.t ** 2)

    @property
    def success_prob(self) -> float:
        return success_probability(self.t)

    def machine(self) -> "MachineTriple":
        return machine_triple(self.t)


@dataclass(frozen=True)
class MachineTriple:
    """Covariant two-clone machine fixed by (F_A, F_B, P)."""

    f_a: float
    f_b: float
    p: float

    def __post_init__(self):
        for name, value in zip(("F_A", "F_B", "P"), (self.f_a, self.f_b, self.p)):
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        tol = TOL["algebraic"]
        for name, value in zip(("P", "F_A - P", "F_B - P", "1 + P - F_A - F_B"), self.diagonal):
            if not -tol <= value <= 1.0 + tol:
                raise ParameterError(f"machine diagonal element {name} = {value!r} outside [0, 1]")

    @property
    def diagonal(self) -> tuple[float, float, float, float]:
        """Joint clone populations for (psi psi, psi perp, perp psi, perp perp)."""
        return (
            self.p,
            self.f_a - self.p,
            self.f_b - self.p,
            1.0 + self.p - self.f_a - self.f_b,
        )

    def swapped(self) -> "MachineTriple":
        return MachineTriple(self.f_b, self.f_a, self.p)


def standard_t_values() -> list[float]:
    """t = sqrt(n/5), n = 0..5"""
    return [math.sqrt(n / 5) for n in range(CON_CLONER["standard_settings"])]


def symmetrizer(t: float) -> np.ndarray:
    t = check_t(t)
    return PI_PLUS + t * PI_MINUS


def apply_cloner(state: PureState, t: float) -> tuple[DensityMatrix4, float]:
    """Unnormalized post-selected output V_S (rho_I x psi) V_S^dag and its trace."""
    v_s = symmetrizer(t)
    rho_in = tensor(DensityMatrix2.maximally_mixed(), state.projector())
    rho_out = v_s @ rho_in.entries @ v_s.T
    out = DensityMatrix4(rho_out, normalized=False)
    return out, out.trace


def success_probability(t: float) -> float:
    t = check_t(t)
    return (3.0 + t ** 2) / 4.0


def clone_states(state: PureState, t: float) -> tuple[DensityMatrix2, DensityMatrix2]:
    rho_out, _ = apply_cloner(state, t)
    normalized = rho_out.normalize()
    return partial_trace(normalized, "A"), partial_trace(normalized, "B")


def closed_form_clone_states(state: PureState, t: float) -> tuple[DensityMatrix2, DensityMatrix2]:
    t = check_t(t)
    psi = state.projector().entries
    perp = state.perp().projector().entries
    scale = 2.0 * (3.0 + t ** 2)
    rho_a = ((5.0 - 2.0 * t + t ** 2) * psi + (1.0 + t) ** 2 * perp) / scale
    rho_b = ((5.0 + 2.0 * t + t ** 2) * psi + (1.0 - t) ** 2 * perp) / scale
    return DensityMatrix2(rho_a), DensityMatrix2(rho_b)


def clone_fidelities(t: float) -> tuple[float, float]:
    t = check_t(t)
    scale = 2.0 * (3.0 + t ** 2)
    return (5.0 - 2.0 * t + t ** 2) / scale, (5.0 + 2.0 * t + t ** 2) / scale


def tradeoff_residual(f_a: float, f_b: float) -> float:
    """Zero on the optimal universal trade-off curve."""
    return (1.0 - f_a) * (1.0 - f_b) - (f_a + f_b - 1.5) ** 2


def optimal_partner(f_a: float) -> float:
    """Largest F_B on the optimal curve for a given F_A in [1/2, 5/6]."""
    # (1 - a)(1 - b) = (a + b - 3/2)^2 as a quadratic in b
    s = f_a - 1.5
    b_coef = 2.0 * s + (1.0 - f_a)
    c_coef = s ** 2 - (1.0 - f_a)
    disc = b_coef ** 2 - 4.0 * c_coef
    if disc < -TOL["algebraic"]:
        raise ParameterError(f"F_A = {f_a!r} has no partner on the optimal curve")
    return (-b_coef + math.sqrt(max(disc, 0.0))) / 2.0


def tradeoff_gap(f_a: float, f_b: float) -> float:
    """How far F_B lies below the optimal partner of F_A (positive = suboptimal)."""
    return optimal_partner(min(max(f_a, 0.5), 5.0 / 6.0)) - f_b


def tradeoff_curve(points: int = CON_CLONER["curve_points"]) -> list[tuple[float, float, float]]:
    return [(float(t), *clone_fidelities(t)) for t in np.linspace(0.0, 1.0, points)]


def machine_triple(t: float) -> MachineTriple:
    f_a, f_b = clone_fidelities(t)
    return MachineTriple(f_a, f_b, 2.0 / (3.0 + t ** 2))


def joint_diagonal(state: PureState, t: float, basis: BasisPair | None = None) -> np.ndarray:
    """
    Populations of the normalized two-clone state in a product analysis frame.

    With basis=None the frame is (psi, psi_perp) built from the input itself.
    Entries follow (++, +-, -+, --), '+' = basis.psi, first index = clone A.
    """
    if basis is None:
        basis = BasisPair(state, state.perp())
    rho_out, success = apply_cloner(state, t)
    rotated = to_product_frame(rho_out, basis.unitary()) / success
    return np.real(np.diag(rotated)).copy()
