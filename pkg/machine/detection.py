"""
Coincidence detection: ideal click probabilities, relative-efficiency bias,
count rescaling, and Poisson shot noise.

Block A detects clone A, block B detects clone B. In each block the '+' detector
projects onto basis.psi and the '-' detector onto basis.psi_perp. eta is the
efficiency of the '-' detector relative to the '+' detector of the same block.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from constants import BASIS_LABELS, CON_DETECT, ROLES, STATE_LABELS
from errors import DataError, ParameterError
from machine.cloner import check_t, joint_diagonal
from quantum.states import BasisPair, PureState, catalog_states, mub_bases

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EfficiencyPair:
    eta_a: float
    eta_b: float

    def __post_init__(self):
        for name, value in (("eta_a", self.eta_a), ("eta_b", self.eta_b)):
            if not math.isfinite(value) or value <= 0.0:
                raise ParameterError(f"{name} must be a positive number, got {value!r}")
            if not CON_DETECT["eta_min"] <= value <= CON_DETECT["eta_max"]:
                raise ParameterError(
                    f"{name} = {value!r} outside [{CON_DETECT['eta_min']}, {CON_DETECT['eta_max']}]; "
                    "check the efficiency configuration"
                )

    @classmethod
    def unit(cls) -> "EfficiencyPair":
        return cls(1.0, 1.0)

    @classmethod
    def from_mismatch(cls, eps_a: float, eps_b: float) -> "EfficiencyPair":
        return cls(1.0 + eps_a, 1.0 + eps_b)

    @property
    def mismatch(self) -> tuple[float, float]:
        return self.eta_a - 1.0, self.eta_b - 1.0

    def inverse(self) -> "EfficiencyPair":
        return EfficiencyPair(1.0 / self.eta_a, 1.0 / self.eta_b)

    def swapped(self) -> "EfficiencyPair":
        return EfficiencyPair(self.eta_b, self.eta_a)


@dataclass(frozen=True)
class CoincidenceCounts:
    """Joint clicks (D_A+ D_B+, D_A+ D_B-, D_A- D_B+, D_A- D_B-)."""

    c_pp: float
    c_pm: float
    c_mp: float
    c_mm: float

    def __post_init__(self):
        for value in self.as_tuple():
            if not math.isfinite(value) or value < 0:
                raise DataError(f"coincidence counts must be finite and nonnegative, got {self.as_tuple()}")

    @classmethod
    def from_array(cls, values) -> "CoincidenceCounts":
        values = list(values)
        if len(values) != 4:
            raise DataError(f"expected four coincidence counts, got {len(values)}")
        return cls(*values)

    def as_tuple(self) -> tuple:
        return self.c_pp, self.c_pm, self.c_mp, self.c_mm

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @property
    def total(self) -> float:
        return float(sum(self.as_tuple()))

    def flipped(self) -> "CoincidenceCounts":
        """Swap '+' and '-' in both blocks."""
        return CoincidenceCounts(self.c_mm, self.c_mp, self.c_pm, self.c_pp)


@dataclass(frozen=True)
class MeasurementRecord:
    t: float
    state_index: int
    basis_index: int
    role: str
    counts: CoincidenceCounts
    true_eta: EfficiencyPair | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise DataError(f"role must be one of {ROLES}, got {self.role!r}")
        if not 0 <= self.state_index < len(STATE_LABELS):
            raise DataError(f"state index {self.state_index} out of range")
        if self.basis_index != self.state_index // 2 or ROLES[self.state_index % 2] != self.role:
            raise DataError(
                f"state {STATE_LABELS[self.state_index]} is not the {self.role} member of basis "
                f"{BASIS_LABELS[self.basis_index] if 0 <= self.basis_index < 3 else self.basis_index}"
            )

    @property
    def state_label(self) -> str:
        return STATE_LABELS[self.state_index]

    @property
    def basis_label(self) -> str:
        return BASIS_LABELS[self.basis_index]


# Detector multipliers for (++, +-, -+, --): a '-' click in block A costs eta_a, in block B eta_b
def _bias_factors(eta: EfficiencyPair) -> np.ndarray:
    return np.array([1.0, eta.eta_b, eta.eta_a, eta.eta_a * eta.eta_b])


def _rescale_factors(eta: EfficiencyPair) -> np.ndarray:
    return np.array([eta.eta_a * eta.eta_b, eta.eta_a, eta.eta_b, 1.0])


def ideal_probabilities(state: PureState, basis: BasisPair, t: float) -> CoincidenceCounts:
    basis.role_of(state)
    probs = joint_diagonal(state, check_t(t), basis)
    # clip round-off so zero populations stay valid counts
    probs = np.where(np.abs(probs) < 1e-15, 0.0, probs)
    return CoincidenceCounts.from_array(probs)


def bias_counts(expected: CoincidenceCounts, eta: EfficiencyPair, overall_rate: float) -> CoincidenceCounts:
    if not overall_rate > 0:
        raise ParameterError(f"overall coincidence rate must be positive, got {overall_rate!r}")
    return CoincidenceCounts.from_array(overall_rate * expected.as_array() * _bias_factors(eta))


def rescale_counts(raw: CoincidenceCounts, eta: EfficiencyPair) -> CoincidenceCounts:
    """Undo the efficiency bias up to the common factor eta_a * eta_b."""
    return CoincidenceCounts.from_array(raw.as_array() * _rescale_factors(eta))


def sample_counts(expected: CoincidenceCounts, seed) -> CoincidenceCounts:
    """Independent Poisson draw per outcome."""
    rng = np.random.default_rng(seed)
    drawn = rng.poisson(expected.as_array())
    return CoincidenceCounts.from_array(int(v) for v in drawn)


def derive_seed(root_seed: int, t_index: int, record_index: int) -> int:
    """Seed of one record: SeedSequence([root, t_index, record_index]) -> first 32-bit word."""
    sequence = np.random.SeedSequence([int(root_seed), int(t_index), int(record_index)])
    return int(sequence.generate_state(1)[0])


def run_experiment(
    t: float,
    eta: EfficiencyPair,
    counts_per_setting: float,
    seed: int,
    noiseless: bool = False,
    t_index: int = 0,
) -> list[MeasurementRecord]:
    """
    One record per catalog state. Within a basis the detector assignment stays
    fixed while the signal is switched from psi to psi_perp.
    """
    t = check_t(t)
    if not counts_per_setting > 0:
        raise ParameterError(f"counts per setting must be positive, got {counts_per_setting!r}")

    states = catalog_states()
    records = []
    for basis_index, basis in enumerate(mub_bases()):
        for role in ROLES:
            state_index = 2 * basis_index + ROLES.index(role)
            expected = bias_counts(ideal_probabilities(states[state_index], basis, t), eta, counts_per_setting)
            if noiseless:
                counts = expected
            else:
                counts = sample_counts(expected, derive_seed(seed, t_index, state_index))
            records.append(MeasurementRecord(t, state_index, basis_index, role, counts, eta))

    logger.debug("##### EXPERIMENT t=%.6f eta=(%.4f, %.4f) noiseless=%s", t, eta.eta_a, eta.eta_b, noiseless)
    return records
