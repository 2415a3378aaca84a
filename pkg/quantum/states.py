"""
Single- and two-photon polarization states.

Amplitudes are ordered (H, V); two-photon matrices use the (HH, HV, VH, VV)
ordering from constants.BASIS_ORDER, first factor = clone A.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from constants import BASIS_LABELS, TOL
from errors import StateError


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PureState:
    """A normalized polarization qubit a_h|H> + a_v|V>. Global phase is free."""

    a_h: complex
    a_v: complex
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        norm = abs(self.a_h) ** 2 + abs(self.a_v) ** 2
        if abs(norm - 1.0) > TOL["algebraic"]:
            raise StateError(f"pure state not normalized: |a_h|^2 + |a_v|^2 = {norm!r}")

    @classmethod
    def from_vector(cls, vector, label: str | None = None) -> "PureState":
        vec = np.asarray(vector, dtype=complex).reshape(2)
        vec = vec / np.linalg.norm(vec)
        return cls(complex(vec[0]), complex(vec[1]), label)

    @property
    def ket(self) -> np.ndarray:
        return _frozen([self.a_h, self.a_v])

    def overlap(self, other: "PureState") -> complex:
        """<self|other>"""
        return complex(np.vdot(self.ket, other.ket))

    def same_ray(self, other: "PureState") -> bool:
        return abs(abs(self.overlap(other)) ** 2 - 1.0) <= TOL["algebraic"]

    def perp(self) -> "PureState":
        return PureState(-np.conj(self.a_v), np.conj(self.a_h))

    def projector(self) -> "DensityMatrix2":
        ket = self.ket
        return DensityMatrix2(np.outer(ket, ket.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian positive semidefinite matrix; trace 1 unless tagged unnormalized."""

    entries: np.ndarray
    normalized: bool = True

    DIM = 0

    def __post_init__(self):
        matrix = _frozen(self.entries)
        object.__setattr__(self, "entries", matrix)
        if matrix.shape != (self.DIM, self.DIM):
            raise StateError(f"{type(self).__name__} expects shape {(self.DIM, self.DIM)}, got {matrix.shape}")

        hermitian_gap = np.max(np.abs(matrix - matrix.conj().T))
        if hermitian_gap > TOL["algebraic"]:
            raise StateError(f"matrix not Hermitian (max |M - M^dag| = {hermitian_gap:.3e})")

        lowest = np.min(np.linalg.eigvalsh(matrix))
        if lowest < -TOL["positivity"]:
            raise StateError(f"matrix not positive semidefinite (min eigenvalue {lowest:.3e})")

        trace = self.trace
        if self.normalized and abs(trace - 1.0) > TOL["algebraic"]:
            raise StateError(f"normalized state has trace {trace!r}")
        if not self.normalized and trace > 1.0 + TOL["algebraic"]:
            raise StateError(f"post-selected state has trace {trace!r} > 1")

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def normalize(self):
        trace = self.trace
        if trace <= 0.0:
            raise StateError("cannot normalize a zero-trace matrix")
        return type(self)(self.entries / trace, normalized=True)

    def allclose(self, other, atol: float = TOL["algebraic"]) -> bool:
        return bool(np.allclose(self.entries, np.asarray(getattr(other, "entries", other)), atol=atol, rtol=0.0))


class DensityMatrix2(DensityMatrix):
    DIM = 2

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix2":
        return cls(np.eye(2) / 2)


class DensityMatrix4(DensityMatrix):
    DIM = 4


@dataclass(frozen=True)
class BasisPair:
    psi: PureState
    psi_perp: PureState
    label: str | None = None

    def __post_init__(self):
        if abs(self.psi.overlap(self.psi_perp)) > TOL["algebraic"]:
            raise StateError(f"basis {self.label or ''} is not orthogonal")

    def role_of(self, state: PureState) -> str:
        """Return 'psi' or 'perp' for a member of this basis."""
        if state.same_ray(self.psi):
            return "psi"
        if state.same_ray(self.psi_perp):
            return "perp"
        raise StateError(f"state {state.label or state} does not belong to basis {self.label}")

    def unitary(self) -> np.ndarray:
        """Columns (psi, psi_perp); maps the analysis frame to the H/V frame."""
        return np.column_stack([self.psi.ket, self.psi_perp.ket])


_R2 = 1 / np.sqrt(2)

_CATALOG = (
    PureState(1, 0, "H"),
    PureState(0, 1, "V"),
    PureState(_R2, _R2, "D"),
    PureState(_R2, -_R2, "A"),
    PureState(_R2, 1j * _R2, "R"),
    PureState(_R2, -1j * _R2, "L"),
)


def catalog_states() -> list[PureState]:
    """H, V, D, A, R, L in that order."""
    return list(_CATALOG)


def mub_bases() -> list[BasisPair]:
    """The three mutually unbiased bases (H,V), (D,A), (R,L)."""
    return [
        BasisPair(_CATALOG[2 * i], _CATALOG[2 * i + 1], label)
        for i, label in enumerate(BASIS_LABELS)
    ]
