import numpy as np

from constants import TOL
from errors import StateError
from quantum.states import DensityMatrix2, DensityMatrix4, PureState


def tensor(left: DensityMatrix2, right: DensityMatrix2) -> DensityMatrix4:
    """Kronecker product, left factor is subsystem A."""
    normalized = left.normalized and right.normalized
    return DensityMatrix4(np.kron(left.entries, right.entries), normalized=normalized)


def partial_trace(state: DensityMatrix4, keep: str) -> DensityMatrix2:
    """Reduce a two-qubit matrix to subsystem 'A' or 'B'. Trace is preserved."""
    # rho[a, b, a', b'] in the (HH, HV, VH, VV) ordering
    rho = state.entries.reshape(2, 2, 2, 2)
    if keep == "A":
        reduced = np.einsum("ijkj->ik", rho)
    elif keep == "B":
        reduced = np.einsum("jijk->ik", rho)
    else:
        raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")
    return DensityMatrix2(reduced, normalized=state.normalized)


def fidelity(state: DensityMatrix2, target: PureState) -> float:
    """<target|state|target> for a normalized one-qubit state."""
    if not state.normalized or abs(state.trace - 1.0) > TOL["algebraic"]:
        raise StateError("fidelity needs a normalized state; divide by the success probability first")
    ket = target.ket
    value = np.vdot(ket, state.entries @ ket)
    if abs(value.imag) > TOL["algebraic"]:
        raise StateError(f"fidelity has imaginary part {value.imag:.3e}")
    return float(value.real)


def to_product_frame(state: DensityMatrix4, unitary: np.ndarray) -> np.ndarray:
    """Express a two-qubit matrix in the product frame whose columns are given by unitary."""
    frame = np.kron(unitary, unitary)
    return frame.conj().T @ state.entries @ frame
