import numpy as np
import pytest

from machine.cloner import MachineTriple
from quantum.states import DensityMatrix2, PureState


@pytest.fixture
def rng():
    return np.random.default_rng(9771)


def random_state(rng) -> PureState:
    return PureState.from_vector(rng.normal(size=2) + 1j * rng.normal(size=2))


def random_density(rng) -> DensityMatrix2:
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix2(rho / np.real(np.trace(rho)))


def random_machine(rng) -> MachineTriple:
    p, d_a, d_b, _ = rng.dirichlet(np.ones(4))
    return MachineTriple(p + d_a, p + d_b, p)


def random_eta_values(rng, low=0.7, high=1.4) -> tuple[float, float]:
    return tuple(float(v) for v in rng.uniform(low, high, size=2))
