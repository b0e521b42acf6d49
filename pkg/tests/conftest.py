import math

import numpy as np
import pytest

from src.dyadic import DyadicSystem, Exponents
from src.testing_conditions import Instance


def make_instance(dimension=1, depth=2, p=2.0, r=2.0, lam=1.0, sigma=1.0, omega=1.0) -> Instance:
    """Istanza con valori scalari (costanti) o array espliciti."""
    system = DyadicSystem(dimension, depth)

    def expand(value, size):
        return np.full(size, float(value)) if np.isscalar(value) else np.asarray(value, dtype=float)

    return Instance(
        system,
        expand(lam, system.n_cubes),
        expand(sigma, system.n_leaves),
        expand(omega, system.n_leaves),
        Exponents(p, r),
    )


@pytest.fixture
def trivial_instance() -> Instance:
    return make_instance(depth=0)


@pytest.fixture
def unit_instance() -> Instance:
    """d=1, L=2, λ ≡ 1, σ = ω ≡ 1, p = r = 2."""
    return make_instance()


@pytest.fixture
def line1() -> DyadicSystem:
    return DyadicSystem(1, 1)


SQRT3 = math.sqrt(3.0)
