import numpy as np
import pytest

from inacc import ProbabilityVector


@pytest.fixture
def fixture_pair():
    """The worked n=3 pair used throughout: p* = (0.5, 0.3, 0.2), p uniform."""
    return ProbabilityVector([0.5, 0.3, 0.2]), ProbabilityVector.uniform(3)


def random_positive_pair(rng: np.random.Generator, n: int, floor: float = 1e-4):
    """A Dirichlet (p*, p) pair with both measures comfortably positive."""
    while True:
        p_star = rng.dirichlet(np.ones(n))
        p = rng.dirichlet(np.ones(n))
        if p_star.min() >= floor and p.min() >= floor:
            return ProbabilityVector(p_star), ProbabilityVector(p)
