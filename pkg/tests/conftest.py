import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nhskin.model import ChainParams

# derandomized so every run draws the same examples
settings.register_profile(
    "fixed",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("fixed")


def random_reducible(rng, n=None, bc="OBC", gamma=0.0):
    n = int(rng.integers(2, 9)) if n is None else n
    return ChainParams.reducible(
        n,
        delta=rng.uniform(-2, 2),
        v=rng.uniform(-2, 0),
        w=rng.uniform(-1.5, 1.5),
        gamma=gamma,
        bc=bc,
    )


def random_general(rng, n=None, bc="OBC", gamma=0.0):
    n = int(rng.integers(2, 9)) if n is None else n

    def c():
        return complex(rng.normal(), rng.normal())

    return ChainParams(n, rng.normal(), -abs(rng.normal()), c(), c(), c(), c(), gamma, bc)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def match_distance(a, b):
    """Largest distance in the minimum-cost pairing of two eigenvalue multisets."""
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())
