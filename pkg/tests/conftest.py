import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from tedlearn.costs import CostTable, metric_projection
from tedlearn.trees import Alphabet, Tree

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ABC = Alphabet(("a", "b", "c"))


@st.composite
def trees(draw, symbols=("a", "b", "c"), max_size=5):
    """Ordered tree: node k > 0 hangs under a uniformly drawn earlier node."""
    n = draw(st.integers(1, max_size))
    labels = [draw(st.sampled_from(symbols)) for _ in range(n)]
    parents = [draw(st.integers(0, k - 1)) for k in range(1, n)]
    kids = [[] for _ in range(n)]
    for k, p in enumerate(parents, start=1):
        kids[p].append(k)

    def build(k):
        return Tree(labels[k], tuple(build(j) for j in kids[k]))

    return build(0)


def random_metric_cost(rng: np.random.Generator, alphabet: Alphabet = ABC) -> CostTable:
    m = len(alphabet) + 1
    raw = rng.uniform(0.1, 2.0, size=(m, m))
    return metric_projection(CostTable(alphabet, raw))


def random_cost(rng: np.random.Generator, alphabet: Alphabet = ABC, low=0.0, high=2.0) -> CostTable:
    m = len(alphabet) + 1
    return CostTable(alphabet, rng.uniform(low, high, size=(m, m)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
