"""Small labelled tree corpora for experiments and tests."""

from __future__ import annotations

import numpy as np

from .gesl import counterexample_dataset
from .trees import Alphabet, Dataset, Tree

__all__ = ["synthetic_dataset", "counterexample_dataset"]

SYMBOLS = ("a", "b", "c", "d")

# class-specific label frequencies; "c" and "d" are shared noise
_PROFILES = {
    "A": (0.50, 0.05, 0.25, 0.20),
    "B": (0.05, 0.50, 0.20, 0.25),
}


def _grow(rng: np.random.Generator, labels: list[str]) -> Tree:
    """Attach nodes in order, each under a uniformly chosen earlier node."""
    kids: list[list[int]] = [[] for _ in labels]
    for k in range(1, len(labels)):
        kids[int(rng.integers(k))].append(k)

    def build(k: int) -> Tree:
        return Tree(labels[k], tuple(build(j) for j in kids[k]))

    return build(0)


def synthetic_dataset(n_per_class: int = 20, seed: int = 0, min_size: int = 2, max_size: int = 6) -> Dataset:
    """Two classes of random trees whose label statistics differ.

    Class "A" favours label ``a`` and class "B" label ``b``; labels ``c`` and
    ``d`` are shared noise, so a good cost makes a/b edits expensive and c/d
    edits cheap.
    """
    if n_per_class < 2 or not 1 <= min_size <= max_size:
        raise ValueError("need n_per_class >= 2 and 1 <= min_size <= max_size")
    rng = np.random.default_rng(seed)
    A = Alphabet(SYMBOLS)
    records = []
    for _ in range(n_per_class):
        for cls, probs in _PROFILES.items():
            size = int(rng.integers(min_size, max_size + 1))
            labels = [SYMBOLS[int(k)] for k in rng.choice(len(SYMBOLS), size=size, p=probs)]
            records.append((_grow(rng, labels), cls))
    return Dataset(A, records)
