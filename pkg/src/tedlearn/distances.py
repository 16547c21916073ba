"""Pairwise distance matrices with per-call memoization on tree text."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .costs import CostTable
from .ted import ScriptSummary, summarize_cooptimal, summarize_one, tree_distance
from .trees import Tree


def pairwise_true(
    trees: Sequence[Tree],
    c: CostTable,
    rows: Sequence[int] | None = None,
    cols: Sequence[int] | None = None,
    col_trees: Sequence[Tree] | None = None,
) -> np.ndarray:
    """DP edit distances ``d(trees[i], col_trees[j])``; identical tree pairs are computed once."""
    col_trees = trees if col_trees is None else col_trees
    rows = range(len(trees)) if rows is None else rows
    cols = range(len(col_trees)) if cols is None else cols
    text_r = [str(t) for t in trees]
    text_c = [str(t) for t in col_trees]
    memo: dict[tuple[str, str], float] = {}
    out = np.zeros((len(rows), len(cols)))
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            key = (text_r[i], text_c[j])
            if key not in memo:
                memo[key] = 0.0 if key[0] == key[1] and _zero_diag(c) else tree_distance(
                    trees[i], col_trees[j], c)
            out[a, b] = memo[key]
    return out


def _zero_diag(c: CostTable) -> bool:
    return bool(np.all(np.diag(c.entries) == 0) and np.all(c.entries >= 0))


def summary_tensor(
    trees: Sequence[Tree],
    c: CostTable,
    mode: str = "all_cooptimal",
    col_trees: Sequence[Tree] | None = None,
) -> np.ndarray:
    """(rows, cols, m, m) summaries under a reference cost; pseudo distances are ``S @ c``."""
    col_trees = trees if col_trees is None else col_trees
    memo: dict[tuple[str, str], np.ndarray] = {}
    m = c.entries.shape[0]
    S = np.zeros((len(trees), len(col_trees), m, m))
    for i, x in enumerate(trees):
        for j, y in enumerate(col_trees):
            key = (str(x), str(y))
            if key not in memo:
                memo[key] = summarize(x, y, c, mode).counts
            S[i, j] = memo[key]
    return S


def summarize(x: Tree, y: Tree, c: CostTable, mode: str) -> ScriptSummary:
    if mode == "single":
        return summarize_one(x, y, c)
    if mode == "all_cooptimal":
        return summarize_cooptimal(x, y, c, check=False)
    raise ValueError(f"unknown script mode {mode!r}")


def pseudo_from_tensor(S: np.ndarray, c: CostTable) -> np.ndarray:
    return np.einsum("ijuv,uv->ij", S, c.entries)
