"""Good edit similarity learning (GESL) with frozen reference scripts.

Pseudo edit distances price the edit counts of scripts that were optimal under
a reference cost ``c0``; the learned cost minimizes a regularized hinge loss
over positive and negative pairs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .costs import CostTable, check_pseudometric, nearest_pseudometric, uniform_cost
from .lvq import select_medoid_prototypes
from .ted import (
    NotPseudometricError,
    ScriptSummary,
    tree_distance,
    true_distance_oracle,
)
from .distances import summarize
from .trees import Alphabet, Dataset, Tree, parse_tree

log = logging.getLogger(__name__)

LOG2 = math.log(2)


@dataclass
class PairSet:
    positives: list[tuple[int, int]] = field(default_factory=list)
    negatives: list[tuple[int, int]] = field(default_factory=list)

    def validate(self, d: Dataset) -> None:
        labels = d.labels
        for i, j in self.positives:
            if labels[i] != labels[j]:
                raise ValueError(f"positive pair {(i, j)} crosses classes")
        for i, j in self.negatives:
            if labels[i] == labels[j]:
                raise ValueError(f"negative pair {(i, j)} shares a class")


@dataclass
class GeslConfig:
    beta: float = 0.1
    margin_gamma: float = LOG2
    script_mode: str = "single"  # or "all_cooptimal"
    enforce_metric: bool = False
    step_size: float = 1.0
    max_iters: int = 4000
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.beta <= 0 or self.margin_gamma <= 0 or self.step_size <= 0:
            raise ValueError("beta, margin_gamma and step_size must be positive")
        if self.script_mode not in ("single", "all_cooptimal"):
            raise ValueError(f"unknown script mode {self.script_mode!r}")


@dataclass
class GeslResult:
    cost: CostTable
    eta: float
    loss: float
    loss_trace: list[float]
    converged: bool
    summaries: dict[tuple[int, int], ScriptSummary]


def select_pairs(d: Dataset, dist: np.ndarray) -> PairSet:
    """Nearest same-class and furthest other-class partner per record; ties by index."""
    labels = d.labels
    n = len(d)
    if len(set(labels)) < 2:
        raise ValueError("pair selection needs at least two classes")
    pairs = PairSet()
    for i in range(n):
        same = [j for j in range(n) if j != i and labels[j] == labels[i]]
        other = [j for j in range(n) if labels[j] != labels[i]]
        if not same:
            raise ValueError(f"record {i} is alone in class {labels[i]!r}")
        pairs.positives.append((i, min(same, key=lambda j: (dist[i][j], j))))
        pairs.negatives.append((i, min(other, key=lambda j: (-dist[i][j], j))))
    return pairs


def select_medoid_pairs(d: Dataset, dist: np.ndarray) -> PairSet:
    """Anchor every record to its class medoid (positive) and the other medoids (negative)."""
    protos = select_medoid_prototypes(d, dist)
    labels = d.labels
    pairs = PairSet()
    for i, y in enumerate(labels):
        for cls, w in protos.items():
            if w == i:
                continue
            (pairs.positives if cls == y else pairs.negatives).append((i, w))
    return pairs


def pseudo_distance(summary: ScriptSummary, c: CostTable) -> float:
    return summary.pseudo_distance(c)


def hinge(z):
    return np.maximum(z, 0.0)


def gesl_loss(
    pos_d, neg_d, c: CostTable | np.ndarray, eta: float, beta: float, gamma: float = LOG2
) -> float:
    """beta * ||c||^2 + sum_P [d - eta]_+ + sum_N [gamma + eta - d]_+"""
    C = c.entries if isinstance(c, CostTable) else np.asarray(c)
    pos_d, neg_d = np.asarray(pos_d, float), np.asarray(neg_d, float)
    return float(
        beta * np.sum(C**2) + np.sum(hinge(pos_d - eta)) + np.sum(hinge(gamma + eta - neg_d))
    )


def pair_summaries(
    trees: list[Tree], pairs: PairSet, c0: CostTable, mode: str
) -> dict[tuple[int, int], ScriptSummary]:
    if mode == "all_cooptimal" and not check_pseudometric(c0).is_pseudometric:
        raise NotPseudometricError("reference cost must be a pseudo-metric")
    out = {}
    for i, j in set(pairs.positives) | set(pairs.negatives):
        out[(i, j)] = summarize(trees[i], trees[j], c0, mode)
    return out


def gesl_fit(d: Dataset, pairs: PairSet, c0: CostTable, cfg: GeslConfig) -> GeslResult:
    """Projected subgradient descent on the GESL objective over (cost, eta).

    Steps shrink as ``step_size / (2 beta (t + 1))``, the classic schedule for
    a 2*beta-strongly convex objective; after each step the cost is
    projected onto c >= 0 (or onto the pseudo-metrics when
    ``cfg.enforce_metric``) and eta is clipped to [0, gamma]. The best iterate
    is returned.
    """
    summaries = pair_summaries(d.trees, pairs, c0, cfg.script_mode)
    m = c0.entries.shape[0]
    P = np.array([summaries[p].counts for p in pairs.positives]).reshape(-1, m, m)
    N = np.array([summaries[p].counts for p in pairs.negatives]).reshape(-1, m, m)
    beta, gamma = cfg.beta, cfg.margin_gamma

    def project(C):
        return nearest_pseudometric(C) if cfg.enforce_metric else np.maximum(C, 0.0)

    def evaluate(C, eta):
        dp = np.einsum("kuv,uv->k", P, C)
        dn = np.einsum("kuv,uv->k", N, C)
        return gesl_loss(dp, dn, C, eta, beta, gamma), dp, dn

    C = project(c0.entries.copy())
    eta = 0.0
    best_loss, best_C, best_eta = math.inf, C, eta
    trace: list[float] = []
    converged = False
    window = 200
    for t in range(cfg.max_iters):
        loss, dp, dn = evaluate(C, eta)
        if loss < best_loss:
            best_loss, best_C, best_eta = loss, C, eta
        trace.append(best_loss)
        if t >= window and trace[-window] - best_loss <= cfg.tolerance * max(1.0, best_loss):
            converged = True
            break
        act_p = dp - eta > 0
        act_n = gamma + eta - dn > 0
        gC = 2 * beta * C + P[act_p].sum(axis=0) - N[act_n].sum(axis=0)
        geta = -float(act_p.sum()) + float(act_n.sum())
        alpha = cfg.step_size / (2 * beta * (t + 1))
        C = project(C - alpha * gC)
        eta = min(max(eta - alpha * geta, 0.0), gamma)
    if not converged:
        log.info("GESL stopped at max_iters=%d without meeting tolerance", cfg.max_iters)
    return GeslResult(c0.replace(best_C), best_eta, best_loss, trace, converged, summaries)


def edit_distance(x: Tree, y: Tree, c: CostTable) -> float:
    """The cheapest edit script cost.

    The DP is exact when the cost satisfies the triangle inequality and is
    nonnegative; otherwise the shortest-path search over intermediate forests
    is used, which is only feasible for small trees.
    """
    audit = check_pseudometric(c)
    if not audit.triangle and not audit.nonnegativity:
        return tree_distance(x, y, c)
    return true_distance_oracle(x, y, c)


@dataclass
class LossReport:
    pseudo_learned: float  # E(d~_c, P, N)
    true_learned: float  # E(d_c, P, N)
    true_reference: float  # E(d_c0, P, N) at eta = 0
    eta: float

    @property
    def true_exceeds_pseudo(self) -> bool:
        return self.true_learned > self.pseudo_learned

    @property
    def true_exceeds_reference(self) -> bool:
        return self.true_learned > self.true_reference


def loss_comparison_report(
    d: Dataset,
    pairs: PairSet,
    c_learned: CostTable,
    c0: CostTable,
    cfg: GeslConfig,
    eta: float = 0.0,
) -> LossReport:
    trees = d.trees
    summaries = pair_summaries(trees, pairs, c0, cfg.script_mode)

    def loss(c, dist, eta_):
        dp = [dist(i, j) for i, j in pairs.positives]
        dn = [dist(i, j) for i, j in pairs.negatives]
        return gesl_loss(dp, dn, c, eta_, cfg.beta, cfg.margin_gamma)

    return LossReport(
        pseudo_learned=loss(c_learned, lambda i, j: summaries[(i, j)].pseudo_distance(c_learned), eta),
        true_learned=loss(c_learned, lambda i, j: edit_distance(trees[i], trees[j], c_learned), eta),
        true_reference=loss(c0, lambda i, j: edit_distance(trees[i], trees[j], c0), 0.0),
        eta=eta,
    )


def counterexample_dataset() -> Dataset:
    """Trees 1(2), 2 in class "1" and 3, 3 in class "2" over the alphabet {1, 2, 3}."""
    A = Alphabet(("1", "2", "3"))
    texts = [("1(2)", "1"), ("2", "1"), ("3", "2"), ("3", "2")]
    return Dataset(A, [(parse_tree(t, A), y) for t, y in texts])


def counterexample_costs() -> dict[str, CostTable]:
    """Reference cost and the two learned optima worked out by hand for the counterexample."""
    A = Alphabet(("1", "2", "3"))
    h = LOG2 / 2
    c1 = [
        [0, 0, h, 0],
        [0, 0, LOG2, h],
        [h, 0, 0, 0],
        [0, h, 0, 0],
    ]
    c2 = [
        [0, 0, h, 0],
        [0, 0, LOG2, h],
        [h, LOG2, 0, h],
        [0, h, h, 0],
    ]
    return {
        "c0": uniform_cost(A, LOG2),
        "c1": CostTable(A, np.array(c1, dtype=float)),
        "c2": CostTable(A, np.array(c2, dtype=float)),
    }
