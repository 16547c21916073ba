"""Median/GLVQ metric learning over edit distances.

Two parameterizations: the cost table itself (``direct_cost``), projected back
to a pseudo-metric after every step, and a symbol embedding (``embedding``)
whose Euclidean distances are the costs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .costs import (
    CostTable,
    EmbeddingMatrix,
    check_pseudometric,
    cost_from_embedding,
    embedding_gradient,
    metric_projection,
    simplex_embedding,
)
from .distances import pairwise_true, pseudo_from_tensor, summary_tensor
from .ted import summarize_cooptimal
from .trees import Dataset, Tree

log = logging.getLogger(__name__)


@dataclass
class LvqConfig:
    mode: str = "embedding"  # "direct_cost" (L1) or "embedding" (L2)
    distance_head: str = "pseudo"  # "pseudo" or "true_ted"
    learning_rate: float = 0.05
    max_iters: int = 100
    enforce_metric: bool = True  # direct_cost only
    embedding_dimension: int | None = None
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.mode not in ("direct_cost", "embedding"):
            raise ValueError(f"unknown LVQ mode {self.mode!r}")
        if self.distance_head not in ("pseudo", "true_ted"):
            raise ValueError(f"unknown distance head {self.distance_head!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class LvqResult:
    cost: CostTable
    embedding: EmbeddingMatrix | None
    prototypes: dict[str, int]
    loss_trace: list[float]
    best_trace: list[float]
    converged: bool
    metric_ok: list[bool] = field(default_factory=list)

    @property
    def best_loss(self) -> float:
        return self.best_trace[-1]


def select_medoid_prototypes(d: Dataset, dist: np.ndarray) -> dict[str, int]:
    """Per class, the record with the smallest summed distance to its class (lowest index on ties)."""
    dist = np.asarray(dist)
    labels = d.labels
    protos = {}
    for cls in d.classes:
        members = [i for i, y in enumerate(labels) if y == cls]
        sums = [float(np.sum(dist[i, members])) for i in members]
        protos[cls] = members[int(np.argmin(sums))]
    return protos


def _closest(labels, protos, dist_row, i):
    """(d+, w+, d-, w-) for record i, or None when it has no scoring partner."""
    plus = minus = None
    for cls, w in protos.items():
        if w == i:
            continue
        d = dist_row[w]
        if cls == labels[i]:
            if plus is None or d < plus[0]:
                plus = (d, w)
        elif minus is None or d < minus[0]:
            minus = (d, w)
    if plus is None or minus is None:
        return None
    return plus + minus


def glvq_terms(d: Dataset, protos: dict[str, int], dist: np.ndarray):
    """Per scored record: (index, mu, d+, w+, d-, w-).

    A record that is itself a prototype is skipped unless another prototype of
    its class exists.
    """
    if len(d.classes) < 2:
        raise ValueError("GLVQ needs at least two classes")
    labels = d.labels
    out = []
    for i in range(len(d)):
        found = _closest(labels, protos, dist[i], i)
        if found is None:
            continue
        dp, wp, dm, wm = found
        s = dp + dm
        mu = 0.0 if s == 0 else (dp - dm) / s
        out.append((i, mu, dp, wp, dm, wm))
    return out


def glvq_loss(d: Dataset, protos: dict[str, int], dist: np.ndarray) -> float:
    """Sum of (d+ - d-) / (d+ + d-) over scored records; ``dist[i, w]`` is record-to-prototype."""
    return float(sum(t[1] for t in glvq_terms(d, protos, np.asarray(dist))))


def glvq_cost_gradient(
    d: Dataset,
    protos: dict[str, int],
    dist: np.ndarray,
    counts: Callable[[int, int], np.ndarray],
) -> tuple[float, np.ndarray]:
    """Loss and its gradient w.r.t. the cost table.

    ``counts(i, w)`` is the edit-key count matrix that makes ``dist[i, w]``
    linear in the cost (reference summary or current optimal summary).
    """
    m = len(d.alphabet) + 1
    loss = 0.0
    grad = np.zeros((m, m))
    for i, mu, dp, wp, dm, wm in glvq_terms(d, protos, dist):
        loss += mu
        s = dp + dm
        if s == 0:
            continue
        grad += (2 * dm / s**2) * counts(i, wp) - (2 * dp / s**2) * counts(i, wm)
    return loss, grad


def lvq_fit(
    d: Dataset,
    cfg: LvqConfig,
    c0: CostTable | None = None,
    init_cost: CostTable | None = None,
    init_embedding: EmbeddingMatrix | None = None,
    summaries: np.ndarray | None = None,
) -> LvqResult:
    """Gradient descent on the GLVQ loss with medoid prototypes refreshed every epoch.

    The pseudo head prices the co-optimal summaries of the reference cost
    ``c0`` (``summaries`` may pass them precomputed, shape (n, n, m, m)); the
    true head recomputes the DP and differentiates through the current
    optimal summaries.
    """
    trees = d.trees
    if cfg.mode == "embedding":
        emb = init_embedding or simplex_embedding(d.alphabet, cfg.embedding_dimension)
        cost = cost_from_embedding(emb)
    else:
        emb = None
        cost = init_cost or cost_from_embedding(simplex_embedding(d.alphabet))
    if cfg.distance_head == "pseudo" and summaries is None:
        summaries = summary_tensor(trees, c0 or cost)

    losses, best_trace, metric_ok = [], [], []
    best = (np.inf, cost, emb, None)
    converged = False
    for epoch in range(cfg.max_iters):
        if cfg.distance_head == "pseudo":
            dist = pseudo_from_tensor(summaries, cost)
            counts = lambda i, j: summaries[i, j]  # noqa: E731
        else:
            dist = pairwise_true(trees, cost)
            current = _CurrentSummaries(trees, cost)
            counts = current
        protos = select_medoid_prototypes(d, dist)
        loss, gc = glvq_cost_gradient(d, protos, dist, counts)
        losses.append(loss)
        metric_ok.append(check_pseudometric(cost).is_pseudometric)
        if loss < best[0]:
            best = (loss, cost, emb, protos)
        best_trace.append(best[0])
        if epoch >= 10 and best_trace[-10] - best_trace[-1] <= cfg.tolerance * max(1.0, abs(best[0])):
            converged = True
            break
        step = cfg.learning_rate / len(d)
        if cfg.mode == "embedding":
            emb = EmbeddingMatrix(emb.alphabet, emb.vectors - step * embedding_gradient(emb, gc))
            cost = cost_from_embedding(emb)
        else:
            stepped = cost.replace(cost.entries - step * gc)
            if cfg.enforce_metric:
                cost = metric_projection(stepped)
            else:
                cost = stepped.replace(np.maximum(stepped.entries, 0.0))
    if not converged:
        log.info("LVQ stopped at max_iters=%d without meeting tolerance", cfg.max_iters)
    _, cost, emb, protos = best
    return LvqResult(cost, emb, protos, losses, best_trace, converged, metric_ok)


class _CurrentSummaries:
    def __init__(self, trees: Sequence[Tree], c: CostTable):
        self.trees, self.c, self.memo = trees, c, {}

    def __call__(self, i: int, j: int) -> np.ndarray:
        key = (str(self.trees[i]), str(self.trees[j]))
        if key not in self.memo:
            self.memo[key] = summarize_cooptimal(self.trees[i], self.trees[j], self.c, check=False).counts
        return self.memo[key]


def knn_evaluate(d: Dataset, dist: np.ndarray, k: int = 1) -> float:
    """Leave-one-out k-NN error; distance ties go to the lower index, vote ties to the nearer class."""
    n = len(d)
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < number of records")
    labels = d.labels
    errors = 0
    for i in range(n):
        others = [j for j in range(n) if j != i]
        others.sort(key=lambda j: (dist[i][j], j))
        errors += predict_vote([labels[j] for j in others[:k]]) != labels[i]
    return errors / n


def predict_vote(neighbor_labels: Sequence[str]) -> str:
    """Majority label among neighbors listed nearest first."""
    counts: dict[str, int] = {}
    for y in neighbor_labels:
        counts[y] = counts.get(y, 0) + 1
    top = max(counts.values())
    return next(y for y in neighbor_labels if counts[y] == top)


def knn_predict(train_labels: Sequence[str], dist: np.ndarray, k: int = 1) -> list[str]:
    """Labels for each row of a (test x train) distance matrix."""
    out = []
    for row in np.asarray(dist):
        order = sorted(range(len(row)), key=lambda j: (row[j], j))
        out.append(predict_vote([train_labels[j] for j in order[:k]]))
    return out


def prototype_predict(protos: dict[str, int], dist: np.ndarray) -> list[str]:
    """Nearest-prototype labels; ``dist`` columns are indexed like the training records."""
    items = sorted(protos.items(), key=lambda kv: kv[1])
    out = []
    for row in np.asarray(dist):
        out.append(min(items, key=lambda kv: (row[kv[1]], kv[1]))[0])
    return out
