"""Crossvalidated comparison of the five cost-learning variants under both distance heads.

Variants, in row order:

1. G1: GESL on one backtraced script per pair, nearest/furthest pairs.
2. G2: GESL on all co-optimal scripts, nearest/furthest pairs.
3. G3: GESL on all co-optimal scripts, pairs anchored at class medoids.
4. L1: GLVQ learning the cost table, projected to a pseudo-metric.
5. L2: GLVQ learning a symbol embedding.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .costs import CostTable, uniform_cost
from .distances import pairwise_true, pseudo_from_tensor, summary_tensor
from .gesl import GeslConfig, gesl_fit, select_medoid_pairs, select_pairs
from .lvq import LvqConfig, knn_predict, lvq_fit, prototype_predict, select_medoid_prototypes
from .trees import Dataset

log = logging.getLogger(__name__)

VARIANTS = ("G1", "G2", "G3", "L1", "L2")
HEADS = ("pseudo", "true")
HEAD_FILES = {"pseudo": "pseudo-edit_distance", "true": "edit_distance"}
COLUMNS = ("m", "knn_mean", "knn_std", "mrglvq_mean", "mrglvq_std")


class InfeasibleSplitError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    variants: tuple[str, ...] = VARIANTS
    folds: int = 5
    seed: int = 0
    beta: float = 0.1
    gamma: float = math.log(2)
    g2_metric: bool = False
    lvq_epochs: int = 30
    lvq_learning_rate: float = 0.05
    gesl_iters: int = 2000

    def __post_init__(self):
        unknown = [v for v in self.variants if v not in VARIANTS]
        if unknown:
            raise ValueError(f"unknown variants {unknown}")
        if self.folds < 2:
            raise ValueError("need at least 2 folds")


@dataclass
class FoldScore:
    variant: str
    head: str
    fold: int
    knn_error: float
    prototype_error: float


@dataclass
class ExperimentResult:
    scores: list[FoldScore] = field(default_factory=list)
    # per L2 run: best-iterate loss trace; per L1 run: audit verdict per epoch
    l2_best_traces: list[list[float]] = field(default_factory=list)
    l1_metric_ok: list[list[bool]] = field(default_factory=list)

    def table(self, head: str, variants=VARIANTS) -> list[dict[str, float]]:
        rows = []
        for v in variants:
            got = [s for s in self.scores if s.variant == v and s.head == head]
            knn = np.array([s.knn_error for s in got])
            proto = np.array([s.prototype_error for s in got])
            rows.append({
                "m": VARIANTS.index(v) + 1,
                "knn_mean": float(knn.mean()),
                "knn_std": float(knn.std()),
                "mrglvq_mean": float(proto.mean()),
                "mrglvq_std": float(proto.std()),
            })
        return rows

    def write_csv(self, out_dir: str | Path, variants=VARIANTS) -> list[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for head in HEADS:
            path = out_dir / f"experiment_results_{HEAD_FILES[head]}.csv"
            with path.open("w", newline="") as fh:
                w = csv.DictWriter(fh, fieldnames=COLUMNS)
                w.writeheader()
                for row in self.table(head, variants):
                    w.writerow({k: (v if k == "m" else f"{v:.6f}") for k, v in row.items()})
            paths.append(path)
        return paths


def stratified_folds(labels: list[str], folds: int, seed: int) -> list[list[int]]:
    """Shuffle each class with the seed and deal its members round-robin into folds."""
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise InfeasibleSplitError("need at least two classes")
    smallest = min(labels.count(c) for c in classes)
    if folds > smallest:
        raise InfeasibleSplitError(f"{folds} folds but the smallest class has {smallest} records")
    rng = np.random.default_rng(seed)
    out: list[list[int]] = [[] for _ in range(folds)]
    offset = 0
    for cls in classes:
        members = [i for i, y in enumerate(labels) if y == cls]
        for k, i in enumerate(rng.permutation(members)):
            out[(offset + k) % folds].append(int(i))
        offset += len(members)
    return [sorted(f) for f in out]


def _error(pred, truth) -> float:
    return float(np.mean([p != t for p, t in zip(pred, truth)]))


def _evaluate(train: Dataset, test: Dataset, dist_tt: np.ndarray, dist_te: np.ndarray, protos=None):
    protos = protos if protos is not None else select_medoid_prototypes(train, dist_tt)
    knn = _error(knn_predict(train.labels, dist_te, 1), test.labels)
    proto = _error(prototype_predict(protos, dist_te), test.labels)
    return knn, proto


def run_experiment(d: Dataset, cfg: ExperimentConfig) -> ExperimentResult:
    folds = stratified_folds(d.labels, cfg.folds, cfg.seed)
    c0 = uniform_cost(d.alphabet)
    # optimal scripts under a uniform cost do not depend on its scale, so
    # one set of reference summaries serves GESL and both GLVQ variants
    tensors = {mode: summary_tensor(d.trees, c0, mode) for mode in ("single", "all_cooptimal")}
    D0 = pseudo_from_tensor(tensors["all_cooptimal"], c0)
    result = ExperimentResult()
    for k, test_idx in enumerate(folds):
        train_idx = [i for i in range(len(d)) if i not in set(test_idx)]
        train, test = d.subset(train_idx), d.subset(test_idx)

        def sub(mode, rows, cols):
            return tensors[mode][np.ix_(rows, cols)]

        def score(variant, head, cost: CostTable, mode, protos=None):
            if head == "pseudo":
                dist_tt = pseudo_from_tensor(sub(mode, train_idx, train_idx), cost)
                dist_te = pseudo_from_tensor(sub(mode, test_idx, train_idx), cost)
            else:
                dist_tt = pairwise_true(train.trees, cost)
                dist_te = pairwise_true(test.trees, cost, col_trees=train.trees)
            knn, proto = _evaluate(train, test, dist_tt, dist_te, protos)
            result.scores.append(FoldScore(variant, head, k, knn, proto))

        for variant in cfg.variants:
            if variant.startswith("G"):
                mode = "single" if variant == "G1" else "all_cooptimal"
                d_train = D0[np.ix_(train_idx, train_idx)]
                pairs = select_medoid_pairs(train, d_train) if variant == "G3" else select_pairs(train, d_train)
                gcfg = GeslConfig(
                    beta=cfg.beta, margin_gamma=cfg.gamma, script_mode=mode,
                    enforce_metric=cfg.g2_metric and variant == "G2", max_iters=cfg.gesl_iters,
                )
                fit = gesl_fit(train, pairs, c0, gcfg)
                for head in HEADS:
                    score(variant, head, fit.cost, mode)
            else:
                for head in HEADS:
                    lcfg = LvqConfig(
                        mode="direct_cost" if variant == "L1" else "embedding",
                        distance_head="pseudo" if head == "pseudo" else "true_ted",
                        learning_rate=cfg.lvq_learning_rate, max_iters=cfg.lvq_epochs,
                    )
                    fit = lvq_fit(train, lcfg, c0=c0, summaries=sub("all_cooptimal", train_idx, train_idx))
                    if variant == "L1":
                        result.l1_metric_ok.append(fit.metric_ok)
                    else:
                        result.l2_best_traces.append(fit.best_trace)
                    score(variant, head, fit.cost, "all_cooptimal", fit.prototypes)
        log.info("fold %d/%d done", k + 1, cfg.folds)
    return result
