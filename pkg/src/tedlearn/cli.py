"""Command-line entry point: ``tedlearn <command> ...``.

Exit codes: 0 success, 1 a checked property failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .costs import (
    CostTable,
    check_pseudometric,
    cosine_cost,
    cosine_cost_gradient,
    cost_from_embedding,
    finite_diff_check,
    metric_projection,
    simplex_embedding,
    simplex_init,
    uniform_cost,
)
from .distances import pairwise_true, pseudo_from_tensor, summary_tensor
from .experiment import VARIANTS, ExperimentConfig, InfeasibleSplitError, run_experiment
from .gesl import GeslConfig, gesl_fit, select_medoid_pairs, select_pairs
from .lvq import LvqConfig, knn_evaluate, lvq_fit
from .trees import Dataset, load_dataset
from .verify import DEMOS, run_demos

log = logging.getLogger("tedlearn")

OK, PROPERTY_FAILED, USAGE_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def resolve_cost(choice: str, d: Dataset) -> CostTable:
    """``default-log2``, ``simplex`` or a path to a cost table over the dataset's alphabet."""
    if choice == "default-log2":
        return uniform_cost(d.alphabet)
    if choice == "simplex":
        return cost_from_embedding(simplex_embedding(d.alphabet))
    c = CostTable.load(choice)
    if c.alphabet != d.alphabet:
        raise UsageError(f"cost alphabet {c.alphabet.symbols} does not match dataset {d.alphabet.symbols}")
    return c


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_matrix(D: np.ndarray, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow([""] + list(range(D.shape[1])))
    for i, row in enumerate(D):
        w.writerow([i] + [_fmt(v) for v in row])


def cmd_dist(dataset: str, cost: str = "default-log2", out: str | None = None) -> int:
    d = load_dataset(dataset)
    D = pairwise_true(d.trees, resolve_cost(cost, d))
    if out is None:
        _write_matrix(D, sys.stdout)
    else:
        with open(out, "w", newline="") as fh:
            _write_matrix(D, fh)
    return OK


def _loo(d: Dataset, D: np.ndarray) -> float:
    return knn_evaluate(d, D, 1) if len(d) > 1 else float("nan")


def cmd_learn(
    dataset: str,
    variant: str,
    out: str,
    method: str | None = None,
    beta: float = 0.1,
    gamma: float = math.log(2),
    metric: bool = False,
    head: str = "pseudo",
    cost: str = "default-log2",
    epochs: int = 50,
    seed: int = 0,
) -> int:
    """Fit one variant on the whole dataset; write the cost, the loss trace and a before/after 1-NN line."""
    if variant not in VARIANTS:
        raise UsageError(f"unknown variant {variant!r}")
    expected = "gesl" if variant.startswith("G") else "lvq"
    if method is not None and method != expected:
        raise UsageError(f"variant {variant} belongs to {expected}, not {method}")
    d = load_dataset(dataset)
    c0 = resolve_cost(cost, d)
    out_dir = Path(out)
    mode = "single" if variant == "G1" else "all_cooptimal"
    S0 = summary_tensor(d.trees, c0, mode)
    D0 = pairwise_true(d.trees, c0)
    before = (_loo(d, D0), _loo(d, pseudo_from_tensor(S0, c0)))

    if expected == "gesl":
        pairs = select_medoid_pairs(d, D0) if variant == "G3" else select_pairs(d, D0)
        cfg = GeslConfig(beta=beta, margin_gamma=gamma, script_mode=mode, enforce_metric=metric)
        fit = gesl_fit(d, pairs, c0, cfg)
        learned, converged, emb = fit.cost, fit.converged, None
        trace = [(t, v) for t, v in enumerate(fit.loss_trace)]
        trace_header = ("iteration", "best_loss")
        extra = f"eta: {_fmt(fit.eta)}"
    else:
        cfg = LvqConfig(
            mode="direct_cost" if variant == "L1" else "embedding",
            distance_head="pseudo" if head == "pseudo" else "true_ted",
            max_iters=epochs,
        )
        fit = lvq_fit(d, cfg, c0=c0, summaries=S0 if head == "pseudo" else None)
        learned, converged, emb = fit.cost, fit.converged, fit.embedding
        trace = list(zip(range(len(fit.loss_trace)), fit.loss_trace, fit.best_trace))
        trace_header = ("epoch", "loss", "best_loss")
        extra = "prototypes: " + " ".join(f"{k}={v}" for k, v in fit.prototypes.items())

    after = (_loo(d, pairwise_true(d.trees, learned)), _loo(d, pseudo_from_tensor(S0, learned)))
    out_dir.mkdir(parents=True, exist_ok=True)
    learned.save(out_dir / "cost.csv")
    if emb is not None:
        emb.save(out_dir / "embedding.csv")
    with (out_dir / "loss_trace.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header)
        w.writerows([r[0], *map(_fmt, r[1:])] for r in trace)
    summary = "\n".join([
        f"variant: {variant}",
        f"converged: {str(converged).lower()}",
        extra,
        f"1-NN error before: d={before[0]:.4f} d~={before[1]:.4f}",
        f"1-NN error after: d={after[0]:.4f} d~={after[1]:.4f}",
    ])
    (out_dir / "summary.txt").write_text(summary + "\n", encoding="utf-8")
    print(summary)
    return OK


def cmd_check_metric(cost: str, project: str | None = None) -> int:
    c = CostTable.load(cost)
    audit = check_pseudometric(c)
    print(audit.report())
    if project is not None:
        metric_projection(c).save(project)
    return OK if audit.is_pseudometric else PROPERTY_FAILED


def cmd_verify(which: str = "all") -> int:
    if which != "all" and which not in DEMOS:
        raise UsageError(f"unknown demo {which!r}; choose from all, {', '.join(DEMOS)}")
    reports = run_demos(which)
    print("\n\n".join(r.to_text() for r in reports))
    return OK if all(r.passed for r in reports) else PROPERTY_FAILED


def cmd_experiment(
    dataset: str,
    out: str,
    grid: Sequence[str] = VARIANTS,
    folds: int = 5,
    seed: int = 0,
    beta: float = 0.1,
    gamma: float = math.log(2),
    metric: bool = False,
    epochs: int = 30,
    keep: list | None = None,
) -> int:
    """Run the grid and write one CSV per distance head; ``keep`` collects the raw result."""
    d = load_dataset(dataset)
    cfg = ExperimentConfig(
        variants=tuple(grid), folds=folds, seed=seed, beta=beta, gamma=gamma,
        g2_metric=metric, lvq_epochs=epochs,
    )
    result = run_experiment(d, cfg)
    if keep is not None:
        keep.append(result)
    for path in result.write_csv(out, cfg.variants):
        print(path)
    return OK


def cmd_simplex(U: int) -> int:
    if U < 1:
        raise UsageError("U must be at least 1")
    w = csv.writer(sys.stdout, lineterminator="\n")
    for row in simplex_init(U):
        w.writerow([_fmt(v) for v in row])
    return OK


def cmd_gradcheck(trials: int = 50, dim: int = 4, seed: int = 0, step: float = 1e-5, tol: float = 1e-6) -> int:
    """Cosine-cost gradient against central differences at random (omega, x, y)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x, y = rng.normal(size=dim), rng.normal(size=dim)
        omega = rng.normal(size=(dim, dim))
        err = finite_diff_check(
            lambda w: cosine_cost(w.reshape(dim, dim), x, y),
            lambda w: cosine_cost_gradient(w.reshape(dim, dim), x, y).ravel(),
            omega.ravel(),
            step,
        )
        worst = max(worst, err)
    print(f"max abs deviation: {worst:.3e} over {trials} trials")
    return OK if worst <= tol else PROPERTY_FAILED


def _variants(text: str) -> list[str]:
    items = [v.strip() for v in text.split(",") if v.strip()]
    bad = [v for v in items if v not in VARIANTS]
    if bad or not items:
        raise argparse.ArgumentTypeError(f"variants must come from {','.join(VARIANTS)}")
    return items


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tedlearn", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dist", help="pairwise edit distance matrix as CSV")
    s.add_argument("dataset")
    s.add_argument("--cost", default="default-log2", help="default-log2, simplex or a cost table path")
    s.add_argument("--out", help="output CSV (default: stdout)")

    s = sub.add_parser("learn", help="fit one variant on a dataset")
    s.add_argument("dataset")
    s.add_argument("--variant", required=True, choices=VARIANTS)
    s.add_argument("--method", choices=("gesl", "lvq"))
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--beta", type=float, default=0.1)
    s.add_argument("--gamma", type=float, default=math.log(2))
    s.add_argument("--metric", action="store_true", help="GESL: project onto pseudo-metrics")
    s.add_argument("--head", choices=("pseudo", "true"), default="pseudo", help="LVQ distance head")
    s.add_argument("--cost", default="default-log2", help="reference cost")
    s.add_argument("--epochs", type=int, default=50)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("check-metric", help="audit a cost table for pseudo-metric properties")
    s.add_argument("cost")
    s.add_argument("--project", metavar="OUT", help="also write the metric projection here")

    s = sub.add_parser("verify", help="run the metric-property demos")
    s.add_argument("which", nargs="?", default="all")

    s = sub.add_parser("experiment", help="crossvalidated variant x distance-head grid")
    s.add_argument("dataset")
    s.add_argument("--out", required=True, help="output directory for the CSVs")
    s.add_argument("--grid", "--variant", dest="grid", type=_variants, default=list(VARIANTS))
    s.add_argument("--folds", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--beta", type=float, default=0.1)
    s.add_argument("--gamma", type=float, default=math.log(2))
    s.add_argument("--metric", action="store_true", help="enforce pseudo-metric costs in G2")
    s.add_argument("--epochs", type=int, default=30, help="GLVQ epochs")

    s = sub.add_parser("simplex", help="print the U x U regular simplex initialization")
    s.add_argument("U", type=int)

    s = sub.add_parser("gradcheck", help="finite-difference check of the cosine-cost gradient")
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--dim", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "dist":
            return cmd_dist(args.dataset, args.cost, args.out)
        if args.command == "learn":
            return cmd_learn(
                args.dataset, args.variant, args.out, args.method, args.beta, args.gamma,
                args.metric, args.head, args.cost, args.epochs, args.seed,
            )
        if args.command == "check-metric":
            return cmd_check_metric(args.cost, args.project)
        if args.command == "verify":
            return cmd_verify(args.which)
        if args.command == "experiment":
            return cmd_experiment(
                args.dataset, args.out, args.grid, args.folds, args.seed, args.beta,
                args.gamma, args.metric, args.epochs,
            )
        if args.command == "simplex":
            return cmd_simplex(args.U)
        return cmd_gradcheck(args.trials, args.dim, args.seed)
    except (UsageError, InfeasibleSplitError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
