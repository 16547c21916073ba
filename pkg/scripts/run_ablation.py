"""Crossvalidated G1..L2 grid on the synthetic dataset; writes one CSV per distance head."""

import argparse
import logging
import tempfile
from pathlib import Path

from tedlearn.cli import cmd_experiment
from tedlearn.datasets import synthetic_dataset


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dataset", help="dataset JSON (default: generate the synthetic one)")
    p.add_argument("--out", default="results")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--metric", action="store_true", help="enforce pseudo-metric costs in G2")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    dataset = args.dataset
    if dataset is None:
        dataset = str(Path(tempfile.mkdtemp()) / "synthetic.json")
        synthetic_dataset(20, seed=args.seed).save(dataset)
    cmd_experiment(dataset, args.out, folds=args.folds, seed=args.seed, epochs=args.epochs, metric=args.metric)
    for f in sorted(Path(args.out).glob("experiment_results_*.csv")):
        print(f"\n{f.name}\n{f.read_text()}")


if __name__ == "__main__":
    main()
