"""Run every metric-property demo and tabulate the GESL losses over a range of beta."""

import argparse
import math


from tedlearn.gesl import (
    GeslConfig,
    PairSet,
    counterexample_costs,
    counterexample_dataset,
    gesl_fit,
    loss_comparison_report,
)
from tedlearn.verify import run_demos

PAIRS = PairSet([(0, 1), (1, 0), (2, 3), (3, 2)], [(0, 2), (1, 2), (2, 0), (3, 0)])


def loss_table(betas):
    d = counterexample_dataset()
    c0 = counterexample_costs()["c0"]
    print(f"{'beta':>6} {'variant':>14} {'E pseudo':>10} {'E true':>10} {'E ref':>10} {'eta':>8}")
    for beta in betas:
        for label, mode, metric in (("single", "single", False), ("all+metric", "all_cooptimal", True)):
            cfg = GeslConfig(beta=beta, script_mode=mode, enforce_metric=metric)
            fit = gesl_fit(d, PAIRS, c0, cfg)
            rep = loss_comparison_report(d, PAIRS, fit.cost, c0, cfg, eta=fit.eta)
            print(f"{beta:6.3f} {label:>14} {rep.pseudo_learned:10.4f} {rep.true_learned:10.4f} "
                  f"{rep.true_reference:10.4f} {fit.eta:8.4f}")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--betas", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.28])
    args = p.parse_args()
    reports = run_demos("all")
    for r in reports:
        print(r.to_text(), end="\n\n")
    bound = 1 / (5 * math.log(2))
    loss_table([b for b in args.betas if 0 < b < bound])
    print("\nall demos passed" if all(r.passed for r in reports) else "\nsome demos FAILED")


if __name__ == "__main__":
    main()
