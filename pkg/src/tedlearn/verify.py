"""Constructive checks of when edit distances inherit metric properties from their costs.

Every demo builds its instance, audits the cost table it relies on, computes
the relevant distances and returns a :class:`DemoReport`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .costs import CostTable, check_pseudometric, metric_projection
from .distances import pairwise_true
from .gesl import (
    GeslConfig,
    PairSet,
    counterexample_costs,
    counterexample_dataset,
    gesl_fit,
    loss_comparison_report,
    select_pairs,
)
from .ted import (
    backtrace_one,
    script_cost,
    ted_dp,
    true_distance_oracle,
    validate_script,
)
from .trees import GAP, Alphabet, Tree, parse_tree

LOG2 = math.log(2)


@dataclass
class DemoReport:
    name: str
    inputs: dict[str, str] = field(default_factory=dict)
    quantities: dict[str, float] = field(default_factory=dict)
    assertions: list[tuple[str, bool]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.assertions)

    def check(self, description: str, ok) -> bool:
        self.assertions.append((description, bool(ok)))
        return bool(ok)

    def to_text(self) -> str:
        lines = [f"demo: {self.name}", f"passed: {str(self.passed).lower()}"]
        if self.inputs:
            lines.append("inputs:")
            lines += [f"  {k}: {v}" for k, v in self.inputs.items()]
        lines.append("values:")
        lines += [f"  {k}: {v:.12g}" for k, v in self.quantities.items()]
        lines.append("assertions:")
        lines += [f"  - {str(ok).lower()}: {desc}" for desc, ok in self.assertions]
        return "\n".join(lines)


def _table(symbols: tuple[str, ...], entries: dict[tuple[str, str], float], default: float) -> CostTable:
    A = Alphabet(symbols)
    m = len(symbols) + 1
    C = np.full((m, m), default)
    np.fill_diagonal(C, 0.0)
    for (u, v), val in entries.items():
        C[A.index(u), A.index(v)] = val
    return CostTable(A, C)


def _close(a: float, b: float, tol: float = 1e-12) -> bool:
    return abs(a - b) <= tol


def dp_overestimation_demo() -> DemoReport:
    r = DemoReport("dp_overestimation")
    c = _table(
        ("a", "b", "c"),
        {("a", "b"): 1.0, ("b", "a"): 1.0, ("a", "c"): 0.3, ("c", "a"): 0.3,
         ("c", "b"): 0.3, ("b", "c"): 0.3},
        default=1.0,
    )
    r.inputs["cost"] = "c(a,b)=1.0, c(a,c)=c(c,b)=0.3, insert/delete 1.0"
    audit = check_pseudometric(c)
    r.check("cost violates only the triangle inequality",
            audit.triangle and not (audit.nonnegativity or audit.self_identity or audit.symmetry))
    metric = metric_projection(c)
    for tag, xs, ys in (("single", "a", "b"), ("nested", "a(c)", "b(c)")):
        x, y = parse_tree(xs, c.alphabet), parse_tree(ys, c.alphabet)
        dp = ted_dp(x, y, c).distance
        true = true_distance_oracle(x, y, c)
        r.quantities[f"dp_{tag}"] = dp
        r.quantities[f"oracle_{tag}"] = true
        r.check(f"DP({xs}, {ys}) = min(c(a,b), c(a,-)+c(-,b)) = 1.0", _close(dp, 1.0))
        r.check(f"shortest path({xs}, {ys}) = c(a,c)+c(c,b) = 0.6", _close(true, 0.6))
        r.check(f"DP overestimates on {xs} vs {ys}", dp > true)
        dp_m = ted_dp(x, y, metric).distance
        true_m = true_distance_oracle(x, y, metric)
        r.quantities[f"dp_metric_{tag}"] = dp_m
        r.check(f"metric control: DP = shortest path on {xs} vs {ys}", _close(dp_m, true_m))
    return r


def _forest(tree: Tree) -> tuple:
    return ((tree.label, tuple(f for ch in tree.children for f in _forest(ch))),)


def negativity_degeneracy_demo(bound: float = -10.0, source: str = "x", target: str = "y") -> DemoReport:
    """Pad a valid script with insert x, k x (x->y, y->x), delete x until it costs less than ``bound``."""
    r = DemoReport("negativity_degeneracy")
    c = _table(("x", "y"), {("x", "y"): -0.1, ("y", "x"): -0.1}, default=0.05)
    r.inputs.update(cost="c(x,y)=c(y,x)=-0.1, insert/delete 0.05", bound=f"{bound:g}",
                    source=source, target=target)
    if not check_pseudometric(c).nonnegativity:
        raise ValueError("degeneracy needs a negative, symmetric cost entry")
    x, y = parse_tree(source, c.alphabet), parse_tree(target, c.alphabet)
    base = backtrace_one(ted_dp(x, y, c))
    r.check("base script transforms source into target", validate_script(base, x, y))
    base_cost = script_cost(base, c)
    cycle = c("x", "y") + c("y", "x")
    pad = c(GAP, "x") + c("x", GAP)
    if base_cost < bound:
        k, ops = 0, []
    else:
        k = max(0, math.floor((base_cost + pad - bound) / -cycle) + 1)
        ops = [(GAP, "x")] + [("x", "y"), ("y", "x")] * k + [("x", GAP)]
    total = base_cost + sum(c(u, v) for u, v in ops)
    # replay the padding on the target: a new last leaf under the root
    forest = _forest(y)
    label, kids = forest[0]
    state = [label, list(kids)]
    for u, v in ops:
        if u == GAP:
            state[1].append((v, ()))
        elif v == GAP:
            state[1].pop()
        else:
            assert state[1][-1][0] == u
            state[1][-1] = (v, ())
    r.check("padded script still ends at the target", ((state[0], tuple(state[1])),) == forest)
    r.quantities.update(base_cost=base_cost, cycles=float(k), total_cost=total)
    r.check(f"script cost {total:.6g} < bound {bound:g}", total < bound)
    return r


def self_identity_demo() -> DemoReport:
    r = DemoReport("self_identity")
    c = _table(("x", "y"), {("x", "x"): 0.2}, default=1.0)
    r.inputs["cost"] = "c(x,x)=0.2, other replacements and insert/delete 1.0"
    audit = check_pseudometric(c)
    r.check("cost breaks self-identity only", audit.self_identity and not audit.triangle
            and not audit.symmetry and not audit.nonnegativity)
    A = c.alphabet
    for text, expected in (("x", 0.2), ("x(x)", 0.4)):
        t = parse_tree(text, A)
        d = ted_dp(t, t, c).distance
        r.quantities[f"d({text},{text})"] = d
        r.check(f"d({text}, {text}) = {expected}", _close(d, expected))
    control = _table(("x", "y"), {}, default=1.0)
    d0 = ted_dp(parse_tree("x", A), parse_tree("x", A), control).distance
    r.quantities["control d(x,x)"] = d0
    r.check("control with c(x,x)=0 gives 0", d0 == 0.0)
    return r


def symmetry_demo() -> DemoReport:
    r = DemoReport("symmetry")
    c = _table(("x", "y", "z"), {("x", "y"): 0.3, ("y", "x"): 0.7}, default=1.0)
    r.inputs["cost"] = "c(x,y)=0.3, c(y,x)=0.7, other edits 1.0"
    audit = check_pseudometric(c)
    r.check("cost breaks symmetry only", audit.symmetry and not audit.triangle
            and not audit.self_identity and not audit.nonnegativity)
    A = c.alphabet
    for xs, ys in (("x", "y"), ("x(z)", "y(z)")):
        x, y = parse_tree(xs, A), parse_tree(ys, A)
        fwd, bwd = ted_dp(x, y, c).distance, ted_dp(y, x, c).distance
        r.quantities[f"d({xs},{ys})"] = fwd
        r.quantities[f"d({ys},{xs})"] = bwd
        r.check(f"d({xs},{ys}) = 0.3 < 0.7 = d({ys},{xs})",
                _close(fwd, 0.3) and _close(bwd, 0.7) and fwd < bwd)
    sym = _table(("x", "y", "z"), {("x", "y"): 0.3, ("y", "x"): 0.3}, default=1.0)
    x, y = parse_tree("x", A), parse_tree("y", A)
    r.check("symmetric control gives equal distances",
            ted_dp(x, y, sym).distance == ted_dp(y, x, sym).distance)
    return r


def _counterexample_pairs() -> PairSet:
    return PairSet(
        positives=[(0, 1), (1, 0), (2, 3), (3, 2)],
        negatives=[(0, 2), (1, 2), (2, 0), (3, 0)],
    )


def gesl_worsening_demo(beta: float = 0.1) -> DemoReport:
    """Standard GESL learns a non-metric cost whose true edit-distance loss is worse than before."""
    if not 0 < beta < 1 / (5 * LOG2):
        raise ValueError("beta must lie in (0, 1/(5 log 2))")
    r = DemoReport("gesl_worsening")
    r.inputs.update(beta=f"{beta:g}", scripts="single", metric="off")
    d = counterexample_dataset()
    costs = counterexample_costs()
    c0, c1 = costs["c0"], costs["c1"]
    pairs = select_pairs(d, pairwise_true(d.trees, c0))
    r.check("nearest/furthest pair selection reproduces P and N", pairs == _counterexample_pairs())
    cfg = GeslConfig(beta=beta, script_mode="single")
    fit = gesl_fit(d, pairs, c0, cfg)
    err = float(np.max(np.abs(fit.cost.entries - c1.entries)))
    r.quantities["max |c - c1|"] = err
    r.quantities["eta"] = fit.eta
    r.check("fitted cost matches c1 within 5e-3", err <= 5e-3)
    audit = check_pseudometric(fit.cost, tol=1e-3)
    r.check("fitted cost is asymmetric", bool(audit.symmetry))
    r.check("fitted cost breaks the triangle inequality", bool(audit.triangle))
    rep = loss_comparison_report(d, pairs, fit.cost, c0, cfg, eta=fit.eta)
    l2 = LOG2**2
    r.quantities.update(E_pseudo=rep.pseudo_learned, E_true=rep.true_learned, E_reference=rep.true_reference)
    r.check("E(d~_c1) = 2 beta log^2 2 (1e-3)", abs(rep.pseudo_learned - 2 * beta * l2) <= 1e-3)
    r.check("E(d_c1) = 2 beta log^2 2 + 4 log 2 (1e-3)",
            abs(rep.true_learned - (2 * beta * l2 + 4 * LOG2)) <= 1e-3)
    r.check("E(d_c0, eta=0) = 12 beta log^2 2 + 2 log 2",
            abs(rep.true_reference - (12 * beta * l2 + 2 * LOG2)) <= 1e-9)
    r.check("E(d_c1) > E(d~_c1)", rep.true_exceeds_pseudo)
    r.check("E(d_c1) > E(d_c0)", rep.true_exceeds_reference)
    x1, x2, x3 = d.trees[:3]
    zero = [true_distance_oracle(a, b, c1) for a, b in ((x1, x2), (x1, x3), (x2, x3))]
    r.quantities["max degenerate distance"] = max(zero)
    r.check("zero-cost network: d_c1 = 0 between x1, x2, x3", max(zero) <= 1e-12)
    return r


def gesl_metric_consistency_demo(beta: float = 0.1) -> DemoReport:
    """All co-optimal scripts plus enforced pseudo-metric: pseudo and true losses coincide."""
    r = DemoReport("gesl_metric_consistency")
    r.inputs.update(beta=f"{beta:g}", scripts="all_cooptimal", metric="on")
    d = counterexample_dataset()
    costs = counterexample_costs()
    c0 = costs["c0"]
    pairs = _counterexample_pairs()
    cfg = GeslConfig(beta=beta, script_mode="all_cooptimal", enforce_metric=True)
    fit = gesl_fit(d, pairs, c0, cfg)
    rep = loss_comparison_report(d, pairs, fit.cost, c0, cfg, eta=fit.eta)
    r.quantities.update(E_pseudo=rep.pseudo_learned, E_true=rep.true_learned,
                        E_reference=rep.true_reference, eta=fit.eta,
                        max_abs_diff_to_hand_table=float(np.max(np.abs(fit.cost.entries - costs["c2"].entries))))
    r.check("fitted cost is a pseudo-metric", check_pseudometric(fit.cost, tol=1e-9).is_pseudometric)
    r.check("E(d~_c) = E(d_c) (1e-9)", abs(rep.pseudo_learned - rep.true_learned) <= 1e-9)
    r.check("E(d_c) < E(d_c0, eta=0): learning no longer worsens the loss",
            rep.true_learned < rep.true_reference)
    hand = check_pseudometric(costs["c2"])
    r.inputs["hand-derived table audit"] = "pseudo-metric" if hand.is_pseudometric else (
        "not a pseudo-metric: " + "; ".join(f"c({a},{b})+c({b},{c_})<c({a},{c_})" for a, b, c_ in hand.triangle))
    return r


DEMOS: dict[str, Callable[[], DemoReport]] = {
    "dp_overestimation": dp_overestimation_demo,
    "negativity_degeneracy": negativity_degeneracy_demo,
    "self_identity": self_identity_demo,
    "symmetry": symmetry_demo,
    "gesl_worsening": gesl_worsening_demo,
    "gesl_metric_consistency": gesl_metric_consistency_demo,
}


def run_demos(which: str = "all") -> list[DemoReport]:
    if which == "all":
        return [fn() for fn in DEMOS.values()]
    if which not in DEMOS:
        raise KeyError(which)
    return [DEMOS[which]()]
