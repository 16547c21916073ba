"""Zhang-Shasha tree edit distance with backtracing and co-optimal mapping statistics.

Nodes are addressed by postorder index internally; edits report preorder indices.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .costs import CostTable, check_pseudometric
from .trees import GAP, Tree, serialize_tree

INF = math.inf
TIE_RTOL = 1e-12


def tied(a: float, b: float) -> bool:
    return abs(a - b) <= TIE_RTOL * max(1.0, abs(a), abs(b))


class NotPseudometricError(ValueError):
    pass


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class Edit:
    """One edit; ``source``/``target`` are labels or ``'-'``, positions are preorder indices."""

    source: str
    target: str
    source_pos: int | None = None
    target_pos: int | None = None

    @property
    def kind(self) -> str:
        if self.source == GAP:
            return "insert"
        if self.target == GAP:
            return "delete"
        return "replace"

    @property
    def key(self) -> tuple[str, str]:
        return (self.source, self.target)

    def __repr__(self) -> str:
        return f"({self.source}, {self.target})"


@dataclass(frozen=True)
class EditScript:
    edits: tuple[Edit, ...] = ()

    def __iter__(self) -> Iterator[Edit]:
        return iter(self.edits)

    def __len__(self) -> int:
        return len(self.edits)

    @property
    def keys(self) -> list[tuple[str, str]]:
        return [e.key for e in self.edits]

    def count_matrix(self, c: CostTable) -> np.ndarray:
        A = c.alphabet
        M = np.zeros((len(A) + 1, len(A) + 1))
        for u, v in self.keys:
            M[A.index(u), A.index(v)] += 1
        return M


def script_cost(script: EditScript | Iterable[Edit], c: CostTable) -> float:
    return float(sum(c(e.source, e.target) for e in script))


@dataclass(frozen=True)
class ScriptSummary:
    """Average multiplicity of each edit key over a set of optimal scripts."""

    counts: np.ndarray
    n_scripts: int = 1

    def pseudo_distance(self, c: CostTable) -> float:
        return float(np.sum(self.counts * c.entries))


class _Indexed:
    """Postorder arrays of a tree: label ids, leftmost leaves, keyroots, preorder ids."""

    def __init__(self, tree: Tree, c: CostTable):
        self.tree = tree
        nodes: list[Tree] = []
        lml: list[int] = []
        pre_of: dict[int, int] = {id(n): k for k, n in enumerate(tree.preorder())}

        def walk(node: Tree) -> int:
            first = None
            for ch in node.children:
                leaf = walk(ch)
                if first is None:
                    first = leaf
            nodes.append(node)
            lml.append(len(nodes) - 1 if first is None else first)
            return lml[-1]

        walk(tree)
        self.n = len(nodes)
        self.names = [n.label for n in nodes]
        self.labels = [c.alphabet.index(n.label) for n in nodes]
        self.lml = lml
        self.pre = [pre_of[id(n)] for n in nodes]
        highest: dict[int, int] = {}
        for i, l in enumerate(lml):
            highest[l] = i  # later postorder index is higher in the tree
        self.keyroots = sorted(highest.values())
        self.keyroot_of = [highest[l] for l in lml]


@dataclass
class DistanceResult:
    """DP value plus the forest tables needed for backtracing."""

    distance: float
    x: Tree
    y: Tree
    cost: CostTable
    negative_costs: bool = False
    _X: _Indexed | None = field(default=None, repr=False)
    _Y: _Indexed | None = field(default=None, repr=False)
    _td: list | None = field(default=None, repr=False)
    _tables: dict | None = field(default=None, repr=False)

    def __float__(self) -> float:
        return self.distance


def ted_dp(x: Tree, y: Tree, c: CostTable) -> DistanceResult:
    """Zhang-Shasha keyroot recurrences; O(|x|^2 |y|^2) time in the worst case."""
    X, Y = _Indexed(x, c), _Indexed(y, c)
    C = c.entries.tolist()
    g = len(C) - 1
    td = [[0.0] * Y.n for _ in range(X.n)]
    tables = {}
    for k1 in X.keyroots:
        l1 = X.lml[k1]
        for k2 in Y.keyroots:
            l2 = Y.lml[k2]
            A, B = k1 - l1 + 1, k2 - l2 + 1
            fd = [[0.0] * (B + 1) for _ in range(A + 1)]
            for a in range(1, A + 1):
                fd[a][0] = fd[a - 1][0] + C[X.labels[l1 + a - 1]][g]
            for b in range(1, B + 1):
                fd[0][b] = fd[0][b - 1] + C[g][Y.labels[l2 + b - 1]]
            for a in range(1, A + 1):
                i = l1 + a - 1
                li, ui = X.lml[i], X.labels[i]
                row, prev = fd[a], fd[a - 1]
                cdel = C[ui][g]
                for b in range(1, B + 1):
                    j = l2 + b - 1
                    lj = Y.lml[j]
                    best = prev[b] + cdel
                    ins = row[b - 1] + C[g][Y.labels[j]]
                    if ins < best:
                        best = ins
                    if li == l1 and lj == l2:
                        rep = prev[b - 1] + C[ui][Y.labels[j]]
                        if rep < best:
                            best = rep
                        row[b] = best
                        td[i][j] = best
                    else:
                        rep = fd[li - l1][lj - l2] + td[i][j]
                        row[b] = rep if rep < best else best
            tables[(k1, k2)] = fd
    neg = bool(np.any(c.entries < 0))
    return DistanceResult(td[X.n - 1][Y.n - 1], x, y, c, neg, X, Y, td, tables)


def tree_distance(x: Tree, y: Tree, c: CostTable) -> float:
    return ted_dp(x, y, c).distance


def backtrace_one(r: DistanceResult) -> EditScript:
    """One optimal script; ties prefer replace, then delete, then insert."""
    X, Y, C = r._X, r._Y, r.cost.entries
    g = C.shape[0] - 1
    td, tables = r._td, r._tables
    pairs: list[tuple[int, int]] = []
    deleted: list[int] = []
    inserted: list[int] = []
    stack = [(X.n - 1, Y.n - 1, X.n, Y.n)]
    while stack:
        k1, k2, a, b = stack.pop()
        fd = tables[(k1, k2)]
        l1, l2 = X.lml[k1], Y.lml[k2]
        while a > 0 or b > 0:
            if a == 0:
                inserted.append(l2 + b - 1)
                b -= 1
                continue
            if b == 0:
                deleted.append(l1 + a - 1)
                a -= 1
                continue
            i, j = l1 + a - 1, l2 + b - 1
            val = fd[a][b]
            li, lj = X.lml[i], Y.lml[j]
            if li == l1 and lj == l2:
                if tied(fd[a - 1][b - 1] + C[X.labels[i], Y.labels[j]], val):
                    pairs.append((i, j))
                    a, b = a - 1, b - 1
                    continue
            elif tied(fd[li - l1][lj - l2] + td[i][j], val):
                # subtrees i and j are aligned together; resolve them in their own table
                stack.append((X.keyroot_of[i], Y.keyroot_of[j], i - li + 1, j - lj + 1))
                a, b = li - l1, lj - l2
                continue
            if tied(fd[a - 1][b] + C[X.labels[i], g], val):
                deleted.append(i)
                a -= 1
            else:
                inserted.append(j)
                b -= 1
    return _script_from_mapping(X, Y, pairs, deleted, inserted)


def _script_from_mapping(X, Y, pairs, deleted, inserted) -> EditScript:
    src = [(X.pre[i], Edit(X.names[i], Y.names[j], X.pre[i], Y.pre[j])) for i, j in pairs]
    src += [(X.pre[i], Edit(X.names[i], GAP, X.pre[i], None)) for i in deleted]
    src.sort(key=lambda t: t[0])
    ins = sorted((Y.pre[j], Edit(GAP, Y.names[j], None, Y.pre[j])) for j in inserted)
    # merge insertions before the first replacement that lands after them in the target
    out: list[Edit] = []
    k = 0
    for _, e in src:
        while k < len(ins) and e.target_pos is not None and ins[k][0] < e.target_pos:
            out.append(ins[k][1])
            k += 1
        out.append(e)
    out.extend(e for _, e in ins[k:])
    return EditScript(tuple(out))


def mapping_of(script: EditScript) -> tuple[list, list, list]:
    pairs = [(e.source_pos, e.target_pos) for e in script if e.kind == "replace"]
    deleted = [e.source_pos for e in script if e.kind == "delete"]
    inserted = [e.target_pos for e in script if e.kind == "insert"]
    return pairs, deleted, inserted


def _splice(tree: Tree, keep) -> tuple[Tree, ...]:
    """Forest left after removing nodes whose preorder id fails ``keep``; children move up."""
    counter = itertools.count()

    def go(node: Tree) -> tuple:
        k = next(counter)
        kids = tuple(f for ch in node.children for f in go(ch))
        return ((node.label, kids),) if keep(k) else kids

    return go(tree)


def validate_script(script: EditScript, x: Tree, y: Tree) -> bool:
    """True when the script's mapping turns ``x`` into ``y``.

    Replacements and deletions are applied to ``x``; deleting the inserted
    nodes from ``y`` must give the same forest.
    """
    pairs, deleted, inserted = mapping_of(script)
    xs, ys = x.labels(), y.labels()
    src_used = [p for p, _ in pairs] + deleted
    tgt_used = [q for _, q in pairs] + inserted
    if sorted(src_used) != list(range(len(xs))) or sorted(tgt_used) != list(range(len(ys))):
        return False
    for e in script:
        if e.source != GAP and xs[e.source_pos] != e.source:
            return False
        if e.target != GAP and ys[e.target_pos] != e.target:
            return False
    relabel = dict(pairs)
    gone, added = set(deleted), set(inserted)
    order_x = [p for p in range(len(xs)) if p not in gone]
    left = _splice(x, lambda k: k not in gone)
    right = _splice(y, lambda k: k not in added)

    def relabeled(forest, ids):
        out = []
        for label, kids in forest:
            pos = next(ids)
            out.append((ys[relabel[pos]], relabeled(kids, ids)))
        return tuple(out)

    if relabeled(left, iter(order_x)) != _strip_ids(right):
        return False
    # the mapped target nodes must line up in preorder with the source order
    return [relabel[p] for p in order_x] == [q for q in range(len(ys)) if q not in added]


def _strip_ids(forest):
    return tuple((label, _strip_ids(kids)) for label, kids in forest)


# co-optimal mappings: a (cost, count, mean key-count matrix) semiring over the
# keyroot tables, with a flag that splits "x's rightmost root is mapped" from
# "is not" so every mapping is counted once


class _Val:
    __slots__ = ("cost", "n", "mean")

    def __init__(self, cost: float, n: int, mean: np.ndarray | None):
        self.cost, self.n, self.mean = cost, n, mean


def _extend(v: _Val, cost: float, u: int, w: int) -> _Val:
    if v.n == 0:
        return v
    mean = v.mean.copy()
    mean[u, w] += 1.0
    return _Val(v.cost + cost, v.n, mean)


def _product(p: _Val, q: _Val) -> _Val:
    if p.n == 0 or q.n == 0:
        return _NONE
    return _Val(p.cost + q.cost, p.n * q.n, p.mean + q.mean)


def _best(*vals: _Val) -> _Val:
    live = [v for v in vals if v.n > 0]
    if not live:
        return _NONE
    low = min(v.cost for v in live)
    keep = [v for v in live if tied(v.cost, low)]
    if len(keep) == 1:
        return keep[0]
    n = sum(v.n for v in keep)
    mean = sum(v.mean * (v.n / n) for v in keep)
    return _Val(low, n, mean)


_NONE = _Val(INF, 0, None)


def _cooptimal_root(x: Tree, y: Tree, c: CostTable) -> _Val:
    X, Y = _Indexed(x, c), _Indexed(y, c)
    C = c.entries
    g = C.shape[0] - 1
    zero = np.zeros_like(C)
    matched: dict[tuple[int, int], _Val] = {}
    root = None
    for k1 in X.keyroots:
        l1 = X.lml[k1]
        for k2 in Y.keyroots:
            l2 = Y.lml[k2]
            A, B = k1 - l1 + 1, k2 - l2 + 1
            f0 = [[_NONE] * (B + 1) for _ in range(A + 1)]
            f1 = [[_NONE] * (B + 1) for _ in range(A + 1)]
            f0[0][0] = f1[0][0] = _Val(0.0, 1, zero)
            for a in range(1, A + 1):
                u = X.labels[l1 + a - 1]
                f0[a][0] = _extend(f0[a - 1][0], C[u, g], u, g)
            for b in range(1, B + 1):
                w = Y.labels[l2 + b - 1]
                f0[0][b] = f1[0][b] = _extend(f0[0][b - 1], C[g, w], g, w)
            for a in range(1, A + 1):
                i = l1 + a - 1
                u, li = X.labels[i], X.lml[i]
                for b in range(1, B + 1):
                    j = l2 + b - 1
                    w, lj = Y.labels[j], Y.lml[j]
                    if li == l1 and lj == l2:
                        m = _extend(f0[a - 1][b - 1], C[u, w], u, w)
                        matched[(i, j)] = m
                    else:
                        m = _product(f0[li - l1][lj - l2], matched[(i, j)])
                    f1[a][b] = _best(_extend(f1[a][b - 1], C[g, w], g, w), m)
                    f0[a][b] = _best(_extend(f0[a - 1][b], C[u, g], u, g), f1[a][b])
            root = f0[A][B]
    return root


def _require_pseudometric(c: CostTable) -> None:
    audit = check_pseudometric(c)
    if not audit.is_pseudometric:
        raise NotPseudometricError(
            "co-optimal scripts need a pseudo-metric cost:\n" + audit.report()
        )


def summarize_cooptimal(x: Tree, y: Tree, c: CostTable, check: bool = True) -> ScriptSummary:
    """Mean edit-key counts over all cost-minimal mappings from ``x`` to ``y``."""
    if check:
        _require_pseudometric(c)
    v = _cooptimal_root(x, y, c)
    return ScriptSummary(v.mean.copy(), v.n)


def count_cooptimal(x: Tree, y: Tree, c: CostTable, check: bool = True) -> int:
    if check:
        _require_pseudometric(c)
    return _cooptimal_root(x, y, c).n


def summarize_one(x: Tree, y: Tree, c: CostTable) -> ScriptSummary:
    """Key counts of the single deterministic backtrace."""
    return ScriptSummary(backtrace_one(ted_dp(x, y, c)).count_matrix(c), 1)


# brute-force oracles


def _orders(tree: Tree):
    """Preorder-indexed labels with postorder ranks."""
    post_rank = {id(n): k for k, n in enumerate(tree.postorder())}
    nodes = list(tree.preorder())
    return [n.label for n in nodes], [post_rank[id(n)] for n in nodes]


def iter_mappings(x: Tree, y: Tree) -> Iterator[list[tuple[int, int]]]:
    """Every valid ordered-tree mapping, as (source preorder, target preorder) pairs.

    A set of pairs is valid when it is one-to-one and keeps both preorder and
    postorder ranks in the same relative order on both sides.
    """
    _, xpost = _orders(x)
    _, ypost = _orders(y)
    nx, ny = len(xpost), len(ypost)

    def rec(s: int, chosen: list, used: set):
        if s == nx:
            yield list(chosen)
            return
        yield from rec(s + 1, chosen, used)
        for t in range(ny):
            if t in used:
                continue
            if all(tp < t and ((xpost[sp] < xpost[s]) == (ypost[tp] < ypost[t])) for sp, tp in chosen):
                chosen.append((s, t))
                used.add(t)
                yield from rec(s + 1, chosen, used)
                used.discard(t)
                chosen.pop()

    yield from rec(0, [], set())


def enumerate_mappings_oracle(
    x: Tree, y: Tree, c: CostTable, max_product: int = 64
) -> tuple[float, list[EditScript]]:
    """Minimum mapping cost and all minimizing scripts, by exhaustive search."""
    if x.size * y.size > max_product:
        raise OracleLimitError(f"size product {x.size * y.size} exceeds {max_product}")
    xl, _ = _orders(x)
    yl, _ = _orders(y)
    found: list[tuple[float, list]] = []
    for pairs in iter_mappings(x, y):
        src = {s for s, _ in pairs}
        tgt = {t for _, t in pairs}
        cost = sum(c(xl[s], yl[t]) for s, t in pairs)
        cost += sum(c(xl[s], GAP) for s in range(len(xl)) if s not in src)
        cost += sum(c(GAP, yl[t]) for t in range(len(yl)) if t not in tgt)
        found.append((cost, pairs))
    best = min(cost for cost, _ in found)
    scripts = []
    for cost, pairs in found:
        if tied(cost, best):
            src = {s for s, _ in pairs}
            tgt = {t for _, t in pairs}
            edits = [Edit(xl[s], yl[t], s, t) for s, t in pairs]
            edits += [Edit(xl[s], GAP, s, None) for s in range(len(xl)) if s not in src]
            edits += [Edit(GAP, yl[t], None, t) for t in range(len(yl)) if t not in tgt]
            edits.sort(key=lambda e: (e.source_pos is None, e.source_pos or 0, e.target_pos or 0))
            scripts.append(EditScript(tuple(edits)))
    return best, scripts


# forests as nested tuples ((label, children), ...) for the shortest-path oracle


def _as_forest(tree: Tree) -> tuple:
    return ((tree.label, tuple(f for ch in tree.children for f in _as_forest(ch))),)


def _forest_size(f: tuple) -> int:
    return sum(1 + _forest_size(kids) for _, kids in f)


def _forest_text(f: tuple) -> str:
    return ",".join(lab + ("(" + _forest_text(kids) + ")" if kids else "") for lab, kids in f)


def _neighbors(f: tuple, symbols: tuple[str, ...]) -> Iterator[tuple[tuple, str, str]]:
    """All forests one edit away, with the edit's (source, target) key."""
    n = len(f)
    for s in range(n + 1):
        for e in range(s, n + 1):
            for v in symbols:
                yield f[:s] + ((v, f[s:e]),) + f[e:], GAP, v
    for k, (label, kids) in enumerate(f):
        yield f[:k] + kids + f[k + 1:], label, GAP
        for v in symbols:
            if v != label:
                yield f[:k] + ((v, kids),) + f[k + 1:], label, v
        for sub, u, w in _neighbors(kids, symbols):
            yield f[:k] + ((label, sub),) + f[k + 1:], u, w


def true_distance_oracle(x: Tree, y: Tree, c: CostTable, size_cap: int | None = None) -> float:
    """Cheapest chain of single edits from ``x`` to ``y`` through forests of at most ``size_cap`` nodes."""
    if np.any(c.entries < 0):
        raise ValueError("shortest-path oracle needs nonnegative costs")
    if size_cap is None:
        size_cap = max(x.size, y.size) + 1
    if max(x.size, y.size) > size_cap:
        raise OracleLimitError("size cap smaller than the input trees")
    symbols = c.alphabet.symbols
    start, goal = _as_forest(x), _as_forest(y)
    dist = {start: 0.0}
    heap = [(0.0, _forest_text(start), start)]
    done = set()
    while heap:
        d, _, f = heapq.heappop(heap)
        if f in done:
            continue
        if f == goal:
            return d
        done.add(f)
        for nb, u, v in _neighbors(f, symbols):
            if _forest_size(nb) > size_cap or nb in done:
                continue
            nd = d + c(u, v)
            if nd < dist.get(nb, INF):
                dist[nb] = nd
                heapq.heappush(heap, (nd, _forest_text(nb), nb))
    raise OracleLimitError(f"{serialize_tree(y)} unreachable within size cap {size_cap}")
