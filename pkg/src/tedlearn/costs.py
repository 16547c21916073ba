"""Edit cost functions over an alphabet plus gap, and tools to audit or repair them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .trees import GAP, Alphabet

# absolute slack used when auditing; closure and Euclidean costs are only
# metric up to rounding
AUDIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CostTable:
    """``entries[u, v]`` prices replacing ``u`` by ``v``; index ``len(alphabet)`` is the gap."""

    alphabet: Alphabet
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        m = len(self.alphabet) + 1
        if entries.shape != (m, m):
            raise ValueError(f"cost table must be {m}x{m}, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("cost table entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def __call__(self, u: str, v: str) -> float:
        return float(self.entries[self.alphabet.index(u), self.alphabet.index(v)])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CostTable)
            and self.alphabet == other.alphabet
            and np.array_equal(self.entries, other.entries)
        )

    def replace(self, entries: np.ndarray) -> CostTable:
        return CostTable(self.alphabet, entries)

    def to_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + list(self.alphabet.extended))
        for sym, row in zip(self.alphabet.extended, self.entries):
            w.writerow([sym] + [format(float(v), ".17g") for v in row])
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str) -> CostTable:
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if not rows:
            raise ValueError("empty cost table")
        header = [h.strip() for h in rows[0][1:]]
        if not header or header[-1] != GAP:
            raise ValueError(f"cost table header must end with {GAP!r}")
        alphabet = Alphabet(tuple(header[:-1]))
        if len(rows) != len(header) + 1:
            raise ValueError("cost table must be square")
        entries = []
        for sym, row in zip(header, rows[1:]):
            if row[0].strip() != sym or len(row) != len(header) + 1:
                raise ValueError(f"malformed cost table row for {sym!r}")
            entries.append([float(v) for v in row[1:]])
        return cls(alphabet, np.array(entries))

    @classmethod
    def load(cls, path: str | Path) -> CostTable:
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def uniform_cost(alphabet: Alphabet, value: float = math.log(2)) -> CostTable:
    """``value`` off the diagonal, 0 on it."""
    m = len(alphabet) + 1
    return CostTable(alphabet, value * (1.0 - np.eye(m)))


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Column ``k`` is the vector of symbol ``k``; the gap sits at the origin."""

    alphabet: Alphabet
    vectors: np.ndarray  # (U, n)

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=float)
        if vectors.ndim != 2 or vectors.shape[1] != len(self.alphabet):
            raise ValueError("embedding needs one column per symbol")
        object.__setattr__(self, "vectors", vectors)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[0]

    def with_gap(self) -> np.ndarray:
        """(U, n+1) matrix with the zero gap column appended."""
        return np.hstack([self.vectors, np.zeros((self.dimension, 1))])

    def to_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(self.alphabet.extended))
        for row in self.with_gap():
            w.writerow([format(float(v), ".17g") for v in row])
        return buf.getvalue()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str) -> EmbeddingMatrix:
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        header = [h.strip() for h in rows[0]]
        if header[-1] != GAP:
            raise ValueError(f"embedding header must end with {GAP!r}")
        mat = np.array([[float(v) for v in r] for r in rows[1:]])
        if np.any(mat[:, -1] != 0):
            raise ValueError("gap column must be zero")
        return cls(Alphabet(tuple(header[:-1])), mat[:, :-1])


def simplex_init(U: int) -> np.ndarray:
    """U x U matrix whose columns have unit norm and unit pairwise distance."""
    if U < 1:
        raise ValueError("U must be positive")
    A = np.zeros((U, U))
    rho = np.zeros(U)
    for u in range(1, U + 1):
        A[: u - 1, u - 1] = rho[: u - 1]
        rho[u - 1] = 1.0 / math.sqrt(2 * u * (u + 1))
        A[u - 1, u - 1] = rho[u - 1] * (u + 1)
    return A


def simplex_embedding(alphabet: Alphabet, dimension: int | None = None) -> EmbeddingMatrix:
    U = len(alphabet) if dimension is None else dimension
    if U < len(alphabet):
        raise ValueError("a unit simplex over the alphabet needs dimension >= alphabet size")
    return EmbeddingMatrix(alphabet, simplex_init(U)[:, : len(alphabet)])


def cost_from_embedding(emb: EmbeddingMatrix) -> CostTable:
    V = emb.with_gap()
    diff = V[:, :, None] - V[:, None, :]
    return CostTable(emb.alphabet, np.sqrt(np.sum(diff**2, axis=0)))


def embedding_gradient(emb: EmbeddingMatrix, cost_grad: np.ndarray) -> np.ndarray:
    """Chain rule from dL/dc (n+1, n+1) to dL/dA (U, n) for the Euclidean embedding cost.

    Where two symbols coincide the norm is not differentiable and 0 is used.
    """
    V = emb.with_gap()
    diff = V[:, :, None] - V[:, None, :]  # a(u) - a(v)
    norm = np.sqrt(np.sum(diff**2, axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(norm > 0, diff / norm, 0.0)
    G = np.asarray(cost_grad)
    # d c(u,v) / d a(u) = unit[:, u, v]; d c(u,v) / d a(v) = -unit[:, u, v]
    grad = np.einsum("kuv,uv->ku", unit, G) - np.einsum("kuv,uv->kv", unit, G)
    return grad[:, :-1]


# cosine cost head


def _images(omega, x, y):
    ox, oy = omega @ x, omega @ y
    nx, ny = np.linalg.norm(ox), np.linalg.norm(oy)
    if nx == 0 or ny == 0:
        raise ValueError("cosine cost undefined: Omega maps an input to zero")
    return ox, oy, nx, ny


def cosine_similarity(omega: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    ox, oy, nx, ny = _images(omega, x, y)
    return float(ox @ oy / (nx * ny))


def cosine_cost(omega: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    return 0.5 * (1.0 - cosine_similarity(omega, x, y))


def cosine_cost_gradient(omega: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    ox, oy, nx, ny = _images(omega, x, y)
    s = float(ox @ oy / (nx * ny))
    num = (
        np.outer(ox, y)
        + np.outer(oy, x)
        - s * (np.outer(ox, x) * (ny / nx) + np.outer(oy, y) * (nx / ny))
    )
    return -num / (2.0 * nx * ny)


def finite_diff_check(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    point: np.ndarray,
    step: float = 1e-5,
) -> float:
    """Largest absolute gap between ``grad(point)`` and central differences of ``f``."""
    if step <= 0:
        raise ValueError("step must be positive")
    point = np.array(point, dtype=float)
    analytic = np.asarray(grad(point), dtype=float)
    numeric = np.zeros_like(point)
    for idx in np.ndindex(point.shape):
        hi, lo = point.copy(), point.copy()
        hi[idx] += step
        lo[idx] -= step
        numeric[idx] = (f(hi) - f(lo)) / (2 * step)
    return float(np.max(np.abs(numeric - analytic))) if point.size else 0.0


# metric properties


@dataclass
class MetricAudit:
    nonnegativity: list[tuple[str, str]] = field(default_factory=list)
    self_identity: list[tuple[str]] = field(default_factory=list)
    symmetry: list[tuple[str, str]] = field(default_factory=list)
    triangle: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def flags(self) -> dict[str, bool]:
        return {
            "non-negativity": not self.nonnegativity,
            "self-identity": not self.self_identity,
            "symmetry": not self.symmetry,
            "triangle inequality": not self.triangle,
        }

    @property
    def is_pseudometric(self) -> bool:
        return all(self.flags.values())

    def report(self) -> str:
        lines = []
        witnesses = {
            "non-negativity": ("c({}, {}) < 0", self.nonnegativity),
            "self-identity": ("c({0}, {0}) != 0", self.self_identity),
            "symmetry": ("c({0}, {1}) < c({1}, {0})", self.symmetry),
            "triangle inequality": ("c({0}, {1}) + c({1}, {2}) < c({0}, {2})", self.triangle),
        }
        for name, ok in self.flags.items():
            lines.append(f"{name}: {'ok' if ok else 'VIOLATED'}")
            fmt, found = witnesses[name]
            lines.extend("  " + fmt.format(*w) for w in found)
        return "\n".join(lines)


def check_pseudometric(c: CostTable, tol: float = AUDIT_TOL) -> MetricAudit:
    C = c.entries
    names = c.alphabet.extended
    m = len(names)
    audit = MetricAudit()
    scale = max(1.0, float(np.max(np.abs(C))))
    eps = tol * scale
    for u in range(m):
        if abs(C[u, u]) > eps:
            audit.self_identity.append((names[u],))
        for v in range(m):
            if C[u, v] < -eps:
                audit.nonnegativity.append((names[u], names[v]))
            if u < v and abs(C[u, v] - C[v, u]) > eps:
                lo, hi = (u, v) if C[u, v] < C[v, u] else (v, u)
                audit.symmetry.append((names[lo], names[hi]))
    # triangle: c(x, z) <= c(x, y) + c(y, z) over all triples
    via = C[:, :, None] + C[None, :, :]  # via[x, y, z] = c(x,y) + c(y,z)
    bad = np.argwhere(via < C[:, None, :] - eps)
    for x, y, z in bad:
        audit.triangle.append((names[x], names[y], names[z]))
    return audit


def metric_closure(D: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths (Floyd-Warshall) over a nonnegative table."""
    D = np.array(D, dtype=float)
    for k in range(D.shape[0]):
        D = np.minimum(D, D[:, k, None] + D[None, k, :])
    return D


def metric_projection(c: CostTable) -> CostTable:
    """Clamp, zero the diagonal, symmetrize, then take the shortest-path closure.

    The closure is the largest pseudo-metric below the symmetrized table.
    """
    C = np.maximum(c.entries, 0.0)
    np.fill_diagonal(C, 0.0)
    C = 0.5 * (C + C.T)
    C = metric_closure(C)
    C = 0.5 * (C + C.T)
    return c.replace(C)


def nearest_pseudometric(
    C: np.ndarray, tol: float = 1e-13, max_sweeps: int = 10_000
) -> np.ndarray:
    """Frobenius-nearest pseudo-metric to ``C`` via Dykstra's cyclic projections.

    The symmetric part with zero diagonal is projected onto the cone cut out by
    nonnegativity and all triangle inequalities.
    """
    C = np.asarray(C, dtype=float)
    m = C.shape[0]
    S = 0.5 * (C + C.T)
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    pid = {p: k for k, p in enumerate(pairs)}
    x = [float(S[i, j]) for i, j in pairs]

    def key(a, b):
        return pid[(a, b) if a < b else (b, a)]

    # each triangle row: x[long] - x[s1] - x[s2] <= 0
    tri = [
        (key(a, b), key(a, k), key(k, b))
        for a, b in pairs
        for k in range(m)
        if k != a and k != b
    ]
    z_tri = [0.0] * len(tri)
    z_pos = [0.0] * len(x)
    for _ in range(max_sweeps):
        change = 0.0
        for t, (p, q, r) in enumerate(tri):
            z = z_tri[t]
            # undo previous correction (normal vector (1, -1, -1), squared norm 3)
            yp, yq, yr = x[p] + z, x[q] - z, x[r] - z
            viol = yp - yq - yr
            lam = viol / 3.0 if viol > 0 else 0.0
            change += abs(x[p] - (yp - lam))
            x[p], x[q], x[r] = yp - lam, yq + lam, yr + lam
            z_tri[t] = lam
        for k in range(len(x)):
            y = x[k] + z_pos[k]
            new = y if y > 0 else 0.0
            z_pos[k] = new - y
            change += abs(x[k] - new)
            x[k] = new
        if change <= tol:
            break
    out = np.zeros((m, m))
    for (i, j), v in zip(pairs, x):
        out[i, j] = out[j, i] = v
    return out
