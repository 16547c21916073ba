import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import ABC, random_metric_cost
from tedlearn.costs import (
    CostTable,
    EmbeddingMatrix,
    check_pseudometric,
    cosine_cost,
    cosine_cost_gradient,
    cosine_similarity,
    cost_from_embedding,
    embedding_gradient,
    finite_diff_check,
    metric_closure,
    metric_projection,
    nearest_pseudometric,
    simplex_embedding,
    simplex_init,
    uniform_cost,
)
from tedlearn.gesl import counterexample_costs
from tedlearn.trees import Alphabet


@pytest.mark.parametrize("U", range(1, 17))
def test_simplex_columns_unit_norm_unit_distance(U):
    A = simplex_init(U)
    assert A.shape == (U, U)
    np.testing.assert_allclose(np.linalg.norm(A, axis=0), 1.0, atol=1e-12)
    D = np.linalg.norm(A[:, :, None] - A[:, None, :], axis=0)
    np.testing.assert_allclose(D, 1.0 - np.eye(U), atol=1e-12)


def test_simplex_small_cases():
    np.testing.assert_allclose(simplex_init(1), [[1.0]])
    np.testing.assert_allclose(simplex_init(2), [[1.0, 0.5], [0.0, math.sqrt(3) / 2]], atol=1e-15)
    with pytest.raises(ValueError):
        simplex_init(0)


def test_simplex_embedding_cost_is_zero_one():
    c = cost_from_embedding(simplex_embedding(ABC))
    np.testing.assert_allclose(c.entries, 1.0 - np.eye(4), atol=1e-12)
    assert check_pseudometric(c).is_pseudometric


def test_simplex_embedding_needs_enough_dimensions():
    with pytest.raises(ValueError):
        simplex_embedding(ABC, dimension=2)
    assert simplex_embedding(ABC, dimension=5).dimension == 5


@given(st.integers(0, 2**32 - 1))
def test_cost_table_text_round_trip(seed):
    rng = np.random.default_rng(seed)
    c = CostTable(ABC, rng.normal(size=(4, 4)))
    assert CostTable.from_text(c.to_text()) == c


def test_embedding_text_round_trip_and_gap_check():
    e = EmbeddingMatrix(ABC, np.random.default_rng(0).normal(size=(2, 3)))
    back = EmbeddingMatrix.from_text(e.to_text())
    np.testing.assert_array_equal(back.vectors, e.vectors)
    bad = e.to_text().splitlines()
    bad[1] = bad[1].rsplit(",", 1)[0] + ",1"
    with pytest.raises(ValueError):
        EmbeddingMatrix.from_text("\n".join(bad))


@pytest.mark.parametrize("text", ["", ",a,b\na,0,1\nb,1,0\n", ",a,-\na,0,1\n", ",a,-\nb,0,1\n-,1,0\n"])
def test_malformed_cost_tables(text):
    with pytest.raises(ValueError):
        CostTable.from_text(text)


def test_cost_table_is_read_only():
    c = uniform_cost(ABC)
    with pytest.raises(ValueError):
        c.entries[0, 1] = 5.0


def test_audit_of_counterexample_costs():
    costs = counterexample_costs()
    assert check_pseudometric(costs["c0"]).is_pseudometric
    audit = check_pseudometric(costs["c1"])
    assert audit.symmetry and audit.triangle
    assert not audit.nonnegativity and not audit.self_identity
    assert ("2", "1", "3") in audit.triangle  # c(2,1) + c(1,3) = log2/2 < c(2,3) = log2
    assert "VIOLATED" in audit.report()


def test_audit_flags_each_property():
    C = np.array(uniform_cost(ABC, 1.0).entries)
    C[0, 0] = 0.1
    C[1, 2] = -0.1
    audit = check_pseudometric(CostTable(ABC, C))
    assert audit.self_identity == [("a",)]
    assert ("b", "c") in audit.nonnegativity
    assert ("b", "c") in audit.symmetry


@given(st.integers(0, 2**32 - 1))
def test_projection_yields_pseudometric_and_is_idempotent(seed):
    rng = np.random.default_rng(seed)
    c = CostTable(ABC, rng.normal(size=(4, 4)))
    p = metric_projection(c)
    assert check_pseudometric(p).is_pseudometric
    np.testing.assert_allclose(metric_projection(p).entries, p.entries, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_projection_leaves_pseudometrics_unchanged(seed):
    c = random_metric_cost(np.random.default_rng(seed))
    np.testing.assert_allclose(metric_projection(c).entries, c.entries, atol=1e-12)


def test_closure_is_shortest_paths():
    D = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    np.testing.assert_array_equal(metric_closure(D), [[0, 1, 2], [1, 0, 1], [2, 1, 0]])


@given(st.integers(0, 2**32 - 1))
def test_nearest_pseudometric_matches_convex_solver(seed):
    cp = pytest.importorskip("cvxpy")
    rng = np.random.default_rng(seed)
    C = rng.uniform(-0.5, 2.0, size=(4, 4))
    got = nearest_pseudometric(C)
    X = cp.Variable((4, 4), symmetric=True)
    cons = [cp.diag(X) == 0, X >= 0]
    cons += [X[i, k] <= X[i, j] + X[j, k] for i in range(4) for j in range(4) for k in range(4)]
    cp.Problem(cp.Minimize(cp.sum_squares(X - C)), cons).solve()
    np.testing.assert_allclose(got, X.value, atol=1e-5)
    assert check_pseudometric(CostTable(ABC, got), tol=1e-10).is_pseudometric


def test_cosine_cost_range_and_invariance():
    rng = np.random.default_rng(0)
    om, x = rng.normal(size=(4, 4)), rng.normal(size=4)
    assert cosine_cost(om, x, x) == pytest.approx(0.0, abs=1e-12)
    assert cosine_cost(om, x, -x) == pytest.approx(1.0, abs=1e-12)
    assert cosine_similarity(om, x, 3 * x) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        cosine_cost(np.zeros((4, 4)), x, x)


@given(st.integers(0, 2**32 - 1))
def test_cosine_gradient_against_finite_differences(seed):
    rng = np.random.default_rng(seed)
    V = 4
    x, y, om = rng.normal(size=V), rng.normal(size=V), rng.normal(size=(V, V))
    err = finite_diff_check(
        lambda w: cosine_cost(w.reshape(V, V), x, y),
        lambda w: cosine_cost_gradient(w.reshape(V, V), x, y).ravel(),
        om.ravel(),
    )
    assert err <= 1e-6


@given(st.integers(0, 2**32 - 1))
def test_embedding_gradient_against_finite_differences(seed):
    rng = np.random.default_rng(seed)
    V0 = rng.normal(size=(3, 3))
    G = rng.normal(size=(4, 4))

    def f(flat):
        return float(np.sum(G * cost_from_embedding(EmbeddingMatrix(ABC, flat.reshape(3, 3))).entries))

    def g(flat):
        return embedding_gradient(EmbeddingMatrix(ABC, flat.reshape(3, 3)), G).ravel()

    assert finite_diff_check(f, g, V0.ravel()) <= 1e-6


def test_embedding_gradient_zero_at_coincident_points():
    e = EmbeddingMatrix(Alphabet(("a", "b")), np.zeros((2, 2)))
    np.testing.assert_array_equal(embedding_gradient(e, np.ones((3, 3))), 0.0)


def test_finite_diff_rejects_bad_step():
    with pytest.raises(ValueError):
        finite_diff_check(lambda p: 0.0, lambda p: p, np.zeros(2), step=0)
