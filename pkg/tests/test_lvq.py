import math

import numpy as np
import pytest

from tedlearn.costs import CostTable, check_pseudometric, finite_diff_check
from tedlearn.datasets import synthetic_dataset
from tedlearn.distances import pairwise_true, pseudo_from_tensor, summary_tensor
from tedlearn.gesl import counterexample_costs, counterexample_dataset
from tedlearn.lvq import (
    LvqConfig,
    glvq_cost_gradient,
    glvq_loss,
    knn_evaluate,
    knn_predict,
    lvq_fit,
    predict_vote,
    prototype_predict,
    select_medoid_prototypes,
)

LOG2 = math.log(2)


@pytest.fixture(scope="module")
def small():
    d = synthetic_dataset(6, seed=3, max_size=4)
    return d, summary_tensor(d.trees, reference_cost(d))


def reference_cost(d):
    from tedlearn.costs import uniform_cost

    return uniform_cost(d.alphabet)


def test_loss_on_counterexample_with_fixed_prototypes():
    d = counterexample_dataset()
    D = pairwise_true(d.trees, counterexample_costs()["c0"])
    # x1: (log2 - 2 log2) / 3 log2; x4: (0 - log2) / log2; prototypes themselves are skipped
    assert glvq_loss(d, {"1": 1, "2": 2}, D) == pytest.approx(-4 / 3)


def test_medoids_and_loo_on_counterexample():
    d = counterexample_dataset()
    D = pairwise_true(d.trees, counterexample_costs()["c0"])
    assert select_medoid_prototypes(d, D) == {"1": 0, "2": 2}
    assert knn_evaluate(d, D, 1) == 0.0


def test_vote_ties_go_to_nearest_class():
    assert predict_vote(["b", "a", "a", "b"]) == "b"
    assert predict_vote(["a", "b", "b"]) == "b"


def test_knn_distance_ties_go_to_lower_index():
    assert knn_predict(["x", "y"], np.array([[1.0, 1.0]]), 1) == ["x"]
    assert prototype_predict({"y": 1, "x": 0}, np.array([[2.0, 2.0]])) == ["x"]


def test_knn_rejects_bad_k():
    d = counterexample_dataset()
    with pytest.raises(ValueError):
        knn_evaluate(d, np.zeros((4, 4)), 4)


def test_gradient_against_finite_differences(small):
    d, S = small
    rng = np.random.default_rng(0)
    base = CostTable(d.alphabet, rng.uniform(0.5, 1.5, size=(5, 5)))
    protos = select_medoid_prototypes(d, pseudo_from_tensor(S, base))

    def f(flat):
        return glvq_loss(d, protos, pseudo_from_tensor(S, base.replace(flat.reshape(5, 5))))

    def g(flat):
        c = base.replace(flat.reshape(5, 5))
        return glvq_cost_gradient(d, protos, pseudo_from_tensor(S, c), lambda i, j: S[i, j])[1].ravel()

    assert finite_diff_check(f, g, base.entries.ravel()) <= 1e-6


@pytest.mark.parametrize("head", ["pseudo", "true_ted"])
def test_embedding_variant_best_loss_never_increases(small, head):
    d, S = small
    fit = lvq_fit(d, LvqConfig(mode="embedding", distance_head=head, max_iters=15), summaries=S)
    assert all(a >= b for a, b in zip(fit.best_trace, fit.best_trace[1:]))
    assert fit.best_loss <= fit.loss_trace[0]
    assert check_pseudometric(fit.cost, tol=1e-9).is_pseudometric
    assert fit.embedding is not None


@pytest.mark.parametrize("head", ["pseudo", "true_ted"])
def test_direct_cost_variant_stays_pseudometric(small, head):
    d, S = small
    fit = lvq_fit(d, LvqConfig(mode="direct_cost", distance_head=head, max_iters=15), summaries=S)
    assert fit.metric_ok and all(fit.metric_ok)
    assert check_pseudometric(fit.cost).is_pseudometric


def test_fit_is_deterministic(small):
    d, S = small
    cfg = LvqConfig(mode="embedding", max_iters=10)
    a, b = lvq_fit(d, cfg, summaries=S), lvq_fit(d, cfg, summaries=S)
    assert a.cost == b.cost and a.loss_trace == b.loss_trace


def test_learning_improves_on_synthetic_data():
    d = synthetic_dataset(10, seed=1)
    c0 = reference_cost(d)
    S = summary_tensor(d.trees, c0)
    fit = lvq_fit(d, LvqConfig(mode="embedding", max_iters=40), summaries=S)
    assert fit.best_loss < fit.loss_trace[0]


@pytest.mark.parametrize("kw", [{"mode": "x"}, {"distance_head": "x"}, {"learning_rate": 0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        LvqConfig(**kw)
