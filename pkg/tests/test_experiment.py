import numpy as np
import pytest

from tedlearn.datasets import synthetic_dataset
from tedlearn.experiment import (
    ExperimentConfig,
    InfeasibleSplitError,
    run_experiment,
    stratified_folds,
)


def test_folds_are_stratified_and_partition():
    labels = ["a"] * 7 + ["b"] * 5
    folds = stratified_folds(labels, 3, seed=1)
    assert sorted(i for f in folds for i in f) == list(range(12))
    for f in folds:
        assert 1 <= sum(labels[i] == "b" for i in f) <= 2
    assert folds == stratified_folds(labels, 3, seed=1)
    assert folds != stratified_folds(labels, 3, seed=2)


def test_folds_infeasible():
    with pytest.raises(InfeasibleSplitError):
        stratified_folds(["a"] * 5 + ["b"] * 2, 3, 0)
    with pytest.raises(InfeasibleSplitError):
        stratified_folds(["a"] * 5, 2, 0)


def test_synthetic_dataset_shape_and_determinism():
    d = synthetic_dataset(20, seed=0)
    assert len(d) == 40 and sorted(set(d.labels)) == ["A", "B"]
    assert d.records == synthetic_dataset(20, seed=0).records


def test_small_grid_runs():
    d = synthetic_dataset(6, seed=0, max_size=4)
    r = run_experiment(d, ExperimentConfig(variants=("G1", "L2"), folds=2, lvq_epochs=5, gesl_iters=300))
    for head in ("pseudo", "true"):
        rows = r.table(head, ("G1", "L2"))
        assert [row["m"] for row in rows] == [1, 5]
        for row in rows:
            assert 0 <= row["knn_mean"] <= 1 and 0 <= row["mrglvq_mean"] <= 1
    assert len(r.l2_best_traces) == 4


def test_unknown_variant():
    with pytest.raises(ValueError):
        ExperimentConfig(variants=("G9",))
