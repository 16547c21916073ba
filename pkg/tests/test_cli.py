import csv
import io
import math
import subprocess
import sys

import numpy as np
import pytest

from tedlearn.cli import main
from tedlearn.costs import CostTable, EmbeddingMatrix
from tedlearn.datasets import synthetic_dataset
from tedlearn.gesl import counterexample_costs, counterexample_dataset
from tedlearn.trees import Alphabet, Dataset, parse_tree

LOG2 = math.log(2)


@pytest.fixture
def counter(tmp_path):
    p = tmp_path / "counter.json"
    counterexample_dataset().save(p)
    return p


@pytest.fixture
def synth(tmp_path):
    p = tmp_path / "synth.json"
    synthetic_dataset(6, seed=0, max_size=4).save(p)
    return p


def read_matrix(text):
    rows = list(csv.reader(io.StringIO(text)))
    return np.array([[float(v) for v in r[1:]] for r in rows[1:]])


def test_dist_counterexample(counter, capsys):
    assert main(["dist", str(counter)]) == 0
    D = read_matrix(capsys.readouterr().out)
    assert D.shape == (4, 4)
    for v in D.ravel():
        assert min(abs(v - k * LOG2) for k in (0, 1, 2)) < 1e-12


def test_dist_single_tree(tmp_path):
    p = tmp_path / "one.json"
    A = Alphabet(("a",))
    Dataset(A, [(parse_tree("a"), "x")]).save(p)
    out = tmp_path / "d.csv"
    assert main(["dist", str(p), "--out", str(out), "--cost", "simplex"]) == 0
    np.testing.assert_array_equal(read_matrix(out.read_text()), [[0.0]])


def test_dist_input_errors(tmp_path, counter):
    assert main(["dist", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("nonsense")
    assert main(["dist", str(counter), "--cost", str(bad)]) == 2


def test_dist_with_cost_file(tmp_path, counter, capsys):
    cpath = tmp_path / "c1.csv"
    counterexample_costs()["c1"].save(cpath)
    assert main(["dist", str(counter), "--cost", str(cpath)]) == 0
    D = read_matrix(capsys.readouterr().out)
    assert D[0, 2] == pytest.approx(LOG2 / 2)


def test_learn_g1_writes_learned_cost(tmp_path, counter, capsys):
    out = tmp_path / "g1"
    assert main(["learn", str(counter), "--variant", "G1", "--beta", "0.1", "--out", str(out)]) == 0
    c = CostTable.load(out / "cost.csv")
    assert np.max(np.abs(c.entries - counterexample_costs()["c1"].entries)) <= 5e-3
    assert (out / "loss_trace.csv").exists()
    text = capsys.readouterr().out
    assert "1-NN error before" in text and "converged:" in text


def test_learn_g2_metric_gives_pseudometric(tmp_path, counter):
    out = tmp_path / "g2"
    assert main(["learn", str(counter), "--variant", "G2", "--metric", "--out", str(out)]) == 0
    assert main(["check-metric", str(out / "cost.csv")]) == 0


def test_learn_l2_is_reproducible(tmp_path, synth):
    outs = [tmp_path / "a", tmp_path / "b"]
    for o in outs:
        assert main(["learn", str(synth), "--variant", "L2", "--seed", "7", "--epochs", "5", "--out", str(o)]) == 0
    for name in ("cost.csv", "embedding.csv", "loss_trace.csv", "summary.txt"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    EmbeddingMatrix.from_text((outs[0] / "embedding.csv").read_text())


def test_learn_rejects_incompatible_method(tmp_path, counter):
    assert main(["learn", str(counter), "--variant", "L1", "--method", "gesl", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as e:
        main(["learn", str(counter), "--variant", "G7", "--out", str(tmp_path)])
    assert e.value.code == 2


def test_check_metric(tmp_path, capsys):
    costs = counterexample_costs()
    c0, c1 = tmp_path / "c0.csv", tmp_path / "c1.csv"
    costs["c0"].save(c0)
    costs["c1"].save(c1)
    assert main(["check-metric", str(c0)]) == 0
    proj = tmp_path / "proj.csv"
    assert main(["check-metric", str(c1), "--project", str(proj)]) == 1
    assert "c(2, 1) + c(1, 3) < c(2, 3)" in capsys.readouterr().out
    assert main(["check-metric", str(proj)]) == 0
    garbage = tmp_path / "g.csv"
    garbage.write_text(",a,b\n")
    assert main(["check-metric", str(garbage)]) == 2


def test_verify(capsys):
    assert main(["verify", "dp_overestimation"]) == 0
    out = capsys.readouterr().out
    assert "dp_single: 1\n" in out and "oracle_single: 0.6\n" in out
    assert main(["verify", "nope"]) == 2
    assert main(["verify", "all"]) == 0


def test_experiment_infeasible_folds(tmp_path, counter):
    assert main(["experiment", str(counter), "--folds", "3", "--out", str(tmp_path)]) == 2


def test_experiment_is_deterministic(tmp_path, synth):
    args = ["experiment", str(synth), "--grid", "G1,L1", "--folds", "2", "--epochs", "3", "--seed", "4"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("experiment_results_pseudo-edit_distance.csv", "experiment_results_edit_distance.csv"):
        a = (tmp_path / "a" / name).read_text()
        assert a == (tmp_path / "b" / name).read_text()
        assert a.splitlines()[0] == "m,knn_mean,knn_std,mrglvq_mean,mrglvq_std"


def test_simplex_and_gradcheck(capsys):
    assert main(["simplex", "3"]) == 0
    A = np.array([[float(v) for v in r] for r in csv.reader(io.StringIO(capsys.readouterr().out))])
    np.testing.assert_allclose(np.linalg.norm(A, axis=0), 1.0)
    assert main(["simplex", "0"]) == 2
    assert main(["gradcheck", "--trials", "10"]) == 0


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "tedlearn", "simplex", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("1,0.5")
