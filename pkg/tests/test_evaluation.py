import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comorbnet import glm
from comorbnet.data_io import Dataset
from comorbnet.errors import DataError, SpecError
from comorbnet.evaluation import (
    DEFAULT_METHODS,
    auc_mann_whitney,
    bootstrap_eval,
    default_equations,
    eval_report,
    evaluate_split,
    holdout_size,
    in_sample_eval,
    jackknife_eval,
    roc,
)
from comorbnet.fitting import equation_data
from comorbnet.misspec import simulate_misspecified
from comorbnet.network import MISSPECIFIED, NetworkSpec

from oracles import pairwise_auc

SMALL = NetworkSpec(["Y1"], ["S1"], covariates=["X1"], symptom_edges=[("Y1", "S1")], tau={"Y1": 0.05})


def _small_data(n, seed=0, p_pos=None):
    rng = np.random.default_rng(seed)
    s = rng.integers(0, 2, n)
    x = rng.integers(0, 2, n)
    p = p_pos if p_pos is not None else glm.sigmoid(-1.5 + 1.5 * s + 0.5 * x)
    y = (rng.random(n) < p).astype(np.uint8)
    return Dataset(SMALL.columns, np.column_stack([y, s, x]).astype(np.uint8))


def _tied_instance(rng, n):
    scores = rng.integers(0, max(2, n // 4), n) / 7.0
    labels = rng.integers(0, 2, n)
    labels[0], labels[1] = 0, 1
    return scores, labels


class TestRoc:
    def test_small_example(self):
        curve = roc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
        assert curve.auc == 0.75
        assert curve.points == [(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]
        assert curve.thresholds[0] == np.inf
        assert curve.thresholds[1:].tolist() == [0.8, 0.4, 0.35, 0.1]

    def test_perfect_separation(self):
        curve = roc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
        assert curve.auc == 1.0
        assert (0.0, 1.0) in curve.points

    def test_all_tied(self):
        curve = roc([0.3] * 6, [0, 1, 0, 1, 1, 0])
        assert curve.points == [(0.0, 0.0), (1.0, 1.0)]
        assert curve.auc == 0.5

    def test_degenerate_labels(self):
        with pytest.raises(DataError):
            roc([0.1, 0.2], [1, 1])
        with pytest.raises(ValueError):
            roc([0.1, 0.2], [0, 2])
        with pytest.raises(ValueError):
            roc([0.1, 0.2, 0.3], [0, 1])

    def test_csv(self):
        text = roc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]).to_csv()
        lines = text.splitlines()
        assert lines[0] == "threshold,fpr,tpr"
        assert lines[1] == "inf,0.0,0.0"
        assert lines[-1] == "0.1,1.0,1.0"

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            scores, labels = _tied_instance(rng, int(rng.integers(5, 300)))
            got = roc(scores, labels).auc
            assert got == pytest.approx(pairwise_auc(scores.tolist(), labels.tolist()), abs=1e-12)
            assert got == pytest.approx(auc_mann_whitney(scores, labels), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(4, 200))
    def test_curve_invariants(self, seed, n):
        scores, labels = _tied_instance(np.random.default_rng(seed), n)
        curve = roc(scores, labels)
        assert np.all(np.diff(curve.fpr) >= 0) and np.all(np.diff(curve.tpr) >= 0)
        assert curve.points[0] == (0.0, 0.0) and curve.points[-1] == (1.0, 1.0)
        assert 0.0 <= curve.auc <= 1.0
        assert curve.auc == pytest.approx(np.trapezoid(curve.tpr, curve.fpr), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(4, 200))
    def test_label_flip_antisymmetry(self, seed, n):
        scores, labels = _tied_instance(np.random.default_rng(seed), n)
        assert roc(-scores, 1 - labels).auc == pytest.approx(roc(scores, labels).auc, abs=1e-12)

    def test_reversed_scores(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            scores = rng.permutation(50).astype(float)
            labels = rng.integers(0, 2, 50)
            labels[:2] = (0, 1)
            assert roc(-scores, labels).auc == pytest.approx(1 - roc(scores, labels).auc, abs=1e-12)


class TestMannWhitney:
    def test_small_example(self):
        assert auc_mann_whitney([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75

    def test_ties_count_half(self):
        assert auc_mann_whitney([0.5, 0.5], [0, 1]) == 0.5


class TestSchemes:
    def test_in_sample_single_replicate(self):
        results = in_sample_eval(SMALL, _small_data(500), "Y1")
        assert len(results) == 1 and results[0].ok
        assert len(results[0].test_index) == 500

    def test_bootstrap_size_and_scoring(self):
        data = _small_data(400)
        results = bootstrap_eval(SMALL, data, "Y1", replicates=5, seed=3)
        assert [r.index for r in results] == list(range(5))
        for r in results:
            assert r.ok
            assert len(r.train_index) == 400
            assert np.array_equal(r.test_index, np.arange(400))
        assert len({tuple(r.train_index[:20]) for r in results}) == 5

    def test_identity_resample_matches_in_sample(self):
        data = _small_data(400)
        eq = equation_data(SMALL, data, "Y1", MISSPECIFIED)
        everything = np.arange(400)
        ident = evaluate_split(SMALL, eq, glm.NONE, everything[::-1], everything)
        assert ident.auc == pytest.approx(in_sample_eval(SMALL, data, "Y1")[0].auc, abs=1e-12)

    def test_jackknife_partitions(self):
        data = _small_data(1000)
        results = jackknife_eval(SMALL, data, "Y1", seed=1)
        assert len(results) == 20
        for r in results:
            assert (len(r.train_index), len(r.test_index)) == (900, 100)
            assert np.intersect1d(r.train_index, r.test_index).size == 0
            assert np.array_equal(np.union1d(r.train_index, r.test_index), np.arange(1000))

    def test_k_fold(self):
        data = _small_data(1000)
        results = jackknife_eval(SMALL, data, "Y1", folds=10)
        tests = np.concatenate([r.test_index for r in results])
        assert len(results) == 10
        assert np.array_equal(np.sort(tests), np.arange(1000))

    def test_holdout_too_small(self):
        with pytest.raises(ValueError, match="fewer than 10"):
            jackknife_eval(SMALL, _small_data(99), "Y1")

    def test_holdout_size_rounds_half_up(self):
        assert holdout_size(1000, 0.1) == 100
        assert holdout_size(105, 0.1) == 11
        assert holdout_size(104, 0.1) == 10

    def test_deterministic(self):
        data = _small_data(600)
        a = bootstrap_eval(SMALL, data, "Y1", replicates=4, seed=9)
        b = bootstrap_eval(SMALL, data, "Y1", replicates=4, seed=9)
        assert [r.auc for r in a] == [r.auc for r in b]
        c = jackknife_eval(SMALL, data, "Y1", repeats=4, seed=9)
        d = jackknife_eval(SMALL, data, "Y1", repeats=4, seed=9)
        assert all(np.array_equal(x.test_index, y.test_index) for x, y in zip(c, d))

    def test_degenerate_holdout_recorded(self):
        data = _small_data(200, seed=4, p_pos=0.0)
        values = data.values.copy()
        values[:6, 0] = 1
        values[:6, 1] = np.array([0, 1, 0, 1, 0, 1])
        data = Dataset(SMALL.columns, values)
        results = jackknife_eval(SMALL, data, "Y1", seed=0)
        failed = [r for r in results if not r.ok]
        assert len(results) == 20
        assert failed, "expected at least one holdout without positives"
        assert any("positive" in r.error for r in failed)
        assert all(r.error for r in failed)
        assert all(np.isnan(r.auc) for r in failed)

    def test_unknown_equation(self):
        with pytest.raises(DataError):
            bootstrap_eval(SMALL, _small_data(100), "S1")

    def test_weighting_needs_tau(self):
        spec = NetworkSpec(["Y1"], ["S1"], symptom_edges=[("Y1", "S1")], covariates=["X1"])
        with pytest.raises(SpecError):
            bootstrap_eval(spec, _small_data(100), "Y1", glm.RARE_EVENT)


class TestReport:
    def test_single_cell(self):
        report = eval_report(SMALL, _small_data(500), methods=["boot"], replicates=7)
        assert list(report.cells) == [("Y1", "boot")]
        cell = report.cell("Y1", "boot")
        assert len(cell.aucs) == 7
        assert cell.mean == pytest.approx(sum(cell.aucs) / 7, abs=1e-15)

    def test_table_layout(self, preset, spec, tmp_path):
        data = simulate_misspecified(preset.params_plain, 3000, seed=1)
        report = eval_report(spec, data, replicates=2)
        lines = report.table_csv().splitlines()
        assert lines[0] == "logit," + ",".join(DEFAULT_METHODS)
        assert [ln.split(",")[0] for ln in lines[1:]] == ["Y1", "Y2", "Y3", "Y4"]
        report.write(tmp_path)
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["equations"]["Y1"]["boot"]["n_ok"] + doc["equations"]["Y1"]["boot"]["n_failed"] == 2
        assert (tmp_path / "roc" / "Y1_boot_01.csv").exists()
        assert (tmp_path / "roc" / "Y4_weight_00.csv").exists()
        assert "jackkn+weight" in report.format_text()

    def test_default_equations(self, spec):
        assert default_equations(spec) == ["Y1", "Y2", "Y3", "Y4"]

    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError, match="unknown method"):
            eval_report(SMALL, _small_data(100), methods=["cv"])
        with pytest.raises(ValueError):
            eval_report(SMALL, _small_data(100), methods=[])
