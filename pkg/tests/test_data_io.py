import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comorbnet.data_io import (
    FAIL,
    Dataset,
    Scenario,
    params_from_dict,
    read_csv,
    read_params,
    read_scenarios,
    write_csv,
    write_params,
    write_scenarios,
)
from comorbnet.errors import DataError, DataIOError
from comorbnet.generative import sample
from comorbnet.network import NetworkSpec
from comorbnet.preset import write_preset

from conftest import reference_generative

TINY = NetworkSpec(["Y1"], ["S1"], covariates=["X1"], symptom_edges=[("Y1", "S1")])


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestReadCsv:
    def test_drop_row(self, tmp_path):
        path = _write(tmp_path, "Y1,S1,X1\n0,1,0\n1,,1\n1,1,1\n0,0,0\n1,0,1\n")
        data = read_csv(path, TINY)
        assert (data.n, data.dropped_rows) == (4, 1)
        assert data.column("S1").tolist() == [1, 1, 0, 0]

    def test_fail_policy(self, tmp_path):
        path = _write(tmp_path, "Y1,S1,X1\n0,1,0\n1,,1\n")
        with pytest.raises(DataError, match=r":3: missing value in column S1"):
            read_csv(path, TINY, missing_policy=FAIL)

    def test_missing_column_named(self, tmp_path, spec):
        cols = [c for c in spec.columns if c != "S2"]
        path = _write(tmp_path, ",".join(cols) + "\n")
        with pytest.raises(DataError, match="S2"):
            read_csv(path, spec)

    def test_all_missing_columns_listed(self, tmp_path):
        path = _write(tmp_path, "Y1\n1\n")
        with pytest.raises(DataError, match="S1, X1"):
            read_csv(path, TINY)

    @pytest.mark.parametrize("cell", ["2", "true", "NA", " 1", "1.0"])
    def test_non_binary_cell(self, tmp_path, cell):
        path = _write(tmp_path, f"Y1,S1,X1\n0,1,0\n1,{cell},0\n")
        with pytest.raises(DataError, match=r":3: non-binary value .* in column S1"):
            read_csv(path, TINY)

    def test_extra_columns_ignored_and_reordered(self, tmp_path):
        path = _write(tmp_path, "X1,junk,S1,Y1\n1,abc,0,1\n")
        data = read_csv(path, TINY)
        assert data.column_names == ("Y1", "S1", "X1")
        assert data.values.tolist() == [[1, 0, 1]]

    def test_ragged_row(self, tmp_path):
        path = _write(tmp_path, "Y1,S1,X1\n0,1\n")
        with pytest.raises(DataError, match="expected 3 fields"):
            read_csv(path, TINY)

    def test_header_only(self, tmp_path):
        data = read_csv(_write(tmp_path, "Y1,S1,X1\n"), TINY)
        assert data.n == 0 and data.values.shape == (0, 3)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataIOError):
            read_csv(tmp_path / "absent.csv", TINY)

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataError, match="header"):
            read_csv(_write(tmp_path, ""), TINY)

    def test_bad_policy(self, tmp_path):
        with pytest.raises(ValueError):
            read_csv(_write(tmp_path, "Y1,S1,X1\n"), TINY, missing_policy="impute")

    def test_dropped_plus_retained(self, tmp_path):
        rng = np.random.default_rng(0)
        cells = rng.choice(["0", "1", ""], size=(300, 3), p=[0.45, 0.45, 0.1])
        text = "Y1,S1,X1\n" + "".join(",".join(r) + "\n" for r in cells)
        data = read_csv(_write(tmp_path, text), TINY)
        assert data.n + data.dropped_rows == 300
        assert data.dropped_rows == int(np.any(cells == "", axis=1).sum())


class TestWriteCsv:
    def test_round_trip_ecap(self, tmp_path, spec):
        data = sample(reference_generative(spec), 500, seed=11)
        path = tmp_path / "sim.csv"
        write_csv(data, path)
        assert read_csv(path, spec) == data

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 40), st.integers(0, 2**32 - 1))
    def test_round_trip_random(self, tmp_path_factory, n, seed):
        values = np.random.default_rng(seed).integers(0, 2, size=(n, 3))
        data = Dataset(TINY.columns, values)
        path = tmp_path_factory.mktemp("rt") / "d.csv"
        write_csv(data, path)
        assert read_csv(path, TINY) == data

    def test_format(self, tmp_path):
        data = Dataset(("Y1", "S1", "X1"), np.array([[1, 0, 1], [0, 0, 1]]))
        path = tmp_path / "d.csv"
        write_csv(data, path)
        assert path.read_bytes() == b"Y1,S1,X1\n1,0,1\n0,0,1\n"

    def test_header_only(self, tmp_path):
        path = tmp_path / "d.csv"
        write_csv(Dataset(TINY.columns, np.zeros((0, 3))), path)
        assert path.read_text().splitlines() == ["Y1,S1,X1"]

    def test_byte_stable(self, tmp_path, spec):
        data = sample(reference_generative(spec), 200, seed=2)
        write_csv(data, tmp_path / "a.csv")
        write_csv(data, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestDataset:
    def test_rejects_non_binary(self):
        with pytest.raises(DataError):
            Dataset(("a",), np.array([[2]]))

    def test_rejects_duplicate_names(self):
        with pytest.raises(DataError):
            Dataset(("a", "a"), np.zeros((1, 2)))

    def test_read_only(self):
        data = Dataset(("a",), np.array([[1]]))
        with pytest.raises(ValueError):
            data.values[0, 0] = 0

    def test_take(self):
        data = Dataset(("a", "b"), np.array([[1, 0], [0, 1], [1, 1]]))
        assert data.take([2, 2]).values.tolist() == [[1, 1], [1, 1]]


class TestScenarios:
    def test_preset_file(self, tmp_path, spec):
        write_preset("ecap-allergy", tmp_path)
        scenarios = read_scenarios(tmp_path / "scenarios.json", spec)
        names = [n for n, _ in scenarios]
        assert names == ["case1", "case2", "case3", "case4", "case5"]
        case1, case2 = scenarios[0][1], scenarios[1][1]
        assert case1.covariate_values == case2.covariate_values
        assert case1.factor_values == case2.factor_values
        assert set(case1.symptom_values.values()) == {0}
        assert set(case2.symptom_values.values()) == {1}

    def test_round_trip(self, tmp_path, preset, spec):
        path = tmp_path / "s.json"
        write_scenarios(preset.scenarios, path)
        assert read_scenarios(path, spec) == list(preset.scenarios)

    @pytest.mark.parametrize("text", ["", "  \n", "[]"])
    def test_empty_file_warns(self, tmp_path, spec, text):
        with pytest.warns(UserWarning, match="empty"):
            assert read_scenarios(_write(tmp_path, text, "s.json"), spec) == []

    @pytest.mark.parametrize(
        "doc, message",
        [
            ([{"name": "a", "covariates": {"X9": 1}}], "unknown variable"),
            ([{"name": "a", "symptoms": {"S1": 2}}], "must be 0 or 1"),
            ([{"name": "a", "weather": {}}], "unknown scenario key"),
            ([{"covariates": {}}], "name"),
            ([{"name": "a"}, {"name": "a"}], "duplicate"),
            ({"name": "a"}, "array"),
        ],
    )
    def test_invalid(self, tmp_path, spec, doc, message):
        with pytest.raises(DataError, match=message):
            read_scenarios(_write(tmp_path, json.dumps(doc), "s.json"), spec)

    def test_unset_symptoms_allowed(self, tmp_path, spec):
        doc = [{"name": "a", "covariates": {"X1": 1}, "symptoms": {"S1": 1}}]
        [(name, sc)] = read_scenarios(_write(tmp_path, json.dumps(doc), "s.json"), spec)
        assert sc == Scenario(covariate_values={"X1": 1}, symptom_values={"S1": 1})


class TestParams:
    def test_round_trip(self, tmp_path):
        eqs = {"Y1": {"intercept": -1.5, "S1": 0.25}}
        write_params("misspecified", eqs, tmp_path / "p.json")
        assert read_params(tmp_path / "p.json") == ("misspecified", eqs)

    @pytest.mark.parametrize(
        "doc",
        [
            {"variant": "bayes", "equations": {}},
            {"variant": "generative"},
            {"variant": "generative", "equations": {"Y1": {"intercept": "x"}}},
            {"variant": "generative", "equations": {"Y1": {"intercept": True}}},
            {"variant": "generative", "equations": [], "extra": 1},
        ],
    )
    def test_invalid(self, doc):
        with pytest.raises(DataError):
            params_from_dict(doc)
