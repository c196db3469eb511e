"""Dataset, scenario and parameter-document reading and writing."""
from __future__ import annotations

import csv
import io
import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import DataError, DataIOError
from .network import NetworkSpec

log = logging.getLogger(__name__)

DROP_ROW = "drop-row"
FAIL = "fail"
MISSING_POLICIES = (DROP_ROW, FAIL)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Binary observation table.

    ``values`` is an ``(n, k)`` uint8 array whose columns follow
    ``column_names``. Equality compares names and values only.
    """

    column_names: tuple[str, ...]
    values: np.ndarray
    source: str | None = None
    dropped_rows: int = 0

    def __post_init__(self):
        names = tuple(self.column_names)
        values = np.asarray(self.values)
        if values.ndim != 2:
            values = values.reshape(len(values), len(names))
        if values.shape[1] != len(names):
            raise DataError(
                f"{values.shape[1]} value columns for {len(names)} column names"
            )
        if len(set(names)) != len(names):
            raise DataError("duplicate column names")
        if values.size and not np.isin(values, (0, 1)).all():
            raise DataError("dataset values must be 0 or 1")
        values = values.astype(np.uint8)
        values.setflags(write=False)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.column_names.index(name)]
        except ValueError:
            raise DataError(f"dataset has no column {name!r}") from None

    def columns(self, names) -> np.ndarray:
        idx = [self._index(name) for name in names]
        return self.values[:, idx]

    def _index(self, name):
        try:
            return self.column_names.index(name)
        except ValueError:
            raise DataError(f"dataset has no column {name!r}") from None

    def take(self, rows) -> "Dataset":
        return Dataset(self.column_names, self.values[np.asarray(rows)], self.source)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.column_names == other.column_names and np.array_equal(
            self.values, other.values
        )

    def __repr__(self):
        return f"Dataset(n={self.n}, columns={list(self.column_names)})"


def read_csv(path, spec: NetworkSpec, missing_policy: str = DROP_ROW) -> Dataset:
    """Load the columns ``spec`` declares from a comma-separated file.

    Cells must be exactly ``0``, ``1`` or empty. Empty cells in a retained
    column either drop the row or raise, per ``missing_policy``. Other
    columns in the file are ignored.
    """
    if missing_policy not in MISSING_POLICIES:
        raise ValueError(f"missing_policy must be one of {MISSING_POLICIES}")
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return _parse_csv(fh, spec, missing_policy, str(path))
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc


def _parse_csv(fh, spec, missing_policy, source):
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{source}: missing header row") from None
    header = [h.strip() for h in header]
    wanted = spec.columns
    missing = [c for c in wanted if c not in header]
    if missing:
        raise DataError(f"{source}: missing required column(s): {', '.join(missing)}")
    idx = [header.index(c) for c in wanted]

    rows = []
    dropped = 0
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(header):
            raise DataError(
                f"{source}:{lineno}: expected {len(header)} fields, got {len(record)}"
            )
        row = []
        for col, i in zip(wanted, idx):
            cell = record[i]
            if cell == "0":
                row.append(0)
            elif cell == "1":
                row.append(1)
            elif cell == "":
                if missing_policy == FAIL:
                    raise DataError(f"{source}:{lineno}: missing value in column {col}")
                row = None
                break
            else:
                raise DataError(
                    f"{source}:{lineno}: non-binary value {cell!r} in column {col}"
                )
        if row is None:
            dropped += 1
        else:
            rows.append(row)
    if dropped:
        log.info("%s: dropped %d row(s) with missing values", source, dropped)
    values = np.array(rows, dtype=np.uint8).reshape(len(rows), len(wanted))
    return Dataset(wanted, values, source=source, dropped_rows=dropped)


def write_csv(data: Dataset, path) -> None:
    buf = io.StringIO()
    buf.write(",".join(data.column_names) + "\n")
    # rows are 0/1 only, so a join is exact and much faster than csv.writer
    lines = (",".join(row) for row in data.values.astype(str))
    for line in lines:
        buf.write(line + "\n")
    try:
        Path(path).write_bytes(buf.getvalue().encode("utf-8"))
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


@dataclass(frozen=True)
class Scenario:
    """Fixed values for one query setting.

    Covariates and factors condition every equation. ``symptom_values`` and
    ``disease_conditions`` are optional evidence; symptoms left unset are
    marginalised by generative queries.
    """

    covariate_values: dict[str, int] = field(default_factory=dict)
    factor_values: dict[str, int] = field(default_factory=dict)
    symptom_values: dict[str, int] = field(default_factory=dict)
    disease_conditions: dict[str, int] = field(default_factory=dict)

    @property
    def inputs(self) -> dict[str, int]:
        """Covariate and factor values merged into one mapping."""
        return {**self.covariate_values, **self.factor_values}

    def validate(self, spec: NetworkSpec, require_inputs: bool = False) -> "Scenario":
        groups = (
            ("covariates", self.covariate_values, spec.covariates),
            ("factors", self.factor_values, spec.factors),
            ("symptoms", self.symptom_values, spec.symptoms),
            ("diseases", self.disease_conditions, spec.diseases),
        )
        for label, values, declared in groups:
            for name, value in values.items():
                if name not in declared:
                    raise DataError(f"scenario {label}: unknown variable {name!r}")
                if isinstance(value, bool) or value not in (0, 1):
                    raise DataError(
                        f"scenario {label}: value of {name!r} must be 0 or 1, got {value!r}"
                    )
        if require_inputs:
            unset = [c for c in spec.covariates + spec.factors if c not in self.inputs]
            if unset:
                raise DataError(f"scenario leaves {', '.join(unset)} unset")
        return self


def scenario_from_dict(doc: Mapping) -> tuple[str, Scenario]:
    allowed = {"name", "covariates", "factors", "symptoms", "diseases"}
    if not isinstance(doc, dict):
        raise DataError("each scenario must be a JSON object")
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise DataError(f"unknown scenario key(s): {', '.join(unknown)}")
    if not isinstance(doc.get("name"), str):
        raise DataError("scenario requires a string 'name'")
    parts = {}
    for key in ("covariates", "factors", "symptoms", "diseases"):
        value = doc.get(key, {})
        if not isinstance(value, dict):
            raise DataError(f"scenario {doc['name']}: {key!r} must be an object")
        parts[key] = dict(value)
    scenario = Scenario(
        covariate_values=parts["covariates"],
        factor_values=parts["factors"],
        symptom_values=parts["symptoms"],
        disease_conditions=parts["diseases"],
    )
    return doc["name"], scenario


def scenario_to_dict(name: str, scenario: Scenario) -> dict:
    doc = {
        "name": name,
        "covariates": dict(scenario.covariate_values),
        "factors": dict(scenario.factor_values),
    }
    if scenario.symptom_values:
        doc["symptoms"] = dict(scenario.symptom_values)
    if scenario.disease_conditions:
        doc["diseases"] = dict(scenario.disease_conditions)
    return doc


def read_scenarios(path, spec: NetworkSpec) -> list[tuple[str, Scenario]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot read scenarios {path}: {exc}") from exc
    if not text.strip():
        warnings.warn(f"scenario file {path} is empty", stacklevel=2)
        return []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(doc, list):
        raise DataError(f"{path}: scenario file must hold a JSON array")
    if not doc:
        warnings.warn(f"scenario file {path} is empty", stacklevel=2)
    out = []
    for item in doc:
        name, scenario = scenario_from_dict(item)
        out.append((name, scenario.validate(spec)))
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise DataError(f"{path}: duplicate scenario names")
    return out


def write_scenarios(scenarios, path) -> None:
    doc = [scenario_to_dict(name, sc) for name, sc in scenarios]
    _write_json(doc, path)


def read_params(path) -> tuple[str, dict[str, dict[str, float]]]:
    """Read a parameter document; returns ``(variant, equations)``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot read parameters {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return params_from_dict(doc)


def params_from_dict(doc) -> tuple[str, dict[str, dict[str, float]]]:
    if not isinstance(doc, dict) or set(doc) != {"variant", "equations"}:
        raise DataError("parameter document must be {variant, equations}")
    variant = doc["variant"]
    if variant not in ("generative", "misspecified"):
        raise DataError(f"unknown parameter variant {variant!r}")
    equations = doc["equations"]
    if not isinstance(equations, dict):
        raise DataError("'equations' must be an object")
    out = {}
    for name, terms in equations.items():
        if not isinstance(terms, dict):
            raise DataError(f"equation {name!r} must map term names to numbers")
        for term, value in terms.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise DataError(f"{name}.{term}: coefficient must be a number")
        out[name] = {term: float(v) for term, v in terms.items()}
    return variant, out


def params_to_dict(variant: str, equations: Mapping[str, Mapping[str, float]]) -> dict:
    return {
        "variant": variant,
        "equations": {eq: dict(terms) for eq, terms in equations.items()},
    }


def write_params(variant: str, equations, path) -> None:
    _write_json(params_to_dict(variant, equations), path)


def _write_json(doc, path) -> None:
    try:
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
