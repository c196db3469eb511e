"""Misspecified model: symptoms point at diseases.

    P(Y | S, F, X) = prod_i P(Y_i | Y_pa(Y_i), S_pa(Y_i), F, X)

Each factor is one logistic regression, so a diagnostic probability is a
single sigmoid evaluation.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import glm, rng
from .data_io import Dataset, Scenario
from .errors import ComorbnetError, DataError, DataIOError, ModelError
from .fitting import as_params, check_equation, check_policy, equation_data, fit_equations, weighting_for
from .generative import GenerativeModel, exact_conditional
from .network import MISSPECIFIED, NetworkSpec, ParentSets, design_columns, validate_dag


@dataclass(frozen=True)
class MisspecifiedModel:
    """One logistic equation per disease.

    Parameter sets covering only a subset of diseases are accepted; using a
    disease without an equation raises :class:`ModelError`.
    """

    spec: NetworkSpec
    parents: ParentSets
    disease_eqs: dict[str, glm.EquationParams]

    @classmethod
    def from_equations(cls, spec: NetworkSpec, equations: Mapping) -> "MisspecifiedModel":
        parents = validate_dag(spec)
        unknown = sorted(set(equations) - set(spec.diseases))
        if unknown:
            raise ModelError(f"misspecified parameters name unknown diseases {unknown}")
        eqs = {
            d: check_equation(
                d, as_params(equations[d]), design_columns(spec, d, MISSPECIFIED, parents)
            )
            for d in spec.diseases
            if d in equations
        }
        return cls(spec, parents, eqs)

    @classmethod
    def zeros(cls, spec: NetworkSpec) -> "MisspecifiedModel":
        parents = validate_dag(spec)
        return cls.from_equations(
            spec,
            {d: dict.fromkeys(design_columns(spec, d, MISSPECIFIED, parents), 0.0) for d in spec.diseases},
        )

    def equation(self, disease: str) -> glm.EquationParams:
        try:
            return self.disease_eqs[disease]
        except KeyError:
            raise ModelError(f"no misspecified equation for {disease!r}") from None

    @property
    def complete(self) -> bool:
        return set(self.disease_eqs) == set(self.spec.diseases)

    def coefficient_table(self) -> dict[str, dict[str, float]]:
        return {name: dict(eq.coefficients) for name, eq in self.disease_eqs.items()}


def fit_misspecified(
    spec: NetworkSpec,
    data: Dataset,
    weighting: str = glm.NONE,
    opts: glm.FitOptions | None = None,
    diseases: Sequence[str] | None = None,
) -> MisspecifiedModel:
    """Fit one logistic regression per disease (all diseases by default)."""
    diseases = list(spec.diseases if diseases is None else diseases)
    check_policy(spec, diseases, weighting)
    parents = validate_dag(spec)
    jobs = []
    for d in diseases:
        eq = equation_data(spec, data, d, MISSPECIFIED, parents)
        jobs.append((eq, lambda y, d=d: weighting_for(spec, d, weighting, y)))
    return MisspecifiedModel.from_equations(spec, fit_equations(jobs, opts))


def diagnostic_prob(
    model: MisspecifiedModel,
    scenario: Scenario,
    target: str,
    condition: Mapping[str, int],
) -> float:
    """P(target = 1 | parents, symptom inputs, F, X) in closed form."""
    spec = model.spec
    if target not in spec.diseases:
        raise DataError(f"unknown disease {target!r}")
    params = model.equation(target)
    scenario.validate(spec, require_inputs=True)
    needed = model.parents.disease_parents[target] + model.parents.symptom_inputs_mis[target]
    missing = [v for v in needed if v not in condition]
    if missing:
        raise DataError(f"query for {target} needs values for {', '.join(missing)}")
    for name in needed:
        if isinstance(condition[name], bool) or condition[name] not in (0, 1):
            raise DataError(f"condition {name} must be 0 or 1")
    values = {**scenario.inputs, **{k: condition[k] for k in needed}}
    return float(glm.sigmoid(params.linear_predictor(values)))


def simulate_misspecified(
    model: MisspecifiedModel,
    n: int,
    seed: int,
    input_prob: float = 0.5,
) -> Dataset:
    """Draw symptoms, factors and covariates Bernoulli(``input_prob``), then diseases.

    Diseases follow the topological order, each from its equation. A disease
    without an equation is treated as an exogenous input and drawn
    Bernoulli(``input_prob``) as well.
    """
    spec = model.spec
    if n < 1:
        raise ValueError("n must be at least 1")
    rows = np.arange(n, dtype=np.uint64)
    slot = {name: k for k, name in enumerate(spec.columns)}
    cols = {
        name: rng.bernoulli(seed, rows, slot[name], input_prob)
        for name in spec.symptoms + spec.factors + spec.covariates
    }
    for d in model.parents.topo_order:
        if d in model.disease_eqs:
            eta = model.disease_eqs[d].linear_predictor(cols) + np.zeros(n)
            cols[d] = rng.bernoulli(seed, rows, slot[d], glm.sigmoid(eta))
        else:
            cols[d] = rng.bernoulli(seed, rows, slot[d], input_prob)
    values = np.column_stack([cols[c] for c in spec.columns])
    return Dataset(spec.columns, values, source=f"misspecified sample seed={seed}")


@dataclass(frozen=True)
class Query:
    """P(target = 1 | fixed values, scenario-supplied values).

    Names in ``from_scenario`` take their value from the scenario's symptom
    values or disease conditions when the query is resolved.
    """

    target: str
    fixed: dict[str, int] = field(default_factory=dict)
    from_scenario: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        parts = [f"{k}={v}" for k, v in self.fixed.items()] + list(self.from_scenario)
        return f"P({self.target}|{','.join(parts)})"

    def resolve(self, scenario: Scenario) -> dict[str, int]:
        evidence = {**scenario.disease_conditions, **scenario.symptom_values}
        missing = [v for v in self.from_scenario if v not in evidence]
        if missing:
            raise DataError(f"{self.label}: scenario does not set {', '.join(missing)}")
        return {**self.fixed, **{v: evidence[v] for v in self.from_scenario}}


def default_queries(spec: NetworkSpec, parents: ParentSets | None = None) -> list[Query]:
    """Diagnostic queries for every disease with symptom inputs.

    All such queries with parents at 0 come first, then the same queries
    with parents at 1; symptom inputs are read from the scenario.
    """
    parents = parents or validate_dag(spec)
    targets = [d for d in spec.diseases if parents.symptom_inputs_mis[d]]
    out = []
    for level in (0, 1):
        for d in targets:
            fixed = dict.fromkeys(parents.disease_parents[d], level)
            out.append(Query(d, fixed, parents.symptom_inputs_mis[d]))
    return out


def query_from_dict(doc) -> Query:
    if not isinstance(doc, dict) or "target" not in doc:
        raise DataError("each query must be an object with a 'target'")
    unknown = sorted(set(doc) - {"target", "condition", "from_scenario"})
    if unknown:
        raise DataError(f"unknown query key(s): {', '.join(unknown)}")
    return Query(doc["target"], dict(doc.get("condition", {})), tuple(doc.get("from_scenario", ())))


def read_queries(path) -> list[Query]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataIOError(f"cannot read queries {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, list):
        raise DataError(f"{path}: query file must hold a JSON array")
    return [query_from_dict(q) for q in doc]


class QueryError(ComorbnetError):
    def __init__(self, message, cause):
        super().__init__(message)
        self.exit_code = getattr(cause, "exit_code", 1)


@dataclass(frozen=True)
class ComparisonRow:
    scenario: str
    query: str
    exact: float
    misspecified: float

    @property
    def abs_diff(self) -> float:
        return abs(self.exact - self.misspecified)


@dataclass(frozen=True)
class ComparisonTable:
    rows: tuple[ComparisonRow, ...]

    HEADER = ("scenario", "query", "exact", "misspecified", "abs_diff")

    def __len__(self):
        return len(self.rows)

    @property
    def max_abs_diff(self) -> float:
        return max((r.abs_diff for r in self.rows), default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.HEADER)
        for r in self.rows:
            writer.writerow([r.scenario, r.query, repr(r.exact), repr(r.misspecified), repr(r.abs_diff)])
        return buf.getvalue()

    def format_text(self) -> str:
        width = max([len(r.query) for r in self.rows] + [5])
        lines = [f"{'scenario':<10} {'query':<{width}} {'exact':>7} {'misspec':>7} {'diff':>7}"]
        for r in self.rows:
            lines.append(
                f"{r.scenario:<10} {r.query:<{width}} {r.exact:7.3f} {r.misspecified:7.3f} {r.abs_diff:7.3f}"
            )
        return "\n".join(lines)


def compare_models(
    gen: GenerativeModel,
    mis: MisspecifiedModel,
    scenarios: Sequence[tuple[str, Scenario]],
    queries: Sequence[Query] | None = None,
) -> ComparisonTable:
    """Exact generative vs closed-form misspecified probabilities, scenario-major."""
    if gen.spec != mis.spec:
        raise ModelError("models were built for different network specs")
    if queries is None:
        queries = default_queries(gen.spec, gen.parents)
    rows = []
    for i, (name, scenario) in enumerate(scenarios):
        for j, query in enumerate(queries):
            try:
                condition = query.resolve(scenario)
                exact = exact_conditional(gen, scenario, query.target, condition)
                approx = diagnostic_prob(mis, scenario, query.target, condition)
            except ComorbnetError as exc:
                raise QueryError(
                    f"scenario {i} ({name}), query {j} ({query.label}): {exc}", exc
                ) from exc
            rows.append(ComparisonRow(name, query.label, exact, approx))
    return ComparisonTable(tuple(rows))
