"""Generative Bayesian network: diseases cause symptoms.

Conditionally on factors ``F`` and covariates ``X``,

    P(Y, S | F, X) = prod_i P(Y_i | Y_pa(Y_i), F, X) * prod_j P(S_j | Y_pa(S_j), F, X)

with every factor a logistic regression. Conditional ("diagnostic")
queries are answered exactly by enumerating the unobserved variables.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import glm, rng
from .data_io import Dataset, Scenario
from .errors import CapacityError, DataError, ModelError, UndefinedConditionalError
from .fitting import as_params, check_equation, check_policy, equation_data, fit_equations, weighting_for
from .network import (
    GENERATIVE_DISEASE,
    GENERATIVE_SYMPTOM,
    NetworkSpec,
    ParentSets,
    design_columns,
    validate_dag,
)

MAX_FREE_VARIABLES = 22

__all__ = [
    "GenerativeModel",
    "Scenario",
    "exact_conditional",
    "fit_generative",
    "joint_log_prob",
    "logsumexp",
    "sample",
]


@dataclass(frozen=True)
class GenerativeModel:
    spec: NetworkSpec
    parents: ParentSets
    disease_eqs: dict[str, glm.EquationParams]
    symptom_eqs: dict[str, glm.EquationParams]

    @classmethod
    def from_equations(cls, spec: NetworkSpec, equations: Mapping) -> "GenerativeModel":
        """Build from ``{equation name: EquationParams or {term: value}}``.

        Every disease and symptom needs exactly one equation whose terms match
        its generative design columns.
        """
        parents = validate_dag(spec)
        expected = set(spec.diseases) | set(spec.symptoms)
        missing = [v for v in spec.diseases + spec.symptoms if v not in equations]
        extra = sorted(set(equations) - expected)
        if missing or extra:
            raise ModelError(
                f"generative parameters: missing equations {missing}, unknown equations {extra}"
            )
        diseases = {
            d: check_equation(
                d, as_params(equations[d]), design_columns(spec, d, GENERATIVE_DISEASE, parents)
            )
            for d in spec.diseases
        }
        symptoms = {
            s: check_equation(
                s, as_params(equations[s]), design_columns(spec, s, GENERATIVE_SYMPTOM, parents)
            )
            for s in spec.symptoms
        }
        return cls(spec, parents, diseases, symptoms)

    @classmethod
    def zeros(cls, spec: NetworkSpec) -> "GenerativeModel":
        parents = validate_dag(spec)
        eqs = {
            d: dict.fromkeys(design_columns(spec, d, GENERATIVE_DISEASE, parents), 0.0)
            for d in spec.diseases
        }
        eqs.update(
            {
                s: dict.fromkeys(design_columns(spec, s, GENERATIVE_SYMPTOM, parents), 0.0)
                for s in spec.symptoms
            }
        )
        return cls.from_equations(spec, eqs)

    @property
    def equations(self) -> dict[str, glm.EquationParams]:
        return {**self.disease_eqs, **self.symptom_eqs}

    def coefficient_table(self) -> dict[str, dict[str, float]]:
        return {name: dict(eq.coefficients) for name, eq in self.equations.items()}


def logsumexp(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return float("-inf")
    m = float(np.max(x))
    if not np.isfinite(m):
        return m
    return m + float(np.log(np.sum(np.exp(x - m))))


def _inputs(spec: NetworkSpec, scenario: Scenario) -> dict[str, int]:
    scenario.validate(spec, require_inputs=True)
    return scenario.inputs


def _eta(params: glm.EquationParams, values: Mapping):
    eta = 0.0
    for term, coef in params.coefficients.items():
        eta = eta + (coef if term == "intercept" else coef * values[term])
    return eta


def _log_joint(model: GenerativeModel, values: Mapping):
    """Sum of log Bernoulli factors; ``values`` entries may be scalars or arrays."""
    total = 0.0
    for name, params in model.equations.items():
        eta = _eta(params, values)
        r = values[name]
        total = total + np.where(r == 1, glm.log_sigmoid(eta), glm.log_sigmoid(-eta))
    return total


def _check_assignment(spec, values, names, label):
    missing = [v for v in names if v not in values]
    if missing:
        raise DataError(f"{label} assignment missing {', '.join(missing)}")
    for name in names:
        if values[name] not in (0, 1):
            raise DataError(f"{label} {name} must be 0 or 1, got {values[name]!r}")


def joint_log_prob(
    model: GenerativeModel,
    y: Mapping[str, int],
    s: Mapping[str, int],
    scenario: Scenario,
) -> float:
    """log P(Y=y, S=s | F, X) for a complete disease and symptom assignment."""
    spec = model.spec
    _check_assignment(spec, y, spec.diseases, "disease")
    _check_assignment(spec, s, spec.symptoms, "symptom")
    values = {**_inputs(spec, scenario), **{k: y[k] for k in spec.diseases}}
    values.update({k: s[k] for k in spec.symptoms})
    return float(_log_joint(model, values))


def exact_conditional(
    model: GenerativeModel,
    scenario: Scenario,
    target: str,
    condition: Mapping[str, int] | None = None,
) -> float:
    """P(target = 1 | condition, F, X) by enumeration.

    Every disease or symptom absent from ``condition`` is summed out.
    Raises :class:`CapacityError` beyond ``MAX_FREE_VARIABLES`` free
    variables.
    """
    spec = model.spec
    condition = dict(condition or {})
    variables = spec.diseases + spec.symptoms
    if target not in variables:
        raise DataError(f"unknown query target {target!r}")
    if target in condition:
        raise DataError(f"query target {target!r} is also conditioned on")
    for name, value in condition.items():
        if name not in variables:
            raise DataError(f"unknown condition variable {name!r}")
        if isinstance(value, bool) or value not in (0, 1):
            raise DataError(f"condition {name} must be 0 or 1, got {value!r}")
    free = [v for v in variables if v not in condition]
    if len(free) > MAX_FREE_VARIABLES:
        raise CapacityError(
            f"network too large for exact inference: {len(free)} free variables "
            f"(limit {MAX_FREE_VARIABLES})"
        )
    values: dict = dict(_inputs(spec, scenario))
    values.update(condition)
    codes = np.arange(1 << len(free), dtype=np.int64)
    for bit, name in enumerate(free):
        values[name] = ((codes >> bit) & 1).astype(np.uint8)
    logp = np.broadcast_to(_log_joint(model, values), codes.shape)
    log_norm = logsumexp(logp)
    if not np.isfinite(log_norm):
        raise UndefinedConditionalError(
            f"conditioning event has zero probability for target {target}"
        )
    return float(np.exp(logsumexp(logp[values[target] == 1]) - log_norm))


def sample(
    model: GenerativeModel,
    n: int,
    seed: int,
    scenario: Scenario | None = None,
    fx_prob: float = 0.5,
) -> Dataset:
    """Ancestral sampling of ``n`` rows.

    With a scenario, factor and covariate columns are fixed at its values;
    otherwise each is drawn independently Bernoulli(``fx_prob``). Draws come
    from :mod:`comorbnet.rng`, keyed by (seed, row, column), so row ``i`` does
    not depend on ``n``.
    """
    spec = model.spec
    if n < 1:
        raise ValueError("n must be at least 1")
    rows = np.arange(n, dtype=np.uint64)
    slot = {name: k for k, name in enumerate(spec.columns)}
    cols: dict[str, np.ndarray] = {}
    if scenario is not None:
        for name, value in _inputs(spec, scenario).items():
            cols[name] = np.full(n, value, dtype=np.uint8)
    else:
        for name in spec.covariates + spec.factors:
            cols[name] = rng.bernoulli(seed, rows, slot[name], fx_prob)
    for d in model.parents.topo_order:
        p = glm.sigmoid(_eta(model.disease_eqs[d], cols) + np.zeros(n))
        cols[d] = rng.bernoulli(seed, rows, slot[d], p)
    for s in spec.symptoms:
        p = glm.sigmoid(_eta(model.symptom_eqs[s], cols) + np.zeros(n))
        cols[s] = rng.bernoulli(seed, rows, slot[s], p)
    values = np.column_stack([cols[c] for c in spec.columns])
    return Dataset(spec.columns, values, source=f"generative sample seed={seed}")


def fit_generative(
    spec: NetworkSpec,
    data: Dataset,
    weighting: str = glm.NONE,
    opts: glm.FitOptions | None = None,
) -> GenerativeModel:
    """Fit the p disease and m symptom equations independently.

    Rare-event weighting applies to disease equations only; symptom
    equations are always unweighted.
    """
    check_policy(spec, spec.diseases, weighting)
    parents = validate_dag(spec)
    jobs = []
    for d in spec.diseases:
        eq = equation_data(spec, data, d, GENERATIVE_DISEASE, parents)
        jobs.append((eq, lambda y, d=d: weighting_for(spec, d, weighting, y)))
    for s in spec.symptoms:
        eq = equation_data(spec, data, s, GENERATIVE_SYMPTOM, parents)
        jobs.append((eq, glm.UNWEIGHTED))
    return GenerativeModel.from_equations(spec, fit_equations(jobs, opts))
