"""Per-equation fitting shared by both model variants."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import glm
from .errors import ComorbnetError, FitError, ModelError, SpecError
from .network import NetworkSpec, design_columns

WEIGHTING_POLICIES = (glm.NONE, glm.RARE_EVENT)


@dataclass(frozen=True, eq=False)
class EquationData:
    name: str
    X: glm.DesignMatrix
    y: np.ndarray


def equation_data(spec, data, equation, variant, parents=None) -> EquationData:
    columns = design_columns(spec, equation, variant, parents)
    X = glm.DesignMatrix.from_dataset(data, columns)
    return EquationData(equation, X, data.column(equation).astype(float))


def check_policy(spec: NetworkSpec, diseases, policy: str) -> None:
    """Fail before any fitting if rare-event weighting lacks a tau."""
    if policy not in WEIGHTING_POLICIES:
        raise ValueError(f"weighting policy must be one of {WEIGHTING_POLICIES}, got {policy!r}")
    if policy == glm.RARE_EVENT:
        missing = [d for d in diseases if not spec.tau or d not in spec.tau]
        if missing:
            raise SpecError(
                f"rare-event weighting needs tau for: {', '.join(missing)}"
            )


def weighting_for(spec: NetworkSpec, disease: str, policy: str, y) -> glm.Weighting:
    if policy == glm.NONE:
        return glm.UNWEIGHTED
    return glm.rare_event_weights(spec.tau[disease], y)


def fit_equations(jobs, opts=None) -> dict[str, glm.EquationParams]:
    """Fit ``(EquationData, Weighting-or-callable)`` jobs; aggregate every failure.

    A callable weighting receives the response vector, so weights that fail
    on degenerate data are reported per equation like fit errors.
    """
    out = {}
    failures = {}
    for eq, weighting in jobs:
        try:
            w = weighting(eq.y) if callable(weighting) else weighting
            out[eq.name] = glm.fit(eq.X, eq.y, w, opts)
        except (ComorbnetError, ValueError) as exc:
            failures[eq.name] = exc
    if failures:
        raise FitError(failures)
    return out


def check_equation(name, params: glm.EquationParams, columns) -> glm.EquationParams:
    """Return ``params`` with coefficients reordered to ``columns``, or raise."""
    if set(params.coefficients) != set(columns):
        extra = sorted(set(params.coefficients) - set(columns))
        missing = [c for c in columns if c not in params.coefficients]
        raise ModelError(
            f"equation {name}: missing terms {missing}, unexpected terms {extra}"
        )
    coefs = {c: params.coefficients[c] for c in columns}
    if list(coefs) == list(params.coefficients):
        return params
    return glm.EquationParams(
        coefs, params.converged, params.iterations, params.final_nll, params.nll_history
    )


def as_params(value) -> glm.EquationParams:
    if isinstance(value, glm.EquationParams):
        return value
    return glm.EquationParams(dict(value))

