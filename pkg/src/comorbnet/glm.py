"""Binary logistic regression with optional rare-event weighting.

The objective for one equation is the weighted negative log-likelihood

    -w1 * sum_j y_j log s_j - w0 * sum_j (1 - y_j) log(1 - s_j),
    s_j = sigmoid(z_j . theta)

with ``w1 = tau / ybar`` and ``w0 = (1 - tau) / (1 - ybar)`` under
rare-event weighting and ``w1 = w0 = 1`` otherwise. It is minimised by
Newton-Raphson with step halving.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ConstantResponseError,
    ConvergenceWarning,
    SeparationWarning,
    SingularHessianError,
)
from .network import INTERCEPT

NONE = "none"
RARE_EVENT = "rare-event"

_Z95 = 1.959964


def sigmoid(x):
    """Logistic function, evaluated without overflow for any finite input."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def log_sigmoid(x):
    """log(sigmoid(x)), stable in both tails."""
    return -np.logaddexp(0.0, -np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    values: np.ndarray
    columns: tuple[str, ...]

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=float)
        columns = tuple(self.columns)
        if values.ndim != 2 or values.shape[1] != len(columns):
            raise ValueError(
                f"design values of shape {values.shape} do not match {len(columns)} columns"
            )
        if values.shape[0] < 1:
            raise ValueError("design matrix needs at least one row")
        if columns[0] != INTERCEPT or not np.all(values[:, 0] == 1.0):
            raise ValueError("first design column must be a constant intercept")
        if not np.isfinite(values).all():
            raise ValueError("design matrix has non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "columns", columns)

    @classmethod
    def from_dataset(cls, data, columns: Sequence[str]) -> "DesignMatrix":
        """Assemble a design matrix from named dataset columns; ``intercept`` is synthesised."""
        columns = list(columns)
        out = np.ones((data.n, len(columns)))
        for k, name in enumerate(columns[1:], start=1):
            out[:, k] = data.column(name)
        return cls(out, tuple(columns))

    @property
    def shape(self):
        return self.values.shape

    def take(self, rows) -> "DesignMatrix":
        return DesignMatrix(self.values[rows], self.columns)


@dataclass(frozen=True)
class Weighting:
    kind: str = NONE
    tau: float | None = None
    w1: float = 1.0
    w0: float = 1.0

    def __post_init__(self):
        if self.kind not in (NONE, RARE_EVENT):
            raise ValueError(f"unknown weighting kind {self.kind!r}")
        if self.kind == NONE and (self.w1 != 1.0 or self.w0 != 1.0):
            raise ValueError("unweighted fits require w1 = w0 = 1")
        if not (self.w1 > 0 and self.w0 > 0):
            raise ValueError("weights must be positive")

    def row_weights(self, y: np.ndarray) -> np.ndarray:
        return np.where(y == 1, self.w1, self.w0)


UNWEIGHTED = Weighting()


def rare_event_weights(tau: float, y) -> Weighting:
    """Weights correcting the sample event rate ``mean(y)`` towards ``tau``."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau={tau} is outside (0, 1)")
    y = np.asarray(y)
    ybar = float(np.mean(y)) if y.size else float("nan")
    if not 0.0 < ybar < 1.0:
        raise ConstantResponseError(
            f"sample event fraction {ybar} leaves rare-event weights undefined"
        )
    return Weighting(RARE_EVENT, tau, tau / ybar, (1.0 - tau) / (1.0 - ybar))


@dataclass(frozen=True)
class FitOptions:
    grad_tol: float = 1e-8
    max_iter: int = 100
    max_halvings: int = 30
    separation_bound: float = 15.0
    ridge: float = 1e-10


@dataclass(frozen=True)
class EquationParams:
    coefficients: dict[str, float]
    converged: bool = True
    iterations: int = 0
    final_nll: float = float("nan")
    nll_history: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(self.coefficients)

    def vector(self, columns: Sequence[str] | None = None) -> np.ndarray:
        if columns is None:
            return np.fromiter(self.coefficients.values(), float, len(self.coefficients))
        if set(columns) != set(self.coefficients) or len(columns) != len(self.coefficients):
            raise ValueError(
                f"coefficients {sorted(self.coefficients)} do not match columns {sorted(columns)}"
            )
        return np.array([self.coefficients[c] for c in columns], dtype=float)

    def linear_predictor(self, values: Mapping[str, float]) -> float:
        """Intercept plus coefficient-weighted ``values``; every term must be present."""
        eta = 0.0
        for term, coef in self.coefficients.items():
            if term == INTERCEPT:
                eta += coef
            else:
                try:
                    eta += coef * values[term]
                except KeyError:
                    raise KeyError(term) from None
        return eta

    @classmethod
    def from_vector(cls, columns, theta, **kw) -> "EquationParams":
        return cls(dict(zip(columns, (float(t) for t in theta))), **kw)


def _check(X, y, theta=None):
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ValueError(f"response length {y.shape} does not match {X.shape[0]} design rows")
    if theta is not None and theta.shape != (X.shape[1],):
        raise ValueError(f"{theta.shape[0]} coefficients for {X.shape[1]} design columns")
    return y.astype(float)


def _theta(params, X: DesignMatrix) -> np.ndarray:
    if isinstance(params, EquationParams):
        return params.vector(X.columns)
    return np.asarray(params, dtype=float)


def weighted_nll(params, X: DesignMatrix, y, w: Weighting = UNWEIGHTED) -> float:
    theta = _theta(params, X)
    y = _check(X, y, theta)
    eta = X.values @ theta
    kappa = w.row_weights(y)
    # -[y log s + (1-y) log(1-s)] = log(1 + e^eta) - y*eta
    return float(np.sum(kappa * (np.logaddexp(0.0, eta) - y * eta)))


def nll_gradient(params, X: DesignMatrix, y, w: Weighting = UNWEIGHTED) -> np.ndarray:
    theta = _theta(params, X)
    y = _check(X, y, theta)
    s = sigmoid(X.values @ theta)
    return X.values.T @ (w.row_weights(y) * (s - y))


def nll_hessian(params, X: DesignMatrix, y, w: Weighting = UNWEIGHTED) -> np.ndarray:
    theta = _theta(params, X)
    y = _check(X, y, theta)
    s = sigmoid(X.values @ theta)
    c = w.row_weights(y) * s * (1.0 - s)
    H = (X.values * c[:, None]).T @ X.values
    return 0.5 * (H + H.T)


def _solve_spd(H, g, ridge):
    """Solve ``H x = g`` by Cholesky, retrying once with a small ridge."""
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        warnings.warn(
            f"Hessian not positive definite; retrying with ridge {ridge:g}",
            ConvergenceWarning,
            stacklevel=3,
        )
        try:
            L = np.linalg.cholesky(H + ridge * np.eye(H.shape[0]))
        except np.linalg.LinAlgError:
            raise SingularHessianError(
                "Hessian is singular", _condition(H)
            ) from None
    return np.linalg.solve(L.T, np.linalg.solve(L, g))


def _condition(H):
    with np.errstate(all="ignore"):
        try:
            return float(np.linalg.cond(H))
        except np.linalg.LinAlgError:
            return float("inf")


def fit(
    X: DesignMatrix,
    y,
    w: Weighting = UNWEIGHTED,
    opts: FitOptions | None = None,
) -> EquationParams:
    """Maximum (weighted) likelihood fit by damped Newton-Raphson.

    Iterates until the max-norm of the gradient falls below
    ``opts.grad_tol`` or ``opts.max_iter`` accepted steps. Each full Newton
    step is halved until the objective does not increase. The fit also
    counts as converged once the Newton decrement drops below the
    floating-point resolution of the objective, since further steps cannot
    be verified. Exhausting all halvings stops the fit unconverged.

    Non-convergence is not an error: the best iterate is returned with
    ``converged=False``. When a coefficient exceeds
    ``opts.separation_bound`` before convergence the fit stops early and a
    :class:`SeparationWarning` is issued.
    """
    opts = opts or FitOptions()
    y = _check(X, y)
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("response must be binary")
    n, d = X.shape
    events = y.sum()
    if events == 0 or events == n:
        raise ConstantResponseError(
            f"response is constant ({int(events)} events in {n} rows)"
        )
    if n < d:
        warnings.warn(f"fewer rows ({n}) than coefficients ({d})", ConvergenceWarning, stacklevel=2)

    Z = X.values
    kappa = w.row_weights(y)

    def objective(theta):
        eta = Z @ theta
        return float(np.sum(kappa * (np.logaddexp(0.0, eta) - y * eta)))

    def derivatives(theta):
        s = sigmoid(Z @ theta)
        g = Z.T @ (kappa * (s - y))
        c = kappa * s * (1.0 - s)
        H = (Z * c[:, None]).T @ Z
        return g, 0.5 * (H + H.T)

    theta = np.zeros(d)
    # intercept-only MLE under the weights as starting point
    theta[0] = math.log(w.w1 * events / (w.w0 * (n - events)))
    nll = objective(theta)
    history = [nll]
    converged = False
    separated = False
    iterations = 0
    while True:
        g, H = derivatives(theta)
        if np.max(np.abs(g)) < opts.grad_tol:
            converged = True
            break
        if iterations >= opts.max_iter:
            break
        step = _solve_spd(H, g, opts.ridge)
        decrement = float(g @ step)
        if decrement <= 1e-12 * (1.0 + abs(nll)):
            # predicted gain is below the objective's rounding; polish once and stop
            candidate = theta - step
            cand_nll = objective(candidate)
            if cand_nll <= nll:
                theta, nll = candidate, cand_nll
                history.append(nll)
                iterations += 1
            converged = True
            break
        t = 1.0
        for _ in range(opts.max_halvings + 1):
            candidate = theta - t * step
            cand_nll = objective(candidate)
            if cand_nll <= nll:
                break
            t *= 0.5
        else:
            break
        theta, nll = candidate, cand_nll
        history.append(nll)
        iterations += 1
        if np.max(np.abs(theta)) > opts.separation_bound:
            g, _ = derivatives(theta)
            if np.max(np.abs(g)) >= opts.grad_tol:
                separated = True
                break

    if separated:
        big = [c for c, t in zip(X.columns, theta) if abs(t) > opts.separation_bound]
        warnings.warn(
            f"possible separation: |coefficient| > {opts.separation_bound} for {big}",
            SeparationWarning,
            stacklevel=2,
        )
    elif not converged:
        warnings.warn(
            f"no convergence after {iterations} Newton steps", ConvergenceWarning, stacklevel=2
        )
    return EquationParams.from_vector(
        X.columns,
        theta,
        converged=converged,
        iterations=iterations,
        final_nll=nll,
        nll_history=tuple(history),
    )


def z_quantile(level: float) -> float:
    """Two-sided normal critical value for a ``level`` confidence interval."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level {level} outside (0, 1)")
    if level == 0.95:
        return _Z95
    return NormalDist().inv_cdf(0.5 + level / 2.0)


def odds_ratio_ci(coef: float, se: float, level: float = 0.95) -> tuple[float, float, float]:
    """Odds ratio ``exp(coef)`` with its Wald interval on the log-odds scale."""
    z = z_quantile(level)
    return math.exp(coef), math.exp(coef - z * se), math.exp(coef + z * se)


@dataclass(frozen=True)
class InferenceStats:
    standard_errors: dict[str, float]
    odds_ratios: dict[str, tuple[float, float, float]]
    covariance: np.ndarray = field(repr=False)
    level: float = 0.95


def inference_stats(
    params: EquationParams,
    X: DesignMatrix,
    y,
    w: Weighting = UNWEIGHTED,
    level: float = 0.95,
) -> InferenceStats:
    """Inverse-Hessian standard errors, odds ratios and Wald intervals.

    Under rare-event weighting the inverse Hessian of the weighted objective
    is returned as is; it is a naive variance, not a sandwich estimate.
    """
    if not params.converged:
        raise ValueError("inference requires a converged fit")
    H = nll_hessian(params, X, y, w)
    try:
        L = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        raise SingularHessianError("Hessian at the estimate is singular", _condition(H)) from None
    Linv = np.linalg.solve(L, np.eye(H.shape[0]))
    cov = Linv.T @ Linv
    cov = 0.5 * (cov + cov.T)
    se = np.sqrt(np.diag(cov))
    theta = params.vector(X.columns)
    ses = dict(zip(X.columns, (float(s) for s in se)))
    ors = {c: odds_ratio_ci(float(t), ses[c], level) for c, t in zip(X.columns, theta)}
    return InferenceStats(ses, ors, cov, level)
