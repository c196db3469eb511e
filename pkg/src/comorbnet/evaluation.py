"""ROC/AUC evaluation of per-disease fits under resampling.

Three schemes are supported, each with or without rare-event weighting:

* in-sample: fit on all rows, score all rows;
* bootstrap: fit on a with-replacement resample of size n, score all rows;
* jackknife: repeated random holdout; fit on the remaining rows, score the
  holdout. With ``folds=k`` a single shuffled k-fold partition is used
  instead.

Column names follow the usual table layout: ``weight``, ``boot+weight``,
``boot``, ``jackkn+weight``, ``jackkn`` (and ``plain`` for the unweighted
in-sample fit).
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import glm
from .data_io import Dataset
from .errors import ComorbnetError, DataError, DataIOError
from .fitting import EquationData, check_policy, equation_data
from .network import MISSPECIFIED, NetworkSpec, validate_dag

IN_SAMPLE = "in-sample"
BOOTSTRAP = "bootstrap"
JACKKNIFE = "jackknife"

METHODS = {
    "plain": (IN_SAMPLE, glm.NONE),
    "weight": (IN_SAMPLE, glm.RARE_EVENT),
    "boot": (BOOTSTRAP, glm.NONE),
    "boot+weight": (BOOTSTRAP, glm.RARE_EVENT),
    "jackkn": (JACKKNIFE, glm.NONE),
    "jackkn+weight": (JACKKNIFE, glm.RARE_EVENT),
}
DEFAULT_METHODS = ("weight", "boot+weight", "boot", "jackkn+weight", "jackkn")

_SCHEME_STREAM = {IN_SAMPLE: 0, BOOTSTRAP: 1, JACKKNIFE: 2}


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def to_csv(self) -> str:
        lines = ["threshold,fpr,tpr"]
        for t, f, p in zip(self.thresholds.tolist(), self.fpr.tolist(), self.tpr.tolist()):
            lines.append(f"{t!r},{f!r},{p!r}")
        return "\n".join(lines) + "\n"


def _check_scores(scores, labels):
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.size} scores for {labels.size} labels")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    pos = int(np.sum(labels == 1))
    if pos == 0 or pos == labels.size:
        raise DataError("ROC needs at least one positive and one negative label")
    return scores, labels.astype(np.int64), pos, labels.size - pos


def roc(scores, labels) -> RocCurve:
    """ROC curve with one step per distinct score, scanned from high to low."""
    scores, labels, pos, neg = _check_scores(scores, labels)
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    lab = labels[order]
    last_of_group = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tps = np.r_[0, np.cumsum(lab)[last_of_group]]
    fps = np.r_[0, last_of_group + 1 - tps[1:]]
    # trapezoid area in integer counts, normalised once
    area2 = int(np.sum(np.diff(fps) * (tps[1:] + tps[:-1])))
    return RocCurve(
        fpr=fps / neg,
        tpr=tps / pos,
        thresholds=np.r_[np.inf, s[last_of_group]],
        auc=area2 / (2.0 * pos * neg),
    )


def auc_mann_whitney(scores, labels) -> float:
    """AUC as the fraction of concordant positive/negative pairs, ties counting half.

    Direct pairwise count, independent of any sorting.
    """
    scores, labels, pos, neg = _check_scores(scores, labels)
    p = scores[labels == 1]
    q = scores[labels == 0]
    greater = ties = 0
    chunk = max(1, 2_000_000 // max(q.size, 1))
    for start in range(0, p.size, chunk):
        block = p[start:start + chunk, None]
        greater += int(np.sum(block > q[None, :]))
        ties += int(np.sum(block == q[None, :]))
    return (greater + 0.5 * ties) / (pos * neg)


@dataclass(frozen=True, eq=False)
class ReplicateResult:
    index: int
    train_index: np.ndarray = field(repr=False)
    test_index: np.ndarray = field(repr=False)
    params: glm.EquationParams | None = None
    curve: RocCurve | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def auc(self) -> float:
        return self.curve.auc if self.curve is not None else float("nan")


def _equation(spec, data, equation) -> EquationData:
    if equation not in spec.diseases:
        raise DataError(f"unknown disease equation {equation!r}")
    return equation_data(spec, data, equation, MISSPECIFIED)


def evaluate_split(
    spec: NetworkSpec,
    eq: EquationData,
    weighting: str,
    train_index,
    test_index,
    index: int = 0,
    opts: glm.FitOptions | None = None,
) -> ReplicateResult:
    """Fit on ``train_index`` rows and compute the ROC on ``test_index`` rows.

    Failures (degenerate labels, non-convergence, singular Hessian) are
    captured in ``error`` rather than raised.
    """
    train_index = np.asarray(train_index)
    test_index = np.asarray(test_index)
    try:
        y_train = eq.y[train_index]
        if weighting == glm.RARE_EVENT:
            w = glm.rare_event_weights(spec.tau[eq.name], y_train)
        else:
            w = glm.UNWEIGHTED
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            params = glm.fit(eq.X.take(train_index), y_train, w, opts)
        if not params.converged:
            detail = "; ".join(str(c.message) for c in caught) or "no convergence"
            return ReplicateResult(index, train_index, test_index, params, None, detail)
        theta = params.vector(eq.X.columns)
        scores = glm.sigmoid(eq.X.values[test_index] @ theta)
        curve = roc(scores, eq.y[test_index])
    except (ComorbnetError, ValueError) as exc:
        return ReplicateResult(index, train_index, test_index, None, None, str(exc))
    return ReplicateResult(index, train_index, test_index, params, curve)


def _stream(seed: int, scheme: str, replicate: int) -> np.random.Generator:
    return np.random.default_rng([seed, _SCHEME_STREAM[scheme], replicate])


def in_sample_eval(spec, data, equation, weighting=glm.NONE, opts=None) -> list[ReplicateResult]:
    check_policy(spec, [equation], weighting)
    eq = _equation(spec, data, equation)
    everything = np.arange(data.n)
    return [evaluate_split(spec, eq, weighting, everything, everything, 0, opts)]


def bootstrap_eval(
    spec: NetworkSpec,
    data: Dataset,
    equation: str,
    weighting: str = glm.NONE,
    replicates: int = 20,
    seed: int = 0,
    opts: glm.FitOptions | None = None,
) -> list[ReplicateResult]:
    """Fit on ``replicates`` bootstrap resamples; score the full sample each time."""
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    check_policy(spec, [equation], weighting)
    eq = _equation(spec, data, equation)
    n = data.n
    everything = np.arange(n)
    out = []
    for r in range(replicates):
        train = _stream(seed, BOOTSTRAP, r).integers(0, n, size=n)
        out.append(evaluate_split(spec, eq, weighting, train, everything, r, opts))
    return out


def holdout_size(n: int, fraction: float) -> int:
    return int(math.floor(n * fraction + 0.5))


def jackknife_eval(
    spec: NetworkSpec,
    data: Dataset,
    equation: str,
    weighting: str = glm.NONE,
    holdout_fraction: float = 0.10,
    repeats: int = 20,
    seed: int = 0,
    folds: int | None = None,
    opts: glm.FitOptions | None = None,
) -> list[ReplicateResult]:
    """Repeated random holdout, or one shuffled k-fold pass when ``folds`` is set."""
    check_policy(spec, [equation], weighting)
    eq = _equation(spec, data, equation)
    n = data.n
    out = []
    if folds is not None:
        if not 2 <= folds <= n:
            raise ValueError(f"folds must be between 2 and n, got {folds}")
        perm = _stream(seed, JACKKNIFE, 0).permutation(n)
        for r, test in enumerate(np.array_split(perm, folds)):
            train = np.setdiff1d(perm, test)
            out.append(evaluate_split(spec, eq, weighting, train, np.sort(test), r, opts))
        return out
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    if not 0.0 < holdout_fraction < 1.0 or n * holdout_fraction < 10:
        raise ValueError(
            f"holdout fraction {holdout_fraction} of {n} rows leaves fewer than 10 test rows"
        )
    k = holdout_size(n, holdout_fraction)
    for r in range(repeats):
        perm = _stream(seed, JACKKNIFE, r).permutation(n)
        test, train = np.sort(perm[:k]), np.sort(perm[k:])
        out.append(evaluate_split(spec, eq, weighting, train, test, r, opts))
    return out


@dataclass(frozen=True, eq=False)
class EvalCell:
    equation: str
    method: str
    results: tuple[ReplicateResult, ...] = field(repr=False)

    @property
    def aucs(self) -> list[float]:
        return [r.auc for r in self.results if r.ok]

    @property
    def failures(self) -> list[ReplicateResult]:
        return [r for r in self.results if not r.ok]

    @property
    def mean(self) -> float:
        aucs = self.aucs
        return math.fsum(aucs) / len(aucs) if aucs else float("nan")


@dataclass(frozen=True, eq=False)
class EvalReport:
    equations: tuple[str, ...]
    methods: tuple[str, ...]
    cells: dict[tuple[str, str], EvalCell]
    replicates: int
    seed: int

    def cell(self, equation: str, method: str) -> EvalCell:
        return self.cells[(equation, method)]

    def table_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["logit", *self.methods])
        for eq in self.equations:
            writer.writerow([eq, *(repr(self.cell(eq, m).mean) for m in self.methods)])
        return buf.getvalue()

    def format_text(self) -> str:
        width = max(len(m) for m in self.methods) + 1
        lines = ["logit ".ljust(8) + "".join(m.rjust(width + 1) for m in self.methods)]
        for eq in self.equations:
            lines.append(
                eq.ljust(8)
                + "".join(f"{self.cell(eq, m).mean:.4f}".rjust(width + 1) for m in self.methods)
            )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        out = {
            "seed": self.seed,
            "replicates": self.replicates,
            "methods": list(self.methods),
            "equations": {},
        }
        for eq in self.equations:
            out["equations"][eq] = {}
            for m in self.methods:
                cell = self.cell(eq, m)
                out["equations"][eq][m] = {
                    "scheme": METHODS[m][0],
                    "weighting": METHODS[m][1],
                    "aucs": cell.aucs,
                    "mean": cell.mean if cell.aucs else None,
                    "n_ok": len(cell.aucs),
                    "n_failed": len(cell.failures),
                    "failures": [{"replicate": r.index, "error": r.error} for r in cell.failures],
                }
        return out

    def write(self, out_dir, roc_curves: bool = True) -> None:
        """Write ``auc_table.csv``, ``report.json`` and per-replicate ROC files under ``roc/``."""
        out = Path(out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "auc_table.csv").write_text(self.table_csv(), encoding="utf-8")
            (out / "report.json").write_text(
                json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
            )
            if roc_curves:
                roc_dir = out / "roc"
                roc_dir.mkdir(exist_ok=True)
                for (eq, m), cell in self.cells.items():
                    for r in cell.results:
                        if r.curve is not None:
                            path = roc_dir / f"{eq}_{m}_{r.index:02d}.csv"
                            path.write_text(r.curve.to_csv(), encoding="utf-8")
        except OSError as exc:
            raise DataIOError(f"cannot write evaluation output to {out}: {exc}") from exc


def default_equations(spec: NetworkSpec) -> list[str]:
    """Diseases with at least one symptom input; those are the diagnostic equations."""
    parents = validate_dag(spec)
    return [d for d in spec.diseases if parents.symptom_inputs_mis[d]]


def eval_report(
    spec: NetworkSpec,
    data: Dataset,
    methods: Sequence[str] = DEFAULT_METHODS,
    replicates: int = 20,
    seed: int = 0,
    holdout_fraction: float = 0.10,
    folds: int | None = None,
    equations: Sequence[str] | None = None,
    opts: glm.FitOptions | None = None,
) -> EvalReport:
    """Run every (equation, method) cell of the evaluation grid.

    Bootstrap and jackknife cells use ``replicates`` resamples each. Within
    a scheme, weighted and unweighted cells share the same resamples.
    Failed replicates are kept in the cell and excluded from its mean.
    """
    methods = tuple(methods)
    if not methods:
        raise ValueError("at least one evaluation method is required")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown method(s) {unknown}; expected some of {list(METHODS)}")
    equations = tuple(default_equations(spec) if equations is None else equations)
    if any(METHODS[m][1] == glm.RARE_EVENT for m in methods):
        check_policy(spec, equations, glm.RARE_EVENT)
    cells = {}
    for eq in equations:
        for m in methods:
            scheme, weighting = METHODS[m]
            if scheme == IN_SAMPLE:
                results = in_sample_eval(spec, data, eq, weighting, opts)
            elif scheme == BOOTSTRAP:
                results = bootstrap_eval(spec, data, eq, weighting, replicates, seed, opts)
            else:
                results = jackknife_eval(
                    spec, data, eq, weighting, holdout_fraction, replicates, seed, folds, opts
                )
            cells[(eq, m)] = EvalCell(eq, m, tuple(results))
    return EvalReport(equations, methods, cells, replicates, seed)
