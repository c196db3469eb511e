"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 numerical failure
(non-convergence under ``--strict``), 4 capacity error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import warnings
from pathlib import Path

from . import glm
from .data_io import DROP_ROW, MISSING_POLICIES, read_csv, read_params, read_scenarios, write_csv, write_params
from .errors import ComorbnetError, DataError, DataIOError, ModelError
from .evaluation import METHODS, DEFAULT_METHODS, eval_report
from .fitting import equation_data
from .generative import GenerativeModel, exact_conditional, fit_generative, sample
from .misspec import (
    MisspecifiedModel,
    compare_models,
    default_queries,
    diagnostic_prob,
    fit_misspecified,
    read_queries,
    simulate_misspecified,
)
from .network import GENERATIVE_DISEASE, GENERATIVE_SYMPTOM, MISSPECIFIED, load_spec, validate_dag
from .preset import PRESETS, write_preset

log = logging.getLogger("comorbnet")


def _formatter(prog):
    return argparse.ArgumentDefaultsHelpFormatter(prog, max_help_position=32)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="comorbnet",
        description="Fit, simulate and query DAG-structured logistic networks of binary outcomes.",
        formatter_class=_formatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a network spec", formatter_class=_formatter)
    p.add_argument("--model", required=True, help="network spec JSON")

    p = sub.add_parser("simulate", help="draw a synthetic dataset", formatter_class=_formatter)
    p.add_argument("--model", required=True, help="network spec JSON")
    p.add_argument("--params", default=None,
                   help="parameter document; generative or misspecified (default: all-zero generative)")
    p.add_argument("--scenarios", default=None, help="scenario file fixing F and X")
    p.add_argument("--scenario", default=None, help="scenario name within --scenarios (default: first)")
    p.add_argument("--fx-prob", type=float, default=0.5,
                   help="Bernoulli probability for columns not fixed by a scenario")
    p.add_argument("--n", type=int, required=True, help="number of rows")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", required=True, help="output CSV")

    p = sub.add_parser("fit", help="estimate equation coefficients", formatter_class=_formatter)
    p.add_argument("--model", required=True, help="network spec JSON")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--mode", choices=("generative", "misspecified"), default="misspecified",
                   help="which set of equations to fit")
    p.add_argument("--weighting", choices=(glm.NONE, glm.RARE_EVENT), default=glm.NONE,
                   help="rare-event weighting of disease equations, using the network's tau")
    p.add_argument("--out", required=True, help="output parameter document; report goes to <stem>_report.csv")
    p.add_argument("--missing-policy", choices=MISSING_POLICIES, default=DROP_ROW,
                   help="what to do with rows holding empty cells")
    p.add_argument("--grad-tol", type=float, default=glm.FitOptions.grad_tol,
                   help="convergence threshold on the gradient max-norm")
    p.add_argument("--max-iter", type=int, default=glm.FitOptions.max_iter,
                   help="Newton iteration limit per equation")
    p.add_argument("--strict", action="store_true", help="exit 3 if any equation fails to converge")

    p = sub.add_parser("infer", help="diagnostic probabilities", formatter_class=_formatter)
    p.add_argument("--model", required=True, help="network spec JSON")
    p.add_argument("--params", required=True, help="parameter document")
    p.add_argument("--engine", choices=("generative-exact", "misspecified"), default="misspecified",
                   help="exact enumeration or closed-form misspecified logit")
    p.add_argument("--scenarios", required=True, help="scenario file")
    p.add_argument("--queries", default=None, help="query file (default: one query per disease with symptoms, parents at 0 and at 1)")
    p.add_argument("--out", default=None, help="output CSV (default: stdout)")

    p = sub.add_parser("compare", help="generative exact vs misspecified probabilities", formatter_class=_formatter)
    p.add_argument("--model", required=True, help="network spec JSON")
    p.add_argument("--gen-params", required=True, help="generative parameter document")
    p.add_argument("--mis-params", required=True, help="misspecified parameter document")
    p.add_argument("--scenarios", required=True, help="scenario file")
    p.add_argument("--queries", default=None, help="query file (default as for infer)")
    p.add_argument("--out", default=None, help="output CSV")

    p = sub.add_parser("evaluate", help="bootstrap/jackknife AUC evaluation", formatter_class=_formatter)
    p.add_argument("--model", required=True, help="network spec JSON")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--methods", default=",".join(DEFAULT_METHODS),
                   help=f"comma-separated columns from {', '.join(METHODS)}")
    p.add_argument("--weighting", choices=(glm.NONE, glm.RARE_EVENT, "both"), default="both",
                   help="restrict --methods to unweighted or weighted columns")
    p.add_argument("--replicates", type=int, default=20, help="bootstrap resamples / jackknife repeats")
    p.add_argument("--holdout-fraction", type=float, default=0.10, help="test share of each jackknife repeat")
    p.add_argument("--folds", type=int, default=None, help="use one k-fold pass instead of repeated holdout")
    p.add_argument("--seed", type=int, default=0, help="random seed for resampling")
    p.add_argument("--out-dir", required=True, help="directory for auc_table.csv, report.json and roc/")
    p.add_argument("--missing-policy", choices=MISSING_POLICIES, default=DROP_ROW,
                   help="what to do with rows holding empty cells")

    p = sub.add_parser("preset", help="write a bundled preset", formatter_class=_formatter)
    p.add_argument("name", choices=sorted(PRESETS), help="preset to write")
    p.add_argument("--out-dir", required=True, help="destination directory")
    return parser


def _load_model(spec, path):
    variant, equations = read_params(path)
    if variant == "generative":
        return GenerativeModel.from_equations(spec, equations)
    return MisspecifiedModel.from_equations(spec, equations)


def _pick_scenario(spec, path, name):
    scenarios = read_scenarios(path, spec)
    if not scenarios:
        raise DataError(f"{path} holds no scenarios")
    if name is None:
        return scenarios[0][1]
    for n, sc in scenarios:
        if n == name:
            return sc
    raise DataError(f"no scenario named {name!r} in {path}")


def cmd_validate(args):
    spec = load_spec(args.model)
    parents = validate_dag(spec)
    print(f"ok: {len(spec.diseases)} diseases, {len(spec.symptoms)} symptoms, "
          f"{len(spec.factors)} factors, {len(spec.covariates)} covariates")
    print("topological order: " + " ".join(parents.topo_order))
    return 0


def cmd_simulate(args):
    spec = load_spec(args.model)
    model = _load_model(spec, args.params) if args.params else GenerativeModel.zeros(spec)
    if isinstance(model, GenerativeModel):
        scenario = _pick_scenario(spec, args.scenarios, args.scenario) if args.scenarios else None
        data = sample(model, args.n, args.seed, scenario=scenario, fx_prob=args.fx_prob)
    else:
        if args.scenarios:
            raise DataError("misspecified simulation draws inputs at random; --scenarios is not supported")
        data = simulate_misspecified(model, args.n, args.seed, input_prob=args.fx_prob)
    write_csv(data, args.out)
    print(f"wrote {data.n} rows x {len(data.column_names)} columns to {args.out}")
    return 0


def _report_rows(spec, data, model, mode, weighting):
    parents = validate_dag(spec)
    if mode == "generative":
        equations = [(d, GENERATIVE_DISEASE, p) for d, p in model.disease_eqs.items()]
        equations += [(s, GENERATIVE_SYMPTOM, p) for s, p in model.symptom_eqs.items()]
    else:
        equations = [(d, MISSPECIFIED, p) for d, p in model.disease_eqs.items()]
    rows = []
    for name, variant, params in equations:
        eq = equation_data(spec, data, name, variant, parents)
        weighted = weighting == glm.RARE_EVENT and variant != GENERATIVE_SYMPTOM
        w = glm.rare_event_weights(spec.tau[name], eq.y) if weighted else glm.UNWEIGHTED
        stats = None
        if params.converged:
            try:
                stats = glm.inference_stats(params, eq.X, eq.y, w)
            except ComorbnetError as exc:
                log.warning("%s: no standard errors: %s", name, exc)
        for term, coef in params.coefficients.items():
            if stats is None:
                se = lo = hi = ""
                odds = glm.odds_ratio_ci(coef, 0.0)[0]
            else:
                se = repr(stats.standard_errors[term])
                odds, low, high = stats.odds_ratios[term]
                lo, hi = repr(low), repr(high)
            rows.append([name, term, repr(coef), se, repr(odds), lo, hi, str(params.converged).lower()])
    return rows


def cmd_fit(args):
    spec = load_spec(args.model)
    opts = glm.FitOptions(grad_tol=args.grad_tol, max_iter=args.max_iter)
    data = read_csv(args.data, spec, args.missing_policy)
    if data.dropped_rows:
        log.info("dropped %d row(s) with missing values", data.dropped_rows)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", glm.ConvergenceWarning)
        if args.mode == "generative":
            model = fit_generative(spec, data, args.weighting, opts)
            equations = model.equations
        else:
            model = fit_misspecified(spec, data, args.weighting, opts)
            equations = model.disease_eqs
    write_params(args.mode, {k: v.coefficients for k, v in equations.items()}, args.out)

    naive = args.weighting == glm.RARE_EVENT
    header = ["equation", "term", "coef", "se_naive" if naive else "se", "or",
              "ci_low_naive" if naive else "ci_low", "ci_high_naive" if naive else "ci_high",
              "converged"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(_report_rows(spec, data, model, args.mode, args.weighting))
    out = Path(args.out)
    report = out.with_name(out.stem + "_report.csv")
    try:
        report.write_text(buf.getvalue(), encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write {report}: {exc}") from exc

    failed = [k for k, v in equations.items() if not v.converged]
    for k, v in equations.items():
        status = "converged" if v.converged else "NOT converged"
        print(f"{k}: {status} after {v.iterations} iterations, nll={v.final_nll:.6f}")
    print(f"wrote {args.out} and {report}")
    if failed and args.strict:
        print(f"error: no convergence for {', '.join(failed)}", file=sys.stderr)
        return 3
    return 0


def _queries(spec, path):
    return read_queries(path) if path else default_queries(spec)


def cmd_infer(args):
    spec = load_spec(args.model)
    model = _load_model(spec, args.params)
    scenarios = read_scenarios(args.scenarios, spec)
    queries = _queries(spec, args.queries)
    if args.engine == "generative-exact" and not isinstance(model, GenerativeModel):
        raise ModelError("generative-exact engine needs a generative parameter document")
    if args.engine == "misspecified" and not isinstance(model, MisspecifiedModel):
        raise ModelError("misspecified engine needs a misspecified parameter document")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "query", "target", "probability"])
    for name, scenario in scenarios:
        for q in queries:
            condition = q.resolve(scenario)
            if args.engine == "generative-exact":
                p = exact_conditional(model, scenario, q.target, condition)
            else:
                p = diagnostic_prob(model, scenario, q.target, condition)
            writer.writerow([name, q.label, q.target, repr(p)])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_compare(args):
    spec = load_spec(args.model)
    gen_variant, gen_eqs = read_params(args.gen_params)
    mis_variant, mis_eqs = read_params(args.mis_params)
    if gen_variant != "generative" or mis_variant != "misspecified":
        raise ModelError("--gen-params must be generative and --mis-params misspecified")
    gen = GenerativeModel.from_equations(spec, gen_eqs)
    mis = MisspecifiedModel.from_equations(spec, mis_eqs)
    scenarios = read_scenarios(args.scenarios, spec)
    table = compare_models(gen, mis, scenarios, _queries(spec, args.queries))
    print(table.format_text())
    print(f"max |exact - misspecified| = {table.max_abs_diff:.6f}")
    if args.out:
        _emit(table.to_csv(), args.out)
    return 0


def cmd_evaluate(args):
    spec = load_spec(args.model)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise DataError(f"unknown method(s) {unknown}; choose from {', '.join(METHODS)}")
    if args.weighting != "both":
        methods = [m for m in methods if METHODS[m][1] == args.weighting]
    if not methods:
        raise DataError("no evaluation methods left after --weighting filter")
    data = read_csv(args.data, spec, args.missing_policy)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", glm.ConvergenceWarning)
        report = eval_report(
            spec, data, methods, replicates=args.replicates, seed=args.seed,
            holdout_fraction=args.holdout_fraction, folds=args.folds,
        )
    report.write(args.out_dir)
    print(report.format_text())
    for cell in report.cells.values():
        if cell.failures:
            print(f"{cell.equation}/{cell.method}: {len(cell.failures)} failed replicate(s)")
    return 0


def cmd_preset(args):
    for path in write_preset(args.name, args.out_dir):
        print(f"wrote {path}")
    return 0


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "infer": cmd_infer,
    "compare": cmd_compare,
    "evaluate": cmd_evaluate,
    "preset": cmd_preset,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ComorbnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
