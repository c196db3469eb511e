import math

import numpy as np
import pytest

from comorbnet.data_io import Scenario
from comorbnet.generative import GenerativeModel
from comorbnet.network import (
    GENERATIVE_DISEASE,
    GENERATIVE_SYMPTOM,
    NetworkSpec,
    design_columns,
    validate_dag,
)
from comorbnet.preset import PLAIN_PARAMS, ecap_preset, ecap_spec

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def preset():
    return ecap_preset()


@pytest.fixture(scope="session")
def spec():
    return ecap_spec()


def reference_generative(spec=None, symptom_intercept=-1.0, symptom_slope=1.5, disease_shift=0.0):
    """ECAP-shaped generative model for tests.

    Disease equations take the reference unweighted coefficients without
    their symptom terms. Y5 gets intercept logit(0.10); symptom equations
    are synthetic. ``disease_shift`` is added to the other disease
    intercepts; 2.0 brings their prevalences to a few percent or more.
    """
    spec = spec or ecap_spec()
    parents = validate_dag(spec)
    eqs = {}
    for d in spec.diseases:
        cols = design_columns(spec, d, GENERATIVE_DISEASE, parents)
        source = PLAIN_PARAMS.get(d, {"intercept": math.log(0.1 / 0.9)})
        eqs[d] = {c: source.get(c, 0.0) for c in cols}
        if d in PLAIN_PARAMS:
            eqs[d]["intercept"] += disease_shift
    for s in spec.symptoms:
        cols = design_columns(spec, s, GENERATIVE_SYMPTOM, parents)
        eqs[s] = {
            c: symptom_intercept if c == "intercept" else symptom_slope if c in spec.diseases else 0.0
            for c in cols
        }
    return GenerativeModel.from_equations(spec, eqs)


@pytest.fixture(scope="session")
def ecap_generative(spec):
    return reference_generative(spec)


def scenario_for(spec, rng=None, value=0):
    if rng is None:
        cov = dict.fromkeys(spec.covariates, value)
        fac = dict.fromkeys(spec.factors, value)
    else:
        cov = {c: int(rng.integers(2)) for c in spec.covariates}
        fac = {f: int(rng.integers(2)) for f in spec.factors}
    return Scenario(covariate_values=cov, factor_values=fac)


def random_spec(rng, max_vars=10, max_inputs=2):
    p = int(rng.integers(1, 6))
    m = int(rng.integers(0, max_vars - p + 1))
    diseases = [f"Y{i}" for i in range(1, p + 1)]
    symptoms = [f"S{j}" for j in range(1, m + 1)]
    factors = [f"F{k}" for k in range(1, int(rng.integers(0, max_inputs + 1)) + 1)]
    covariates = [f"X{k}" for k in range(1, int(rng.integers(0, max_inputs + 1)) + 1)]
    order = list(rng.permutation(diseases))
    edges = [
        (order[a], order[b])
        for a in range(p)
        for b in range(a + 1, p)
        if rng.random() < 0.4
    ]
    sym_edges = []
    for s in symptoms:
        k = int(rng.integers(0, min(2, p) + 1))
        for d in rng.choice(diseases, size=k, replace=False):
            sym_edges.append((str(d), s))
    return NetworkSpec(diseases, symptoms, factors, covariates, edges, sym_edges)


def random_generative(rng, spec, scale=1.5):
    parents = validate_dag(spec)
    eqs = {}
    for d in spec.diseases:
        cols = design_columns(spec, d, GENERATIVE_DISEASE, parents)
        eqs[d] = {c: float(rng.normal(0, scale)) for c in cols}
    for s in spec.symptoms:
        cols = design_columns(spec, s, GENERATIVE_SYMPTOM, parents)
        eqs[s] = {c: float(rng.normal(0, scale)) for c in cols}
    return GenerativeModel.from_equations(spec, eqs)


def random_logistic_instance(rng, n=200, d=None, weighted=False):
    from comorbnet import glm

    d = d or int(rng.integers(2, 9))
    X = np.column_stack([np.ones(n), rng.normal(size=(n, d - 1))])
    theta = rng.normal(0, 0.7, size=d)
    y = (rng.random(n) < glm.sigmoid(X @ theta)).astype(float)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    names = ["intercept"] + [f"z{k}" for k in range(1, d)]
    w = glm.rare_event_weights(float(rng.uniform(0.02, 0.5)), y) if weighted else glm.UNWEIGHTED
    return glm.DesignMatrix(X, names), y, w, rng.normal(0, 0.5, size=d)
