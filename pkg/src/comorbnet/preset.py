"""ECAP allergy network preset.

Diseases: Y1 atopic asthma, Y2 intermittent allergic rhinitis, Y3 chronic
allergic rhinitis, Y4 allergic dermatitis, Y5 food allergy.
Symptoms: S1 wheezing, S2 sneezing / runny nose without a cold, S3 eczema.
Factors F1..F5: allergy in mother, father, siblings, maternal and paternal
grandparents. Covariates: X1 age 13-14, X2 adult (reference: age 6-7),
X3 urban area, X4 male.

Reference coefficients exist for the Y1..Y4 misspecified equations only;
the food-allergy marginal P(Y5) has none, so Y5 carries no equation.
Weighted coefficients are stored verbatim, including values that look
inconsistent with the unweighted fit.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .data_io import Scenario, write_params, write_scenarios
from .misspec import MisspecifiedModel
from .network import NetworkSpec, dump_spec, validate_dag

DISEASES = ("Y1", "Y2", "Y3", "Y4", "Y5")
SYMPTOMS = ("S1", "S2", "S3")
FACTORS = ("F1", "F2", "F3", "F4", "F5")
COVARIATES = ("X1", "X2", "X3", "X4")

DISEASE_EDGES = (
    ("Y2", "Y1"),
    ("Y3", "Y1"),
    ("Y4", "Y1"),
    ("Y4", "Y2"),
    ("Y4", "Y3"),
    ("Y5", "Y4"),
)
SYMPTOM_EDGES = (("Y1", "S1"), ("Y2", "S2"), ("Y3", "S2"), ("Y4", "S3"))

TAU = {"Y1": 0.11, "Y2": 0.20, "Y3": 0.04, "Y4": 0.07, "Y5": 0.10}

_BLOCK_TERMS = ("intercept",) + COVARIATES + FACTORS


def _equations(block, extra):
    out = {}
    for disease, values in block.items():
        coefs = dict(zip(_BLOCK_TERMS, values))
        coefs.update(extra[disease])
        out[disease] = coefs
    return out


# intercept, X1..X4, F1..F5
_PLAIN_BLOCK = {
    "Y1": (-5.933, 0.355, 0.216, -0.336, 0.412, -0.075, -0.108, 0.194, 0.029, 0.736),
    "Y2": (-4.000, 0.287, 0.364, -0.384, -0.038, -0.045, 0.284, 0.313, 0.090, -0.135),
    "Y3": (-4.741, 0.335, 0.271, -0.004, 0.334, 0.055, 0.186, -0.039, -0.144, -0.022),
    "Y4": (-6.073, 0.195, -0.623, 0.395, -0.103, 0.331, 0.220, 0.061, -0.380, 0.470),
}
_PLAIN_LINKS = {
    "Y1": {"S1": 1.412, "Y2": 1.265, "Y3": 2.040, "Y4": 0.713},
    "Y2": {"S2": 1.379, "Y4": 0.143},
    "Y3": {"S2": 1.628, "Y4": 0.496},
    "Y4": {"S3": 1.780, "Y5": 1.132},
}
_WEIGHTED_BLOCK = {
    "Y1": (-5.053, 0.356, 0.206, -0.349, 0.447, -0.039, -0.092, 0.181, 0.024, 0.737),
    "Y2": (-3.544, 0.289, 0.355, -0.377, -0.042, -0.041, 0.285, 0.310, 0.088, -0.154),
    "Y3": (-6.212, 0.319, 0.263, 0.024, 0.341, 0.061, 0.186, -0.042, -0.163, 0.001),
    "Y4": (-3.301, 0.139, -0.646, 0.278, -0.104, 0.414, 0.322, -0.009, -0.480, 0.409),
}
_WEIGHTED_LINKS = {
    "Y1": {"S1": 1.392, "Y2": 1.392, "Y3": 2.085, "Y4": 0.753},
    "Y2": {"S2": 1.377, "Y4": 0.140},
    "Y3": {"S2": 1.628, "Y4": 0.450},
    "Y4": {"S3": 1.800, "Y5": 1.302},
}
# standard errors of the unweighted fit; Y3/F3 is stored verbatim as 10.110
_SE_BLOCK = {
    "Y1": (0.350, 0.197, 0.190, 0.219, 0.149, 0.206, 0.228, 0.180, 0.304, 0.304),
    "Y2": (0.212, 0.121, 0.113, 0.133, 0.088, 0.123, 0.134, 0.107, 0.184, 0.239),
    "Y3": (0.223, 0.116, 0.110, 0.142, 0.086, 0.117, 0.130, 10.110, 0.185, 0.224),
    "Y4": (0.393, 0.145, 0.163, 0.244, 0.127, 0.150, 0.169, 0.151, 0.243, 0.260),
}
_SE_LINKS = {
    "Y1": {"S1": 0.151, "Y2": 0.184, "Y3": 0.158, "Y4": 0.222},
    "Y2": {"S2": 0.096, "Y4": 0.164},
    "Y3": {"S2": 0.096, "Y4": 0.148},
    "Y4": {"S3": 0.167, "Y5": 0.147},
}

PLAIN_PARAMS = _equations(_PLAIN_BLOCK, _PLAIN_LINKS)
WEIGHTED_PARAMS = _equations(_WEIGHTED_BLOCK, _WEIGHTED_LINKS)
PLAIN_STANDARD_ERRORS = _equations(_SE_BLOCK, _SE_LINKS)


def _case(urban, family, symptoms):
    return Scenario(
        covariate_values={"X1": 1, "X2": 0, "X3": urban, "X4": 1},
        factor_values=dict.fromkeys(FACTORS, family),
        symptom_values=dict.fromkeys(SYMPTOMS, symptoms),
    )


# all cases: children 13-14 (X1=1, X2=0), male (X4=1)
SCENARIOS = (
    ("case1", _case(urban=0, family=0, symptoms=0)),
    ("case2", _case(urban=0, family=0, symptoms=1)),
    ("case3", _case(urban=1, family=0, symptoms=1)),
    ("case4", _case(urban=1, family=0, symptoms=0)),
    ("case5", _case(urban=1, family=1, symptoms=1)),
)


def ecap_spec() -> NetworkSpec:
    return NetworkSpec(
        diseases=DISEASES,
        symptoms=SYMPTOMS,
        factors=FACTORS,
        covariates=COVARIATES,
        disease_edges=DISEASE_EDGES,
        symptom_edges=SYMPTOM_EDGES,
        tau=TAU,
    )


@dataclass(frozen=True)
class PresetBundle:
    spec: NetworkSpec
    params_plain: MisspecifiedModel
    params_weighted: MisspecifiedModel
    standard_errors_plain: dict[str, dict[str, float]]
    tau: dict[str, float]
    scenarios: tuple[tuple[str, Scenario], ...]


def ecap_preset() -> PresetBundle:
    spec = ecap_spec()
    return PresetBundle(
        spec=spec,
        params_plain=MisspecifiedModel.from_equations(spec, PLAIN_PARAMS),
        params_weighted=MisspecifiedModel.from_equations(spec, WEIGHTED_PARAMS),
        standard_errors_plain={k: dict(v) for k, v in PLAIN_STANDARD_ERRORS.items()},
        tau=dict(TAU),
        scenarios=SCENARIOS,
    )


PRESETS = {"ecap-allergy": ecap_preset}

_README = """\
ECAP allergy network preset
===========================

Files
-----
spec.json              network structure and population fractions tau
params_plain.json      unweighted misspecified-model coefficients, Y1..Y4
params_weighted.json   rare-event weighted coefficients, Y1..Y4 (verbatim)
se_plain.json          standard errors of the unweighted coefficients
scenarios.json         the five covariate scenarios case1..case5

Variables
---------
Y1 atopic asthma, Y2 intermittent allergic rhinitis, Y3 chronic allergic
rhinitis, Y4 allergic dermatitis, Y5 food allergy.
S1 wheezing or whistling in the chest (last 12 months), S2 sneezing or
runny/blocked nose without a cold, S3 eczema or other skin allergy.
F1..F5 allergy in the family: mother, father, siblings, grandparents on the
mother's side, grandparents on the father's side.
X1 age 13-14, X2 adult 20-44 (reference group: age 6-7), X3 urban area,
X4 male.

Scenario coding
---------------
Every case is a 13-14 year old boy: X1=1, X2=0, X4=1.
Rural means X3=0, urban X3=1. "Without family history" sets F1..F5=0,
"with" sets them all to 1. Symptoms are all 0 or all 1.

  case1  rural, no family history, no symptoms
  case2  rural, no family history, all symptoms
  case3  urban, no family history, all symptoms
  case4  urban, no family history, no symptoms
  case5  urban, family history,    all symptoms

Notes
-----
There are no reference coefficients for the Y5 equation, so the parameter
files cover Y1..Y4 only. The weighted coefficients and the standard error
of Y3/F3 (10.110) are stored verbatim.
"""


def write_preset(name: str, out_dir) -> list[Path]:
    """Write the named preset's files into ``out_dir``; returns the paths written."""
    try:
        bundle = PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
    validate_dag(bundle.spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "spec": out / "spec.json",
        "plain": out / "params_plain.json",
        "weighted": out / "params_weighted.json",
        "se": out / "se_plain.json",
        "scenarios": out / "scenarios.json",
        "readme": out / "README.md",
    }
    paths["spec"].write_text(dump_spec(bundle.spec), encoding="utf-8")
    write_params("misspecified", bundle.params_plain.coefficient_table(), paths["plain"])
    write_params("misspecified", bundle.params_weighted.coefficient_table(), paths["weighted"])
    write_params("misspecified", bundle.standard_errors_plain, paths["se"])
    write_scenarios(bundle.scenarios, paths["scenarios"])
    paths["readme"].write_text(_README, encoding="utf-8")
    return list(paths.values())
