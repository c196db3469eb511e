"""Network structure: diseases, symptoms, common factors and covariates.

A :class:`NetworkSpec` holds the disease DAG and the disease -> symptom
associations. Symptom edges are stored only in the generative (causal)
direction; the misspecified model's symptom -> disease inputs are derived
from them by reversal.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CycleError, DataIOError, SpecError

INTERCEPT = "intercept"

GENERATIVE_DISEASE = "generative-disease"
GENERATIVE_SYMPTOM = "generative-symptom"
MISSPECIFIED = "misspecified"
VARIANTS = (GENERATIVE_DISEASE, GENERATIVE_SYMPTOM, MISSPECIFIED)

_SPEC_KEYS = (
    "diseases",
    "symptoms",
    "factors",
    "covariates",
    "disease_edges",
    "symptom_edges",
    "tau",
)


@dataclass(frozen=True)
class NetworkSpec:
    diseases: tuple[str, ...]
    symptoms: tuple[str, ...] = ()
    factors: tuple[str, ...] = ()
    covariates: tuple[str, ...] = ()
    disease_edges: tuple[tuple[str, str], ...] = ()
    symptom_edges: tuple[tuple[str, str], ...] = ()
    tau: dict[str, float] | None = field(default=None, compare=True)

    def __post_init__(self):
        for name in ("diseases", "symptoms", "factors", "covariates"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(
            self, "disease_edges", _dedupe_edges(self.disease_edges)
        )
        object.__setattr__(
            self, "symptom_edges", _dedupe_edges(self.symptom_edges)
        )
        if self.tau is not None:
            object.__setattr__(self, "tau", dict(self.tau))
        self._check()

    def _check(self):
        if not self.diseases:
            raise SpecError("at least one disease is required")
        seen = set()
        for name in self.columns:
            if not isinstance(name, str) or not name:
                raise SpecError(f"variable names must be non-empty strings, got {name!r}")
            if name == INTERCEPT:
                raise SpecError(f"{INTERCEPT!r} is reserved")
            if name in seen:
                raise SpecError(f"duplicate variable name {name!r}")
            seen.add(name)
        diseases = set(self.diseases)
        symptoms = set(self.symptoms)
        for parent, child in self.disease_edges:
            for end in (parent, child):
                if end not in diseases:
                    raise SpecError(
                        f"disease edge ({parent}, {child}): {end!r} is not a declared disease"
                    )
            if parent == child:
                raise SpecError(f"self-loop on disease {parent!r}")
        for disease, symptom in self.symptom_edges:
            if disease not in diseases:
                raise SpecError(
                    f"symptom edge ({disease}, {symptom}): {disease!r} is not a declared disease"
                )
            if symptom not in symptoms:
                raise SpecError(
                    f"symptom edge ({disease}, {symptom}): {symptom!r} is not a declared symptom"
                )
        if self.tau is not None:
            for name, value in self.tau.items():
                if name not in diseases:
                    raise SpecError(f"tau given for unknown disease {name!r}")
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise SpecError(f"tau[{name}] must be a number, got {value!r}")
                if not 0.0 < value < 1.0:
                    raise SpecError(f"tau[{name}]={value} is outside (0, 1)")

    @property
    def columns(self) -> tuple[str, ...]:
        """All variables in canonical order: diseases, symptoms, factors, covariates."""
        return self.diseases + self.symptoms + self.factors + self.covariates

    @property
    def reversed_symptom_edges(self) -> tuple[tuple[str, str], ...]:
        """Symptom edges in the misspecified direction, as (symptom, disease)."""
        return tuple((s, d) for d, s in self.symptom_edges)

    def to_dict(self) -> dict:
        doc = {
            "diseases": list(self.diseases),
            "symptoms": list(self.symptoms),
            "factors": list(self.factors),
            "covariates": list(self.covariates),
            "disease_edges": [list(e) for e in self.disease_edges],
            "symptom_edges": [list(e) for e in self.symptom_edges],
        }
        if self.tau is not None:
            doc["tau"] = {k: self.tau[k] for k in self.diseases if k in self.tau}
        return doc


def _dedupe_edges(edges):
    out = []
    for edge in edges:
        edge = tuple(edge)
        if len(edge) != 2:
            raise SpecError(f"edge must have exactly two endpoints, got {list(edge)!r}")
        if edge not in out:
            out.append(edge)
    return tuple(out)


@dataclass(frozen=True)
class ParentSets:
    disease_parents: dict[str, tuple[str, ...]]
    symptom_parents_gen: dict[str, tuple[str, ...]]
    symptom_inputs_mis: dict[str, tuple[str, ...]]
    topo_order: tuple[str, ...]


def validate_dag(spec: NetworkSpec) -> ParentSets:
    """Check the disease graph is acyclic and derive every parent set.

    Parent lists follow declaration order of the variables. The
    topological order is the reverse DFS postorder, visiting diseases and
    their children in declaration order, so it is deterministic.
    """
    position = {d: i for i, d in enumerate(spec.diseases)}
    children = {d: [] for d in spec.diseases}
    for parent, child in spec.disease_edges:
        children[parent].append(child)
    for d in children:
        children[d].sort(key=position.__getitem__)

    WHITE, GREY, BLACK = 0, 1, 2
    colour = dict.fromkeys(spec.diseases, WHITE)
    postorder = []
    stack_path = []

    def visit(node):
        colour[node] = GREY
        stack_path.append(node)
        for child in children[node]:
            if colour[child] == GREY:
                raise CycleError(stack_path[stack_path.index(child):])
            if colour[child] == WHITE:
                visit(child)
        stack_path.pop()
        colour[node] = BLACK
        postorder.append(node)

    for disease in spec.diseases:
        if colour[disease] == WHITE:
            visit(disease)

    symptom_pos = {s: i for i, s in enumerate(spec.symptoms)}
    disease_parents = {
        d: tuple(p for p in spec.diseases if (p, d) in spec.disease_edges)
        for d in spec.diseases
    }
    symptom_parents = {
        s: tuple(d for d in spec.diseases if (d, s) in spec.symptom_edges)
        for s in spec.symptoms
    }
    symptom_inputs = {
        d: tuple(
            sorted(
                (s for dd, s in spec.symptom_edges if dd == d),
                key=symptom_pos.__getitem__,
            )
        )
        for d in spec.diseases
    }
    return ParentSets(
        disease_parents=disease_parents,
        symptom_parents_gen=symptom_parents,
        symptom_inputs_mis=symptom_inputs,
        topo_order=tuple(reversed(postorder)),
    )


def design_columns(
    spec: NetworkSpec,
    equation: str,
    variant: str,
    parents: ParentSets | None = None,
) -> list[str]:
    """Ordered predictor names for one logit equation.

    Disease equations: intercept, disease parents, symptom inputs
    (misspecified variant only), covariates, factors. Symptom equations
    (``generative-symptom``, ``equation`` names the symptom): intercept,
    the diseases causing the symptom, covariates, factors.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if parents is None:
        parents = validate_dag(spec)
    if variant == GENERATIVE_SYMPTOM:
        if equation not in parents.symptom_parents_gen:
            raise SpecError(f"unknown symptom equation {equation!r}")
        inputs = list(parents.symptom_parents_gen[equation])
    else:
        if equation not in parents.disease_parents:
            raise SpecError(f"unknown disease equation {equation!r}")
        inputs = list(parents.disease_parents[equation])
        if variant == MISSPECIFIED:
            inputs += parents.symptom_inputs_mis[equation]
    return [INTERCEPT, *inputs, *spec.covariates, *spec.factors]


def parse_spec(text: str) -> NetworkSpec:
    """Parse a JSON network document and validate it, acyclicity included."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    spec = spec_from_dict(doc)
    validate_dag(spec)
    return spec


def spec_from_dict(doc) -> NetworkSpec:
    if not isinstance(doc, dict):
        raise SpecError("network document must be a JSON object")
    unknown = sorted(set(doc) - set(_SPEC_KEYS))
    if unknown:
        raise SpecError(f"unknown top-level key(s): {', '.join(unknown)}")
    if "diseases" not in doc:
        raise SpecError("missing required key 'diseases'")
    for key in ("diseases", "symptoms", "factors", "covariates"):
        value = doc.get(key, [])
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise SpecError(f"{key!r} must be an array of strings")
    for key in ("disease_edges", "symptom_edges"):
        value = doc.get(key, [])
        if not isinstance(value, list) or not all(
            isinstance(e, list) and len(e) == 2 and all(isinstance(v, str) for v in e)
            for e in value
        ):
            raise SpecError(f"{key!r} must be an array of 2-element string arrays")
    tau = doc.get("tau")
    if tau is not None and not isinstance(tau, dict):
        raise SpecError("'tau' must be an object mapping disease name to number")
    return NetworkSpec(
        diseases=doc["diseases"],
        symptoms=doc.get("symptoms", []),
        factors=doc.get("factors", []),
        covariates=doc.get("covariates", []),
        disease_edges=doc.get("disease_edges", []),
        symptom_edges=doc.get("symptom_edges", []),
        tau=tau,
    )


def dump_spec(spec: NetworkSpec) -> str:
    return json.dumps(spec.to_dict(), indent=2) + "\n"


def load_spec(path) -> NetworkSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot read model spec {path}: {exc}") from exc
    return parse_spec(text)
