"""DAG-structured logistic networks of binary outcomes.

Two model variants share one network declaration: a generative Bayesian
network in which diseases cause symptoms, and a misspecified approximation
in which symptoms are inputs to the disease equations.
"""
from .data_io import Dataset, Scenario, read_csv, read_scenarios, write_csv
from .evaluation import auc_mann_whitney, bootstrap_eval, eval_report, jackknife_eval, roc
from .generative import GenerativeModel, exact_conditional, fit_generative, joint_log_prob, sample
from .glm import (
    DesignMatrix,
    EquationParams,
    FitOptions,
    Weighting,
    fit,
    inference_stats,
    rare_event_weights,
    sigmoid,
)
from .misspec import MisspecifiedModel, compare_models, diagnostic_prob, fit_misspecified
from .network import NetworkSpec, ParentSets, design_columns, parse_spec, validate_dag

__version__ = "0.1.0"
