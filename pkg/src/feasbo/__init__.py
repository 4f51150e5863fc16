"""Surrogate-based optimization with strictly feasible candidate sampling."""

from .domain import (
    Archive,
    Bounds,
    ConstraintSet,
    EvaluatedPoint,
    Problem,
    RunRecord,
    Source,
    Termination,
    is_feasible,
    penalized_objective,
)
from .optimizer import MsrsConfig, SBOConfig, msrs_score, optimize, select_next
from .sampling import SamplerConfig, generate_candidates, latin_hypercube, penalty_vector
from .surrogate import KrigingConfig, KrigingModel, fit, predict

__version__ = "0.1.0"

__all__ = [
    "Archive", "Bounds", "ConstraintSet", "EvaluatedPoint", "Problem", "RunRecord", "Source",
    "Termination", "is_feasible", "penalized_objective", "MsrsConfig", "SBOConfig", "msrs_score",
    "optimize", "select_next", "SamplerConfig", "generate_candidates", "latin_hypercube",
    "penalty_vector", "KrigingConfig", "KrigingModel", "fit", "predict",
]
