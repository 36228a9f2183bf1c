"""Auditing toolkit for confident-but-wrong student-success predictions.

Pipeline: clickstream logs -> weekly behavioral indicators -> cross-validated
failure probabilities -> known-known / known-unknown / unknown-unknown
grouping at a trust level -> regression characterization -> triage API.
"""

from .characterize import RegressionFit, characterize_uu, fit_ols, report_coefficients
from .eventlog import (
    Action,
    ClickEvent,
    CourseSchedule,
    Outcome,
    Session,
    parse_events,
    sessionize,
    week_of,
)
from .evalcv import EvalReport, FoldPlan, balanced_accuracy, make_folds, nested_cv
from .features import (
    REGISTRY,
    StudentFeatureVector,
    average_over_weeks,
    compute_indicators,
    normalize_minmax,
)
from .grouping import GroupAssignment, assign_group, prevalence
from .models import (
    ForestConfig,
    Prediction,
    import_scores,
    predict_proba,
    train_forest,
    train_overconfident_baseline,
)
from .synth import SynthConfig, describe_ground_truth, generate_course, load_preset

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ClickEvent",
    "CourseSchedule",
    "EvalReport",
    "FoldPlan",
    "ForestConfig",
    "GroupAssignment",
    "Outcome",
    "Prediction",
    "REGISTRY",
    "RegressionFit",
    "Session",
    "StudentFeatureVector",
    "SynthConfig",
    "assign_group",
    "average_over_weeks",
    "balanced_accuracy",
    "characterize_uu",
    "compute_indicators",
    "describe_ground_truth",
    "fit_ols",
    "generate_course",
    "import_scores",
    "load_preset",
    "make_folds",
    "nested_cv",
    "normalize_minmax",
    "parse_events",
    "predict_proba",
    "prevalence",
    "report_coefficients",
    "sessionize",
    "train_forest",
    "train_overconfident_baseline",
    "week_of",
]
