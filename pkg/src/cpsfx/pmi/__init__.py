"""Process-model inconsistency theory: state models, connections, analysis."""

from .space import (
    ArityMismatch,
    Assignment,
    IntRange,
    SpaceError,
    ValueOutOfDomain,
    VariableSpace,
)
from .models import (
    Connection,
    ConnectionError_,
    MissingInitialState,
    ModelDiff,
    ModelError,
    ProcessModel,
    SafetyProperty,
    StateModel,
    WILDCARD,
    check_safety_consistency,
)
from .analysis import (
    Classification,
    NotAForcedState,
    NotAGroundTransition,
    NotIncomplete,
    PMI_CLASSES,
    PmiFinding,
    TheoremOutcome,
    TheoremOutcomeKind,
    check_ground_truth,
    classify_transition,
    diff_models,
    evaluate_safety,
    lemma1_witness,
    observe,
    observe_ground_in_known,
    theorem1_check,
)
from .generate import random_connection

__all__ = [
    "ArityMismatch",
    "Assignment",
    "Classification",
    "Connection",
    "ConnectionError_",
    "IntRange",
    "MissingInitialState",
    "ModelDiff",
    "ModelError",
    "NotAForcedState",
    "NotAGroundTransition",
    "NotIncomplete",
    "PMI_CLASSES",
    "PmiFinding",
    "ProcessModel",
    "SafetyProperty",
    "SpaceError",
    "StateModel",
    "TheoremOutcome",
    "TheoremOutcomeKind",
    "ValueOutOfDomain",
    "VariableSpace",
    "WILDCARD",
    "check_ground_truth",
    "check_safety_consistency",
    "classify_transition",
    "diff_models",
    "evaluate_safety",
    "lemma1_witness",
    "observe",
    "observe_ground_in_known",
    "random_connection",
    "theorem1_check",
]
