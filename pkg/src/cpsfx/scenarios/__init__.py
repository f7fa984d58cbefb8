"""Executable reference scenarios: elevator system and ATM."""

from .model import (
    DATA_DIR,
    Driver,
    MessageTypeDecl,
    Scenario,
    ScenarioSafety,
    ScenarioValidationError,
    load_program,
    make_safety,
    validate_scenario,
)
from .loader import (
    ParseError,
    REGISTRY,
    load_process_model_bundle,
    load_process_models,
    load_scenario,
)
from .builders import atm_baseline, elevator_baseline, elevator_variant
