"""Man-in-the-middle attack simulator: insertion and effect application."""

from .simulator import (
    SIM_ID,
    SimulatorState,
    UnknownEffect,
    attack_sim_atomic,
    effect_application_count,
    initial_state,
    on_message,
)
from .insert import (
    AlreadyInserted,
    InterceptPlan,
    UnknownTarget,
    UnroutableGenerate,
    insert_attack_simulator,
)
