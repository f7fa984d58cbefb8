"""Deterministic discrete-event simulation kernel with port-based routing."""

from .messages import (
    CONFLUENT_TRANSITION,
    EFFECT_ACTIVATED,
    EFFECT_APPLIED,
    EFFECT_DEACTIVATED,
    ENV,
    EVENT_KINDS,
    EXTERNAL_TRANSITION,
    INFINITY,
    INTERNAL_TRANSITION,
    MESSAGE_DELIVERED,
    MESSAGE_SENT,
    STATE_CHANGE,
    Message,
    MessageError,
    Time,
    TraceEvent,
    as_time,
    make_message,
    time_pair,
)
from .spec import (
    AtomicSpec,
    Behavior,
    CoupledSpec,
    Coupling,
    DanglingCoupling,
    DuplicateLabel,
    Emit,
    Forward,
    SelfInfluence,
    eic,
    eoc,
    ic,
    validate_coupled,
)
from .kernel import (
    DEFAULT_ZERO_DELAY_BOUND,
    NonterminatingZeroDelay,
    RunContext,
    SimulationSystem,
    TimeInPast,
    UnknownPort,
    build_coupled,
    inject_external,
    run,
)
from .trace import (
    audit_coupling_closure,
    audit_message_conservation,
    canonical_trace,
    dropped_message_ids,
    equivalent_traces,
    event_from_json,
    event_to_json,
    read_trace,
    strip_subject,
    trace_projection,
    write_trace,
)
