"""Messages and trace events exchanged by the simulation kernel.

Simulation time is an exact rational tick count (Fraction), so event
ordering is exact and runs are bit-for-bit reproducible; passive states use
an infinite time advance represented by math.inf, which compares correctly
against Fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Optional, Tuple, Union

Time = Union[Fraction, float]  # Fraction for finite instants, math.inf for never

INFINITY: float = math.inf

ENV = "__env__"  # pseudo component for driver stimuli and root outputs


def as_time(value) -> Time:
    if value is INFINITY or (isinstance(value, float) and math.isinf(value)):
        return INFINITY
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float) and value.is_integer():
        return Fraction(int(value))
    raise TypeError(f"not a usable simulation time: {value!r}")


def time_pair(t: Time) -> Tuple[int, int]:
    """(numerator, denominator) of a finite instant, for serialization."""
    f = as_time(t)
    if f is INFINITY:
        raise ValueError("cannot serialize an infinite instant")
    return (f.numerator, f.denominator)


class MessageError(ValueError):
    pass


@dataclass(frozen=True)
class Message:
    """A timestamped, typed, field-carrying value routed between ports."""

    msg_type: str
    source: Tuple[str, str]  # (component id, port)
    target: Tuple[str, str]
    fields: Tuple[Tuple[str, Any], ...]  # ordered, names unique
    send_time: Fraction
    delivery_time: Fraction
    msg_id: Optional[int] = None  # assigned by the kernel at materialization

    def __post_init__(self) -> None:
        if self.delivery_time < self.send_time:
            raise MessageError("delivery_time precedes send_time")
        names = [n for n, _ in self.fields]
        if len(set(names)) != len(names):
            raise MessageError(f"duplicate field names in {names}")

    def field(self, name: str) -> Any:
        for n, v in self.fields:
            if n == name:
                return v
        raise KeyError(name)

    def fields_dict(self) -> Mapping[str, Any]:
        return dict(self.fields)

    def to_detail(self) -> Mapping[str, Any]:
        return {
            "id": self.msg_id,
            "type": self.msg_type,
            "from": list(self.source),
            "to": list(self.target),
            "fields": dict(self.fields),
            "sent": list(time_pair(self.send_time)),
            "deliver": list(time_pair(self.delivery_time)),
        }


def make_message(
    msg_type: str,
    source: Tuple[str, str],
    target: Tuple[str, str],
    fields: Mapping[str, Any],
    send_time,
    delivery_time=None,
    msg_id: Optional[int] = None,
) -> Message:
    st = as_time(send_time)
    dt = st if delivery_time is None else as_time(delivery_time)
    return Message(msg_type, tuple(source), tuple(target), tuple(fields.items()), st, dt, msg_id)


# Trace event kinds.
MESSAGE_SENT = "message_sent"
MESSAGE_DELIVERED = "message_delivered"
INTERNAL_TRANSITION = "internal_transition"
EXTERNAL_TRANSITION = "external_transition"
CONFLUENT_TRANSITION = "confluent_transition"
STATE_CHANGE = "state_change"
EFFECT_APPLIED = "effect_applied"
EFFECT_ACTIVATED = "effect_activated"
EFFECT_DEACTIVATED = "effect_deactivated"

EVENT_KINDS = (
    MESSAGE_SENT,
    MESSAGE_DELIVERED,
    INTERNAL_TRANSITION,
    EXTERNAL_TRANSITION,
    CONFLUENT_TRANSITION,
    STATE_CHANGE,
    EFFECT_APPLIED,
    EFFECT_ACTIVATED,
    EFFECT_DEACTIVATED,
)


@dataclass(frozen=True)
class TraceEvent:
    """One log record; equal times are ordered by the sequence number."""

    seq: int
    time: Fraction
    kind: str
    subject: str
    detail: Mapping[str, Any] = field(default_factory=dict)

    def time_pair(self) -> Tuple[int, int]:
        return time_pair(self.time)
