"""Trace log serialization (.trace.jsonl) and log audits.

One record per line with fixed key order {seq, t_num, t_den, kind, subject,
detail}; identical runs serialize to identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, List, Sequence

from .kernel import SimulationSystem
from .messages import (
    ENV,
    EFFECT_APPLIED,
    MESSAGE_DELIVERED,
    MESSAGE_SENT,
    TraceEvent,
)


def event_to_json(event: TraceEvent) -> str:
    t_num, t_den = event.time_pair()
    record = {
        "seq": event.seq,
        "t_num": t_num,
        "t_den": t_den,
        "kind": event.kind,
        "subject": event.subject,
        "detail": event.detail,
    }
    return json.dumps(record, separators=(",", ":"), sort_keys=False)


def event_from_json(line: str) -> TraceEvent:
    record = json.loads(line)
    return TraceEvent(
        seq=record["seq"],
        time=Fraction(record["t_num"], record["t_den"]),
        kind=record["kind"],
        subject=record["subject"],
        detail=record["detail"],
    )


def write_trace(events: Iterable[TraceEvent], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(event_to_json(event))
            fh.write("\n")


def read_trace(path) -> List[TraceEvent]:
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(event_from_json(line))
    return events


def strip_subject(events: Sequence[TraceEvent], subject: str) -> List[TraceEvent]:
    """Drop one component's records and renumber, for trace-equivalence checks."""
    kept = [e for e in events if e.subject != subject]
    return [TraceEvent(i, e.time, e.kind, e.subject, e.detail) for i, e in enumerate(kept)]


def trace_projection(events: Sequence[TraceEvent]):
    """Per-instant, per-subject view of a trace.

    Interleaving across components within one instant is scheduling detail
    (an interceptor hop adds zero-time rounds); what a run observably did is
    each component's own ordered record stream at each instant, which this
    captures exactly.
    """
    projection = {}
    for event in events:
        key = (event.time, event.subject)
        projection.setdefault(key, []).append(
            json.dumps({"kind": event.kind, "detail": event.detail}, sort_keys=True)
        )
    return projection


def equivalent_traces(a: Sequence[TraceEvent], b: Sequence[TraceEvent]) -> bool:
    """Exact per-component, per-instant match of two event logs."""
    return trace_projection(a) == trace_projection(b)


def canonical_trace(events: Sequence[TraceEvent]) -> List[str]:
    return [event_to_json(e) for e in events]


def audit_message_conservation(events: Sequence[TraceEvent]) -> List[str]:
    """Every sent record must pair with exactly one delivery, in order.

    Messages held back or discarded by an effect are delivered to the
    interceptor first (balanced) and accounted for in its effect_applied
    records, so the per-id send/delivery balance stays exact.
    """
    problems: List[str] = []
    balance = {}
    for event in events:
        if event.kind == MESSAGE_SENT:
            mid = event.detail["msg"]["id"]
            if balance.get(mid, 0) != 0:
                problems.append(f"message {mid} re-sent before delivery")
            balance[mid] = balance.get(mid, 0) + 1
        elif event.kind == MESSAGE_DELIVERED:
            mid = event.detail["msg"]["id"]
            if balance.get(mid, 0) != 1:
                problems.append(f"message {mid} delivered without matching send")
            balance[mid] = balance.get(mid, 0) - 1
    for mid, b in sorted(balance.items()):
        if b != 0:
            problems.append(f"message {mid} left {b} unbalanced send records")
    return problems


def audit_coupling_closure(events: Sequence[TraceEvent], system: SimulationSystem) -> List[str]:
    """Every delivery must traverse a flattened coupling or enter via an EIC."""
    problems: List[str] = []
    for event in events:
        if event.kind != MESSAGE_DELIVERED or event.subject == ENV:
            continue
        msg = event.detail["msg"]
        source = tuple(msg["from"])
        target = tuple(msg["to"])
        if source[0] == ENV:
            allowed = {d.logical for d in system.eic_routes.get(source[1], ())}
            if target not in allowed:
                problems.append(f"external message {msg['id']} reached {target} outside EICs")
        else:
            allowed = {d.logical for d in system.routes.get(source, ())}
            if target not in allowed:
                problems.append(f"message {msg['id']} travelled {source}->{target} off-coupling")
    return problems


def dropped_message_ids(events: Sequence[TraceEvent]) -> List[int]:
    ids: List[int] = []
    for event in events:
        if event.kind == EFFECT_APPLIED:
            ids.extend(event.detail.get("drops", ()))
    return ids
