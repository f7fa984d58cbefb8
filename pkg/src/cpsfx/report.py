"""Run reports: final states, effect counts, PMI findings, safety verdicts.

Everything here derives from the trace and the scenario's declarations, so
regenerating a report from a saved trace file is deterministic. Ground
assignments are sampled per simulation instant (all state changes within
one instant coalesce to the end-of-instant values), which avoids spurious
classifications from intra-instant skew between believed and actual
variables; consecutive samples are classified only when they realize a
declared ground transition.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .attack.insert import insert_attack_simulator
from .attack.simulator import SIM_ID
from .devs.kernel import SimulationSystem, build_coupled
from .devs.messages import EFFECT_APPLIED, STATE_CHANGE, TraceEvent, time_pair
from .effects.ast import EffectProgram
from .pmi.analysis import classify_transition, evaluate_safety
from .pmi.models import Connection
from .pmi.space import Assignment
from .scenarios.model import Scenario

EXIT_CLEAN = 0
EXIT_SAFETY = 2
EXIT_PMI = 3


@dataclass(frozen=True)
class ReportFinding:
    component: str
    time: Tuple[int, int]
    transition: Tuple[str, str]
    classification: str
    witness_from: Mapping[str, Any]
    witness_to: Mapping[str, Any]
    observed: Optional[Tuple[str, str]] = None

    @property
    def is_pmi(self) -> bool:
        return self.classification in ("Unobservable", "IncorrectlyObserved")


@dataclass(frozen=True)
class SafetyViolation:
    time: Tuple[int, int]
    prop: str
    connection: str
    assignment: Mapping[str, Any]


@dataclass(frozen=True)
class RunReport:
    scenario: str
    script: Optional[str]
    until: Tuple[int, int]
    final_states: Mapping[str, Mapping[str, Any]]
    applications: Mapping[str, int]
    findings: Tuple[ReportFinding, ...]
    violations: Tuple[SafetyViolation, ...]
    epoch: Optional[int] = None

    @property
    def exit_status(self) -> int:
        if self.violations:
            return EXIT_SAFETY
        if any(f.is_pmi for f in self.findings):
            return EXIT_PMI
        return EXIT_CLEAN


def run_scenario(
    scenario: Scenario,
    program: Optional[EffectProgram] = None,
    until=200,
) -> Tuple[List[TraceEvent], SimulationSystem]:
    """Execute a scenario, with the attack simulator inserted iff a program is given."""
    spec = scenario.system
    if program is not None:
        spec, _ = insert_attack_simulator(
            spec, scenario.targets, program, scenario.snapshots
        )
    system = build_coupled(spec)
    events = system.run(until, scenario.driver_messages())
    return events, system


class _VarTracker:
    """Current runtime variable values per component, replayed from the trace."""

    def __init__(self, scenario: Scenario):
        self.values: Dict[str, Dict[str, Any]] = {}
        for comp, spec in scenario.leaves().items():
            if spec.space is not None:
                self.values[comp] = dict(spec.space.as_dict(spec.initial))
        self.sim_detail: Optional[Mapping[str, Any]] = None

    def apply(self, event: TraceEvent) -> None:
        if event.kind != STATE_CHANGE:
            return
        new = event.detail.get("new", {})
        if "vars" in new:
            self.values.setdefault(event.subject, {}).update(new["vars"])
        elif "sim" in new:
            self.sim_detail = new["sim"]

    def ground_assignment(self, connection: Connection, component: str) -> Optional[Assignment]:
        sources = dict(connection.sources)
        values = []
        for name, _ in connection.ground.space.vars:
            comp, var = sources.get(name, (component, name))
            comp_vars = self.values.get(comp)
            if comp_vars is None or var not in comp_vars:
                return None
            values.append(comp_vars[var])
        return Assignment(tuple(values))


def build_report(
    scenario: Scenario,
    events: Sequence[TraceEvent],
    script: Optional[str] = None,
    program: Optional[EffectProgram] = None,
    until=200,
    epoch: Optional[int] = None,
) -> RunReport:
    tracker = _VarTracker(scenario)
    samples: Dict[str, Assignment] = {}
    for comp, connection in scenario.connections.items():
        p = tracker.ground_assignment(connection, comp)
        if p is not None and connection.ground.state_model.observe(p) is not None:
            samples[comp] = p

    safety_by_connection: Dict[str, list] = {}
    for entry in scenario.safety:
        safety_by_connection.setdefault(entry.connection, []).append(entry.prop)

    findings: List[ReportFinding] = []
    violations: List[SafetyViolation] = []
    applications: Dict[str, int] = {}
    if program is not None:
        applications = {e.name: 0 for e in program.effects}

    def close_instant(at: Fraction) -> None:
        for comp in sorted(scenario.connections):
            connection = scenario.connections[comp]
            current = tracker.ground_assignment(connection, comp)
            if current is None:
                continue
            ground_sm = connection.ground.state_model
            state = ground_sm.observe(current)
            if state is None:
                continue  # instant outside the ground model's domain
            previous = samples.get(comp)
            if current == previous:
                continue
            if previous is not None:
                pair = (ground_sm.observe(previous), state)
                if pair in connection.ground.transitions:
                    finding = classify_transition(connection, previous, current)
                    findings.append(ReportFinding(
                        component=comp,
                        time=time_pair(at),
                        transition=finding.transition,
                        classification=finding.classification.value,
                        witness_from=connection.ground.space.as_dict(previous),
                        witness_to=connection.ground.space.as_dict(current),
                        observed=finding.observed,
                    ))
            for name in evaluate_safety(
                safety_by_connection.get(comp, ()), connection.ground.space, current
            ):
                violations.append(SafetyViolation(
                    time=time_pair(at),
                    prop=name,
                    connection=comp,
                    assignment=connection.ground.space.as_dict(current),
                ))
            samples[comp] = current

    pending_time: Optional[Fraction] = None
    for event in events:
        if pending_time is not None and event.time != pending_time:
            close_instant(pending_time)
        pending_time = event.time
        tracker.apply(event)
        if event.kind == EFFECT_APPLIED:
            name = event.detail.get("effect")
            applications[name] = applications.get(name, 0) + 1
    if pending_time is not None:
        close_instant(pending_time)

    final_states: Dict[str, Mapping[str, Any]] = {
        comp: dict(values) for comp, values in sorted(tracker.values.items())
    }
    if tracker.sim_detail is not None:
        final_states[SIM_ID] = dict(tracker.sim_detail)

    return RunReport(
        scenario=scenario.name,
        script=script,
        until=time_pair(until),
        final_states=final_states,
        applications=dict(sorted(applications.items())),
        findings=tuple(findings),
        violations=tuple(violations),
        epoch=epoch,
    )


# -- serialization --------------------------------------------------------------


def report_to_text(report: RunReport) -> str:
    lines = [f"scenario: {report.scenario}"]
    lines.append(f"script: {report.script or '(none)'}")
    lines.append(f"until: {report.until[0]}/{report.until[1]}")
    if report.epoch is not None:
        lines.append(f"epoch: {report.epoch}")
    lines.append("final states:")
    for comp, values in report.final_states.items():
        rendered = " ".join(f"{k}={v}" for k, v in values.items())
        lines.append(f"  {comp}: {rendered}")
    lines.append("effect applications:")
    if report.applications:
        for name, count in report.applications.items():
            lines.append(f"  {name}: {count}")
    else:
        lines.append("  (none)")
    lines.append("pmi findings:")
    if report.findings:
        for f in report.findings:
            observed = f" observed as {f.observed}" if f.observed else ""
            lines.append(
                f"  [{f.classification}] {f.component} t={f.time[0]}/{f.time[1]} "
                f"{f.transition[0]} -> {f.transition[1]}{observed}"
            )
    else:
        lines.append("  (none)")
    lines.append("safety violations:")
    if report.violations:
        for v in report.violations:
            lines.append(f"  [{v.prop}] {v.connection} t={v.time[0]}/{v.time[1]} {v.assignment}")
    else:
        lines.append("  (none)")
    lines.append(f"exit status: {report.exit_status}")
    return "\n".join(lines) + "\n"


def report_to_jsonl(report: RunReport) -> str:
    records = [{
        "kind": "header", "scenario": report.scenario, "script": report.script,
        "until": list(report.until),
    }]
    if report.epoch is not None:
        records.append({"kind": "epoch", "value": report.epoch})
    for comp, values in report.final_states.items():
        records.append({"kind": "final_state", "component": comp, "vars": values})
    for name, count in report.applications.items():
        records.append({"kind": "application", "effect": name, "count": count})
    for f in report.findings:
        records.append({
            "kind": "finding", "component": f.component, "time": list(f.time),
            "transition": list(f.transition), "classification": f.classification,
            "from": f.witness_from, "to": f.witness_to,
            "observed": list(f.observed) if f.observed else None,
        })
    for v in report.violations:
        records.append({
            "kind": "violation", "property": v.prop, "connection": v.connection,
            "time": list(v.time), "assignment": v.assignment,
        })
    records.append({"kind": "exit", "status": report.exit_status})
    return "\n".join(json.dumps(r, separators=(",", ":")) for r in records) + "\n"
