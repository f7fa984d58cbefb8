"""Scenario assembly and validation.

A scenario bundles an executable system with its message-type
declarations, scripted drivers, known and ground-truth process models,
their connections (including where each ground variable is measured),
safety properties and named effect programs. The programmatic
constructors and the bundled scenario files build through the same
helpers, so loading a file and calling the constructor must produce
structurally equal values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Tuple

from ..devs.kernel import SimulationSystem
from ..devs.messages import Message, make_message
from ..devs.spec import AtomicSpec, CoupledSpec
from ..effects.ast import EffectProgram
from ..effects.exprs import predicate_from_expression
from ..effects.parser import parse_script
from ..effects.validate import ScenarioDecls, validate as validate_program
from ..pmi.analysis import check_ground_truth
from ..pmi.models import ProcessModel, SafetyProperty, check_safety_consistency

DATA_DIR = Path(__file__).resolve().parent / "data"


class ScenarioValidationError(ValueError):
    pass


@dataclass(frozen=True)
class MessageTypeDecl:
    name: str
    fields: Tuple[Tuple[str, Any], ...]  # field -> symbol tuple or IntRange

    def domains(self) -> Mapping[str, Any]:
        return dict(self.fields)


@dataclass(frozen=True)
class Driver:
    time: int
    port: str
    msg_type: str
    fields: Tuple[Tuple[str, Any], ...]


@dataclass(frozen=True)
class ScenarioSafety:
    name: str
    connection: str  # component id whose ground space the rule reads
    rule: str
    prop: SafetyProperty = field(compare=False, repr=False)


@dataclass(frozen=True, eq=True)
class Scenario:
    name: str
    system: CoupledSpec
    message_types: Tuple[MessageTypeDecl, ...]
    drivers: Tuple[Driver, ...]
    known_models: Mapping[str, ProcessModel]
    ground_models: Mapping[str, ProcessModel]
    connections: Mapping[str, Connection]
    safety: Tuple[ScenarioSafety, ...]
    scripts: Mapping[str, EffectProgram]
    targets: Tuple[str, ...]
    snapshots: Mapping[str, str] = field(default_factory=dict)

    def message_decl(self, name: str) -> MessageTypeDecl:
        for decl in self.message_types:
            if decl.name == name:
                return decl
        raise KeyError(name)

    def component_ids(self) -> Tuple[str, ...]:
        ids = []

        def walk(spec) -> None:
            ids.append(spec.id)
            if isinstance(spec, CoupledSpec):
                for child in spec.children:
                    walk(child)

        walk(self.system)
        return tuple(ids)

    def leaves(self) -> Mapping[str, AtomicSpec]:
        out = {}

        def walk(spec) -> None:
            if isinstance(spec, AtomicSpec):
                out[spec.id] = spec
            else:
                for child in spec.children:
                    walk(child)

        walk(self.system)
        return out

    def decls(self) -> ScenarioDecls:
        state_vars = {
            comp: dict(spec.space.vars) if spec.space is not None else {}
            for comp, spec in self.leaves().items()
        }
        return ScenarioDecls(
            components=frozenset(self.component_ids()),
            message_types={d.name: d.domains() for d in self.message_types},
            state_vars=state_vars,
        )

    def driver_messages(self) -> Tuple[Tuple[int, Message], ...]:
        out = []
        for d in self.drivers:
            msg = make_message(
                d.msg_type, ("__env__", d.port), (self.system.id, d.port),
                dict(d.fields), d.time,
            )
            out.append((d.time, msg))
        return tuple(out)


def make_safety(name: str, connection: str, rule: str) -> ScenarioSafety:
    prop = SafetyProperty(name, predicate_from_expression(rule), rule=rule)
    return ScenarioSafety(name, connection, rule, prop)


def validate_scenario(scenario: Scenario) -> None:
    """Raise ScenarioValidationError on any structural problem."""
    try:
        SimulationSystem(scenario.system)
    except ValueError as err:
        raise ScenarioValidationError(f"system: {err}") from err
    ids = set(scenario.component_ids())
    leaves = scenario.leaves()
    declared = {d.name for d in scenario.message_types}

    for d in scenario.drivers:
        if d.port not in scenario.system.input_ports:
            raise ScenarioValidationError(f"driver targets unknown port {d.port!r}")
        if d.msg_type not in declared:
            raise ScenarioValidationError(f"driver uses undeclared type {d.msg_type!r}")
        domains = scenario.message_decl(d.msg_type).domains()
        missing = set(domains) - {fname for fname, _ in d.fields}
        if missing:
            raise ScenarioValidationError(
                f"driver omits fields {sorted(missing)} of {d.msg_type!r}"
            )
        for fname, value in d.fields:
            if fname not in domains:
                raise ScenarioValidationError(
                    f"driver field {fname!r} not declared on {d.msg_type!r}"
                )
            if value not in domains[fname]:
                raise ScenarioValidationError(
                    f"driver value {value!r} outside domain of {d.msg_type}.{fname}"
                )

    for comp in list(scenario.known_models) + list(scenario.ground_models):
        if comp not in ids:
            raise ScenarioValidationError(f"process model for unknown component {comp!r}")
    for comp, ground in scenario.ground_models.items():
        unreachable = check_ground_truth(ground)
        if unreachable:
            raise ScenarioValidationError(
                f"ground model of {comp!r} has unreachable states {sorted(unreachable)}"
            )
    for comp, connection in scenario.connections.items():
        if comp not in ids:
            raise ScenarioValidationError(f"connection for unknown component {comp!r}")
        for var, (source_comp, source_var) in dict(connection.sources).items():
            if source_comp not in leaves:
                raise ScenarioValidationError(
                    f"connection {comp!r}: source component {source_comp!r} unknown"
                )
            space = leaves[source_comp].space
            if space is None or source_var not in space.names:
                raise ScenarioValidationError(
                    f"connection {comp!r}: {source_comp!r} has no variable {source_var!r}"
                )

    for safety in scenario.safety:
        if safety.connection not in scenario.connections:
            raise ScenarioValidationError(
                f"safety {safety.name!r} references unknown connection {safety.connection!r}"
            )
        ground = scenario.connections[safety.connection].ground
        check_safety_consistency(safety.prop, ground)

    decls = scenario.decls()
    for name, program in scenario.scripts.items():
        diagnostics = validate_program(program, decls)
        if diagnostics:
            lines = "; ".join(str(d) for d in diagnostics)
            raise ScenarioValidationError(f"script {name!r}: {lines}")

    for target in scenario.targets:
        if target not in ids:
            raise ScenarioValidationError(f"unknown intercept target {target!r}")
    for msg_type, comp in dict(scenario.snapshots).items():
        if msg_type not in declared or comp not in ids:
            raise ScenarioValidationError(
                f"snapshot declaration {msg_type!r} -> {comp!r} is unresolved"
            )


def load_program(path) -> EffectProgram:
    return parse_script(Path(path).read_text(encoding="utf-8"))
