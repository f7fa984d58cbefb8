"""Scenario and process-model file loading.

Scenario files are TOML with sections [scenario], [[component]],
[[message]], [[driver]], [[process_model]], [[connection]], [[safety]],
[scripts] and optional [snapshots]. Atomic components name a behavior kind
from the registry; coupled components list children and couplings. The
bundled files and the programmatic constructors go through the same
builders, so they compare structurally equal.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Mapping, Tuple

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..devs.spec import Coupling, CoupledSpec
from ..pmi.models import Connection, ProcessModel, StateModel, check_safety_consistency
from ..pmi.space import IntRange, VariableSpace
from . import atm as atm_mod
from . import elevator as ele
from .model import (
    Driver,
    MessageTypeDecl,
    Scenario,
    load_program,
    make_safety,
    validate_scenario,
)


class ParseError(ValueError):
    pass


#: Behavior factories by kind; scenario files refer to these names.
REGISTRY = {
    "button": ele.button,
    "motor": ele.motor,
    "car_ctrl": ele.car_ctrl,
    "car_door": ele.car_door,
    "elevator_ctrl": ele.elevator_ctrl,
    "atm_controller": atm_mod.atm_controller,
    "atm_customer": atm_mod.atm_customer,
    "atm_bank": atm_mod.atm_bank,
}


def _domain(spec) -> Any:
    if isinstance(spec, dict):
        if "int" in spec and len(spec["int"]) == 2:
            return IntRange(int(spec["int"][0]), int(spec["int"][1]))
        raise ParseError(f"unknown domain form {spec!r}")
    if isinstance(spec, list):
        return tuple(spec)
    raise ParseError(f"unknown domain form {spec!r}")


def _endpoint(text: str) -> Tuple[str, str]:
    if "." not in text:
        raise ParseError(f"coupling endpoint {text!r} must be Component.port")
    comp, port = text.split(".", 1)
    return (comp, port)


def _build_component(entry: Mapping, by_id: Mapping[str, Mapping]):
    kind = entry.get("kind")
    comp_id = entry.get("id")
    if not comp_id or not kind:
        raise ParseError("component entries need id and kind")
    if kind == "coupled":
        children = tuple(
            _build_component(_lookup(by_id, child), by_id) for child in entry.get("children", ())
        )
        couplings = []
        for item in entry.get("couplings", ()):
            if len(item) != 3:
                raise ParseError(f"coupling {item!r} must be [kind, src, dst]")
            ckind = item[0].upper()
            if ckind not in ("EIC", "IC", "EOC"):
                raise ParseError(f"unknown coupling kind {item[0]!r}")
            couplings.append(Coupling(ckind, _endpoint(item[1]), _endpoint(item[2])))
        return CoupledSpec(
            id=comp_id,
            input_ports=tuple(entry.get("inputs", ())),
            output_ports=tuple(entry.get("outputs", ())),
            children=children,
            couplings=tuple(couplings),
        )
    if kind not in REGISTRY:
        raise ParseError(f"unknown component kind {kind!r}")
    return REGISTRY[kind](comp_id, dict(entry.get("params", {})))


def _lookup(by_id: Mapping[str, Mapping], comp_id: str) -> Mapping:
    if comp_id not in by_id:
        raise ParseError(f"component {comp_id!r} referenced but not declared")
    return by_id[comp_id]


def _build_process_model(entry: Mapping) -> ProcessModel:
    try:
        space = VariableSpace.of(
            *((name, _domain(domain)) for name, domain in entry["variables"])
        )
        rows = [(tuple(pattern), state) for pattern, state in entry["observation"]]
        sm = StateModel.from_rows(space, list(entry["states"]), rows)
        transitions = frozenset((a, b) for a, b in entry.get("transitions", ()))
        return ProcessModel(sm, transitions, initial=entry.get("initial"))
    except KeyError as err:
        raise ParseError(f"process model {entry.get('name')!r}: missing {err}") from err


def load_process_model_bundle(path):
    """Standalone process-model file: [[process_model]] tables.

    Each entry may carry `safety = [[name, rule]]` with boolean rules over
    its variable names; rules are consistency-checked against the model
    (two assignments observed as one state must agree). Returns
    (models by name, safety properties by model name).
    """
    raw = _read_toml(path)
    models: Dict[str, ProcessModel] = {}
    safety: Dict[str, tuple] = {}
    for entry in raw.get("process_model", ()):
        name = entry.get("name")
        if not name:
            raise ParseError("process_model entries need a name")
        model = _build_process_model(entry)
        models[name] = model
        props = []
        for rule_name, rule in entry.get("safety", ()):
            prop = make_safety(rule_name, name, rule).prop
            check_safety_consistency(prop, model)
            props.append(prop)
        safety[name] = tuple(props)
    return models, safety


def load_process_models(path) -> Dict[str, ProcessModel]:
    return load_process_model_bundle(path)[0]


def _read_toml(path) -> Mapping:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise
    except tomllib.TOMLDecodeError as err:
        raise ParseError(f"{path}: {err}") from err


def load_scenario(path) -> Scenario:
    """Parse and fully validate a scenario file."""
    path = Path(path)
    raw = _read_toml(path)
    header = raw.get("scenario", {})
    components = list(raw.get("component", ()))
    by_id = {entry.get("id"): entry for entry in components}
    roots = [entry for entry in components if entry.get("root")]
    if len(roots) != 1:
        raise ParseError("exactly one component must be marked root = true")
    system = _build_component(roots[0], by_id)
    if not isinstance(system, CoupledSpec):
        raise ParseError("the root component must be coupled")

    message_types = tuple(
        MessageTypeDecl(
            entry["name"],
            tuple((fname, _domain(fdomain)) for fname, fdomain in entry.get("fields", {}).items()),
        )
        for entry in raw.get("message", ())
    )
    drivers = tuple(
        Driver(
            int(entry["time"]), entry["port"], entry["message"],
            tuple(entry.get("fields", {}).items()),
        )
        for entry in raw.get("driver", ())
    )

    models: Dict[str, ProcessModel] = {}
    for entry in raw.get("process_model", ()):
        name = entry.get("name")
        if not name:
            raise ParseError("process_model entries need a name")
        models[name] = _build_process_model(entry)

    known: Dict[str, ProcessModel] = {}
    ground: Dict[str, ProcessModel] = {}
    connections: Dict[str, Connection] = {}
    for entry in raw.get("connection", ()):
        comp = entry["component"]
        if entry["known"] not in models or entry["ground"] not in models:
            raise ParseError(f"connection {comp!r} references undefined process models")
        known[comp] = models[entry["known"]]
        ground[comp] = models[entry["ground"]]
        sources = {
            var: (src[0], src[1]) for var, src in entry.get("sources", {}).items()
        }
        connections[comp] = Connection(
            known[comp], ground[comp],
            defaults=dict(entry.get("defaults", {})),
            sources=sources,
        )

    safety = tuple(
        make_safety(entry["name"], entry["connection"], entry["rule"])
        for entry in raw.get("safety", ())
    )
    scripts = {
        name: load_program(path.parent / rel)
        for name, rel in raw.get("scripts", {}).items()
    }
    scenario = Scenario(
        name=header.get("name", path.stem),
        system=system,
        message_types=message_types,
        drivers=drivers,
        known_models=known,
        ground_models=ground,
        connections=connections,
        safety=safety,
        scripts=scripts,
        targets=tuple(header.get("targets", ())),
        snapshots=dict(raw.get("snapshots", {})),
    )
    validate_scenario(scenario)
    return scenario
