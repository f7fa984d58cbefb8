"""Effect application engine and the simulator's DEVS behavior.

The simulator is an ordinary atomic component with zero time advance while
work is pending. Intercepted messages are processed on receipt: the
observation store is updated, activation rules run in script order, then
every active matching effect applies in definition order. Pass-through
re-emits the intercepted message object itself, so an inactive program
leaves the trace identical apart from the simulator's own hop records.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from ..devs.messages import (
    EFFECT_ACTIVATED,
    EFFECT_APPLIED,
    EFFECT_DEACTIVATED,
    INFINITY,
    Message,
)
from ..devs.spec import AtomicSpec, Behavior, Forward
from ..effects.ast import (
    Chain,
    Delay,
    EffectDef,
    EffectProgram,
    Generate,
    MessagePattern,
    Modify,
    Symbol,
    chain_trigger,
)
from ..effects.exprs import MISSING, EvalEnv, eval_expr

SIM_ID = "__attack_sim__"


class UnknownEffect(KeyError):
    pass


@dataclass(frozen=True)
class SimulatorState:
    """Activation set, observation store, delay queue and counters."""

    now: Fraction
    active: Tuple[str, ...]  # sorted
    store: Tuple[Tuple[Tuple[str, str], Any], ...]  # sorted ((qualifier, field) -> value)
    pending: Tuple[Tuple[Fraction, int, Message], ...]  # sorted by (release, order)
    applications: Tuple[Tuple[str, int], ...]  # sorted (effect -> count)
    outbox: Tuple[Message, ...]
    next_order: int = 0
    # Static configuration, fixed at insertion time.
    routes: Tuple[Tuple[Tuple[str, str], Tuple[str, str]], ...] = ()
    snapshots: Tuple[Tuple[str, str], ...] = ()  # msg_type -> component

    def store_get(self, qualifier: str, name: str) -> Any:
        for key, value in self.store:
            if key == (qualifier, name):
                return value
        return MISSING

    def count(self, effect: str) -> int:
        for name, n in self.applications:
            if name == effect:
                return n
        raise UnknownEffect(effect)

    def trace_detail(self) -> Mapping[str, Any]:
        return {
            "sim": {
                "active": list(self.active),
                "pending": len(self.pending),
                "applications": {name: n for name, n in self.applications if n},
            }
        }


def initial_state(
    program: EffectProgram,
    routes: Mapping[Tuple[str, str], Tuple[str, str]] = (),
    snapshots: Mapping[str, str] = (),
) -> SimulatorState:
    return SimulatorState(
        now=Fraction(0),
        active=(),
        store=(),
        pending=(),
        applications=tuple(sorted((e.name, 0) for e in program.effects)),
        outbox=(),
        routes=tuple(sorted(dict(routes).items())),
        snapshots=tuple(sorted(dict(snapshots).items())),
    )


def effect_application_count(state: SimulatorState, effect: str) -> int:
    """Completed applications of a defined effect in this run."""
    return state.count(effect)


def _matches(pattern: Optional[MessagePattern], msg: Message) -> bool:
    if pattern is None:
        return False
    if pattern.msg_type != msg.msg_type:
        return False
    if pattern.from_comp != msg.source[0] or pattern.to_comp != msg.target[0]:
        return False
    if pattern.where is None:
        return True
    return eval_expr(pattern.where, EvalEnv(fields=msg.fields_dict()))


def _plain(value):
    return value.name if isinstance(value, Symbol) else value


class _Application:
    """Mutable scratch for one intercepted message."""

    def __init__(self, state: SimulatorState, msg: Message, now: Fraction):
        self.msg = msg
        self.now = now
        self.fate: Any = "pass"  # "pass" | Fraction delay | "drop"
        self.generated: List[Message] = []
        self.counters: Dict[str, int] = dict(state.applications)
        self.routes: Dict[Tuple[str, str], Tuple[str, str]] = dict(state.routes)

    def generated_ids(self) -> List[int]:
        return [m.msg_id for m in self.generated]


def _apply_operator(
    app: _Application,
    program: EffectProgram,
    effect: EffectDef,
    alloc: Optional[Callable[[], int]],
    log: Optional[Callable[[str, Mapping[str, Any]], None]],
) -> Tuple[List[int], List[int]]:
    """Apply one effect (recursively for chains); returns (outputs, drops)."""
    op = effect.operator
    outputs: List[int] = []
    drops: List[int] = []
    if isinstance(op, Generate):
        route = app.routes.get((op.from_comp, op.to_comp))
        sport, dport = route if route else ("out", "in")
        msg = Message(
            op.msg_type,
            (op.from_comp, sport),
            (op.to_comp, dport),
            tuple((name, _plain(value)) for name, value in op.sets),
            app.now,
            app.now,
            alloc() if alloc else None,
        )
        app.generated.append(msg)
        outputs.append(msg.msg_id)
    elif isinstance(op, Delay):
        if app.fate != "drop":
            app.fate = "drop" if op.is_drop else Fraction(op.duration)
        if op.is_drop:
            drops.append(app.msg.msg_id)
    elif isinstance(op, Modify):
        overrides = {name: _plain(value) for name, value in op.sets}
        fields = tuple(
            (name, overrides.get(name, value)) for name, value in app.msg.fields
        )
        extra = tuple(
            (name, value) for name, value in overrides.items()
            if name not in app.msg.fields_dict()
        )
        msg = Message(
            app.msg.msg_type, app.msg.source, app.msg.target, fields + extra,
            app.now, app.now, alloc() if alloc else None,
        )
        app.generated.append(msg)
        app.fate = "drop"
        outputs.append(msg.msg_id)
        drops.append(app.msg.msg_id)
    elif isinstance(op, Chain):
        for member_name in op.members:
            member = program.effect(member_name)
            member_out, member_drop = _apply_operator(app, program, member, alloc, log)
            app.counters[member_name] = app.counters.get(member_name, 0) + 1
            if log is not None:
                log(EFFECT_APPLIED, {
                    "effect": member_name,
                    "trigger": app.msg.msg_id,
                    "outputs": member_out,
                    "drops": member_drop,
                    "operator": type(member.operator).__name__.lower(),
                })
            outputs.extend(member_out)
            drops.extend(member_drop)
    else:  # pragma: no cover
        raise TypeError(f"not an operator: {op!r}")
    return outputs, drops


def on_message(
    state: SimulatorState,
    program: EffectProgram,
    msg: Message,
    now,
    alloc: Optional[Callable[[], int]] = None,
    log: Optional[Callable[[str, Mapping[str, Any]], None]] = None,
) -> Tuple[SimulatorState, List[Tuple[Message, Fraction]]]:
    """Process one intercepted message; returns the new state and emissions.

    Emissions carry their delivery time: generated and passed-through
    messages leave now, delayed ones later, dropped ones never.
    """
    now = Fraction(now) if not isinstance(now, Fraction) else now
    store = dict(state.store)
    for name, value in msg.fields:
        store[(msg.msg_type, name)] = value
    snapshots = dict(state.snapshots)
    if msg.msg_type in snapshots:
        component = snapshots[msg.msg_type]
        for name, value in msg.fields:
            store[(component, name)] = value
    working = replace(state, store=tuple(sorted(store.items(), key=lambda kv: kv[0])), now=now)

    active = list(working.active)
    for index, rule in enumerate(program.rules):
        if not _matches(rule.trigger, msg):
            continue
        if rule.given is not None:
            env = EvalEnv(fields=msg.fields_dict(), store=working.store_get, now=now)
            if not eval_expr(rule.given, env):
                continue
        if rule.kind == "activate" and rule.effect not in active:
            active.append(rule.effect)
            if log is not None:
                log(EFFECT_ACTIVATED, {"rule": index, "effect": rule.effect, "trigger": msg.msg_id})
        elif rule.kind == "deactivate" and rule.effect in active:
            active.remove(rule.effect)
            if log is not None:
                log(EFFECT_DEACTIVATED, {"rule": index, "effect": rule.effect, "trigger": msg.msg_id})
        working = replace(working, active=tuple(sorted(active)))

    app = _Application(working, msg, now)
    for effect in program.effects:
        if effect.name not in active:
            continue
        trigger = chain_trigger(program, effect)
        if not _matches(trigger, msg):
            continue
        outputs, drops = _apply_operator(app, program, effect, alloc, log)
        app.counters[effect.name] = app.counters.get(effect.name, 0) + 1
        if log is not None:
            log(EFFECT_APPLIED, {
                "effect": effect.name,
                "trigger": msg.msg_id,
                "outputs": outputs,
                "drops": drops,
                "operator": type(effect.operator).__name__.lower(),
            })

    emissions: List[Tuple[Message, Fraction]] = [(m, now) for m in app.generated]
    if app.fate == "pass":
        emissions.append((msg, now))
    elif app.fate != "drop":
        emissions.append((msg, now + app.fate))
    new_state = replace(
        working,
        applications=tuple(sorted(app.counters.items())),
    )
    return new_state, emissions


# -- the simulator as a DEVS atomic ------------------------------------------


def attack_sim_atomic(
    program: EffectProgram,
    in_ports: Tuple[str, ...],
    out_ports: Tuple[str, ...],
    routes: Mapping[Tuple[str, str], Tuple[str, str]],
    snapshots: Mapping[str, str],
    targets,
) -> AtomicSpec:
    start = initial_state(program, routes, snapshots)

    def ta(s: SimulatorState):
        if s.outbox:
            return 0
        if s.pending:
            return s.pending[0][0] - s.now
        return INFINITY

    def output(s: SimulatorState):
        return tuple(
            Forward(f"out_{m.target[0]}_{m.target[1]}", m) for m in s.outbox
        )

    def delta_int(s: SimulatorState, ctx):
        now = s.now + ta(s)
        due = tuple(m for release, _, m in s.pending if release <= now)
        rest = tuple(item for item in s.pending if item[0] > now)
        released = tuple(
            Message(m.msg_type, m.source, m.target, m.fields, m.send_time, now, m.msg_id)
            for m in due
        )
        return replace(s, now=now, outbox=released, pending=rest)

    def delta_ext(s: SimulatorState, elapsed, bag, ctx):
        now = s.now + elapsed
        state = replace(s, now=now, outbox=())
        new_out: List[Message] = []
        pending = list(state.pending)
        order = state.next_order
        for msg in bag:
            state, emissions = on_message(
                state, program, msg, now,
                alloc=ctx.alloc_msg_id,
                log=lambda kind, detail: ctx.emit_record(kind, SIM_ID, detail),
            )
            for out_msg, when in emissions:
                if when == now:
                    new_out.append(out_msg)
                else:
                    pending.append((when, order, out_msg))
                    order += 1
        pending.sort(key=lambda item: (item[0], item[1]))
        return replace(
            state,
            outbox=s.outbox + tuple(new_out),
            pending=tuple(pending),
            next_order=order,
        )

    return AtomicSpec(
        id=SIM_ID,
        input_ports=in_ports,
        output_ports=out_ports,
        kind="attack_sim",
        params=(("targets", tuple(sorted(targets))),),
        space=None,
        initial=start,
        behavior=Behavior(
            ta=ta,
            delta_int=delta_int,
            delta_ext=delta_ext,
            output=output,
            delta_con=None,
            wants_ctx=True,
        ),
    )
