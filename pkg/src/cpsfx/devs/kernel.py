"""Flattened deterministic abstract simulator for coupled models.

The hierarchy is collapsed at build time into leaf components plus a
leaf-to-leaf routing table, so the run loop is a single imminent-selection
sweep. Within one instant, zero-time-advance chains execute as successive
rounds; simultaneous imminents are ordered lexicographically by component
id and input bags by (sender id, port, message id), making every run a
pure function of (spec, horizon, inputs).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from ..pmi.space import Assignment
from .messages import (
    CONFLUENT_TRANSITION,
    ENV,
    EXTERNAL_TRANSITION,
    INFINITY,
    INTERNAL_TRANSITION,
    MESSAGE_DELIVERED,
    MESSAGE_SENT,
    STATE_CHANGE,
    Message,
    Time,
    TraceEvent,
    as_time,
    time_pair,
)
from .spec import (
    AtomicSpec,
    Behavior,
    CoupledSpec,
    DuplicateLabel,
    Emit,
    Forward,
    validate_coupled,
)


class UnknownPort(ValueError):
    pass


class TimeInPast(ValueError):
    pass


class NonterminatingZeroDelay(RuntimeError):
    """More zero-time rounds at one instant than the configured bound."""


DEFAULT_ZERO_DELAY_BOUND = 10_000


@dataclass(frozen=True)
class _Node:
    direction: str  # "in" | "out"
    component: str
    port: str


@dataclass(frozen=True, order=True)
class Destination:
    physical: Tuple[str, str]
    logical: Tuple[str, str]


def _collect_edges(spec: CoupledSpec, edges: Dict[_Node, List[Tuple[_Node, Optional[Tuple[str, str]]]]]) -> None:
    for cp in spec.couplings:
        if cp.kind == "EIC":
            src = _Node("in", cp.source[0], cp.source[1])
            dst = _Node("in", cp.target[0], cp.target[1])
        elif cp.kind == "IC":
            src = _Node("out", cp.source[0], cp.source[1])
            dst = _Node("in", cp.target[0], cp.target[1])
        else:
            src = _Node("out", cp.source[0], cp.source[1])
            dst = _Node("out", cp.target[0], cp.target[1])
        edges.setdefault(src, []).append((dst, cp.logical_target))
    for child in spec.children:
        if isinstance(child, CoupledSpec):
            _collect_edges(child, edges)


class SimulationSystem:
    """Executable flattened system; confine each instance to one thread."""

    def __init__(self, root: CoupledSpec, zero_delay_bound: int = DEFAULT_ZERO_DELAY_BOUND):
        validate_coupled(root)
        self.root = root
        self.zero_delay_bound = zero_delay_bound
        self.leaves: Dict[str, AtomicSpec] = {}
        self._index_components(root)
        edges: Dict[_Node, List[Tuple[_Node, Optional[Tuple[str, str]]]]] = {}
        _collect_edges(root, edges)
        # Destination = (physical (component, port), logical (component, port));
        # they differ only across an interceptor hop.
        self.routes: Dict[Tuple[str, str], Tuple[Destination, ...]] = {}
        for leaf in self.leaves.values():
            for port in leaf.output_ports:
                self.routes[(leaf.id, port)] = self._resolve(edges, _Node("out", leaf.id, port))
        self.eic_routes: Dict[str, Tuple[Destination, ...]] = {}
        for port in root.input_ports:
            self.eic_routes[port] = self._resolve(edges, _Node("in", root.id, port))
        self._staged: List[Message] = []
        self.clock: Time = Fraction(0)
        # Populated by run(): final state per leaf and every visited state,
        # the latter for confluence audits.
        self.states: Dict[str, Any] = {leaf.id: leaf.initial for leaf in self.leaves.values()}
        self.visited: Dict[str, List[Any]] = {}

    def _index_components(self, root) -> None:
        seen = set()

        def walk(spec) -> None:
            if spec.id in seen:
                raise DuplicateLabel(f"component id {spec.id!r} is not globally unique")
            seen.add(spec.id)
            if isinstance(spec, AtomicSpec):
                self.leaves[spec.id] = spec
            else:
                for child in spec.children:
                    walk(child)

        walk(root)

    def _resolve(self, edges, start: _Node) -> Tuple["Destination", ...]:
        """Terminal destinations (leaf inputs or root outputs) from a node."""
        terminals: List[Destination] = []
        stack: List[Tuple[_Node, Optional[Tuple[str, str]]]] = [(start, None)]
        seen = set()
        while stack:
            node, logical = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            if node is not start:
                if node.direction == "in" and node.component in self.leaves:
                    physical = (node.component, node.port)
                    terminals.append(Destination(physical, logical or physical))
                    continue
                if node.direction == "out" and node.component == self.root.id:
                    physical = (self.root.id, node.port)
                    terminals.append(Destination(physical, logical or physical))
                    continue
            stack.extend(edges.get(node, ()))
        return tuple(sorted(terminals))

    # -- external stimuli ---------------------------------------------------

    def inject_external(self, msg: Message) -> None:
        """Queue a driver message for delivery through an external coupling."""
        comp, port = msg.target
        if comp != self.root.id or port not in self.root.input_ports:
            raise UnknownPort(f"{msg.target!r} is not an input port of {self.root.id!r}")
        if msg.delivery_time < self.clock:
            raise TimeInPast(f"delivery at {msg.delivery_time} precedes clock {self.clock}")
        self._staged.append(msg)

    # -- execution ----------------------------------------------------------

    def run(self, until, external_inputs: Sequence[Tuple[Any, Message]] = ()) -> List[TraceEvent]:
        """Execute from the initial configuration up to and including `until`."""
        horizon = as_time(until)
        if horizon is INFINITY or horizon < 0:
            raise ValueError("finite non-negative horizon required")
        run = _Run(self)
        for msg in self._staged:
            run.enqueue_external(msg)
        for t, msg in sorted(external_inputs, key=lambda pair: as_time(pair[0])):
            when = as_time(t)
            if msg.delivery_time != when:
                msg = Message(
                    msg.msg_type, msg.source, msg.target, msg.fields,
                    min(msg.send_time, when), when, msg.msg_id,
                )
            run.enqueue_external(msg)
        events = run.execute(horizon)
        self.visited = run.visited
        self.states = dict(run.states)
        self.clock = Fraction(0)
        return events


def build_coupled(spec: CoupledSpec, zero_delay_bound: int = DEFAULT_ZERO_DELAY_BOUND) -> SimulationSystem:
    """Validate a coupled spec and return an executable flattened system."""
    return SimulationSystem(spec, zero_delay_bound)


def run(system: SimulationSystem, until, external_inputs: Sequence[Tuple[Any, Message]] = ()):
    return system.run(until, external_inputs)


def inject_external(system: SimulationSystem, msg: Message) -> None:
    system.inject_external(msg)


class RunContext:
    """Instrumentation handle passed to behaviors that declare wants_ctx."""

    def __init__(self, run: "_Run"):
        self._run = run

    @property
    def now(self) -> Fraction:
        return self._run.now

    def alloc_msg_id(self) -> int:
        return self._run.alloc_msg_id()

    def emit_record(self, kind: str, subject: str, detail: Mapping[str, Any]) -> None:
        self._run.log(kind, subject, detail)


class _Run:
    def __init__(self, system: SimulationSystem):
        self.system = system
        self.events: List[TraceEvent] = []
        self._seq = itertools.count()
        self._msg_ids = itertools.count(1)
        self.now: Fraction = Fraction(0)
        self.states: Dict[str, Any] = {}
        self.t_last: Dict[str, Time] = {}
        self.t_next: Dict[str, Time] = {}
        self.visited: Dict[str, List[Any]] = {}
        self._externals: List[Tuple[Time, int, Message]] = []
        self._ext_order = itertools.count()
        self.ctx = RunContext(self)
        for leaf in system.leaves.values():
            state = leaf.initial
            self.states[leaf.id] = state
            self.t_last[leaf.id] = Fraction(0)
            self.t_next[leaf.id] = self._advance(leaf, state, Fraction(0))
            self.visited[leaf.id] = [state]

    # -- bookkeeping ---------------------------------------------------------

    def alloc_msg_id(self) -> int:
        return next(self._msg_ids)

    def log(self, kind: str, subject: str, detail: Mapping[str, Any]) -> None:
        self.events.append(TraceEvent(next(self._seq), self.now, kind, subject, dict(detail)))

    def _advance(self, spec: AtomicSpec, state: Any, at: Time) -> Time:
        ta = as_time(spec.behavior.ta(state))
        if ta is INFINITY:
            return INFINITY
        if ta < 0:
            raise ValueError(f"negative time advance from {spec.id!r}")
        return at + ta

    def _state_detail(self, spec: AtomicSpec, state: Any) -> Mapping[str, Any]:
        if hasattr(state, "trace_detail"):
            return state.trace_detail()
        if spec.space is not None and isinstance(state, Assignment):
            return {"vars": dict(spec.space.as_dict(state))}
        return {"repr": repr(state)}

    def enqueue_external(self, msg: Message) -> None:
        self._externals.append((msg.delivery_time, next(self._ext_order), msg))

    # -- delivery ------------------------------------------------------------

    def _materialize(
        self, msg_type: str, source, target, fields, send_time, delivery_time, msg_id=None
    ) -> Message:
        return Message(
            msg_type, tuple(source), tuple(target), tuple(fields),
            as_time(send_time), as_time(delivery_time),
            self.alloc_msg_id() if msg_id is None else msg_id,
        )

    def _deliver(
        self, msg: Message, sender: str, physical: Tuple[str, str],
        inbox: Dict[str, List[Message]],
    ) -> None:
        self.log(MESSAGE_SENT, sender, {"msg": msg.to_detail()})
        comp = physical[0]
        if comp == self.system.root.id:
            self.log(MESSAGE_DELIVERED, ENV, {"msg": msg.to_detail()})
            return
        self.log(MESSAGE_DELIVERED, comp, {"msg": msg.to_detail()})
        inbox.setdefault(comp, []).append(msg)

    def _route_output(self, comp: str, out: Any, inbox: Dict[str, List[Message]]) -> None:
        key = (comp, out.port)
        if key not in self.system.routes:
            raise UnknownPort(f"{out.port!r} is not an output port of {comp!r}")
        if isinstance(out, Forward):
            for dest in self.system.routes[key]:
                msg = out.message
                if msg.target != dest.logical or msg.delivery_time != self.now:
                    msg = Message(
                        msg.msg_type, msg.source, dest.logical, msg.fields,
                        msg.send_time, self.now, msg.msg_id,
                    )
                self._deliver(msg, comp, dest.physical, inbox)
            return
        if not isinstance(out, Emit):
            raise TypeError(f"output of {comp!r} is not Emit or Forward: {out!r}")
        for dest in self.system.routes[key]:
            msg = self._materialize(
                out.msg_type, (comp, out.port), dest.logical, out.fields, self.now, self.now
            )
            self._deliver(msg, comp, dest.physical, inbox)

    def _route_external(self, msg: Message, inbox: Dict[str, List[Message]]) -> None:
        destinations = self.system.eic_routes.get(msg.target[1], ())
        for dest in destinations:
            copy = self._materialize(
                msg.msg_type, msg.source, dest.logical, msg.fields,
                msg.send_time, self.now,
            )
            self._deliver(copy, ENV, dest.physical, inbox)

    # -- transitions -----------------------------------------------------------

    def _call(self, behavior: Behavior, fn, *args):
        if behavior.wants_ctx:
            return fn(*args, self.ctx)
        return fn(*args)

    def _transition(self, comp: str, imminent: bool, bag: Tuple[Message, ...]) -> None:
        spec = self.system.leaves[comp]
        behavior = spec.behavior
        old = self.states[comp]
        detail: Dict[str, Any] = {"old": self._state_detail(spec, old)}
        if imminent and bag:
            kind = CONFLUENT_TRANSITION
            if behavior.delta_con is not None:
                new = self._call(behavior, behavior.delta_con, old, bag)
            else:
                mid = self._call(behavior, behavior.delta_int, old)
                new = self._call(behavior, behavior.delta_ext, mid, Fraction(0), bag)
            detail["inputs"] = [m.msg_id for m in bag]
        elif imminent:
            kind = INTERNAL_TRANSITION
            new = self._call(behavior, behavior.delta_int, old)
        else:
            kind = EXTERNAL_TRANSITION
            elapsed = self.now - self.t_last[comp]
            new = self._call(behavior, behavior.delta_ext, old, elapsed, bag)
            detail["elapsed"] = list(time_pair(elapsed))
            detail["inputs"] = [m.msg_id for m in bag]
        detail["new"] = self._state_detail(spec, new)
        self.log(kind, comp, detail)
        if new != old:
            self.log(STATE_CHANGE, comp, {
                "old": self._state_detail(spec, old),
                "new": self._state_detail(spec, new),
            })
        self.states[comp] = new
        self.visited[comp].append(new)
        self.t_last[comp] = self.now
        self.t_next[comp] = self._advance(spec, new, self.now)

    # -- main loop -------------------------------------------------------------

    def execute(self, horizon: Time) -> List[TraceEvent]:
        self._externals.sort(key=lambda item: (item[0], item[1]))
        ext_idx = 0
        while True:
            next_internal = min(self.t_next.values(), default=INFINITY)
            next_external = (
                self._externals[ext_idx][0] if ext_idx < len(self._externals) else INFINITY
            )
            t = min(next_internal, next_external)
            if t is INFINITY or t > horizon:
                break
            self.now = t
            inbox: Dict[str, List[Message]] = {}
            while ext_idx < len(self._externals) and self._externals[ext_idx][0] == t:
                self._route_external(self._externals[ext_idx][2], inbox)
                ext_idx += 1
            rounds = 0
            while True:
                imminent = sorted(c for c, tn in self.t_next.items() if tn == t)
                if not imminent and not inbox:
                    break
                rounds += 1
                if rounds > self.system.zero_delay_bound:
                    raise NonterminatingZeroDelay(
                        f"more than {self.system.zero_delay_bound} zero-delay rounds at t={t}"
                    )
                # Imminent outputs are delivered within this round, so a
                # receiver that is itself imminent takes its confluent branch.
                for comp in imminent:
                    spec = self.system.leaves[comp]
                    for out in spec.behavior.output(self.states[comp]):
                        self._route_output(comp, out, inbox)
                imminent_set = set(imminent)
                receivers = sorted(set(inbox) | imminent_set)
                bags = {
                    comp: tuple(sorted(
                        inbox.get(comp, ()),
                        key=lambda m: (m.source[0], m.source[1], m.msg_id or 0),
                    ))
                    for comp in receivers
                }
                inbox = {}
                for comp in receivers:
                    self._transition(comp, comp in imminent_set, bags[comp])
        self.now = horizon
        return self.events
