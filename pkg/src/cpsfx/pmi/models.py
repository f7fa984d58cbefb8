"""State models, process models and the known/ground connection.

A state model is a surjective partial observation function F from a finite
variable space onto a set of state names. A process model adds a transition
relation. A connection relates a controller's known process model to a
richer ground-truth model whose variable space extends the known one
positionally; inclusion appends fixed defaults, projection truncates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Mapping, Optional, Sequence, Tuple

from .space import Assignment, Value, VariableSpace

WILDCARD = "*"

# Exhaustive construction-time checks are skipped above this universe size.
DESK_SCALE = 100_000


class ModelError(ValueError):
    """Malformed state or process model."""


class ConnectionError_(ValueError):
    """Known and ground models cannot be connected by inclusion/projection."""


class MissingInitialState(ValueError):
    """Reachability check requested on a model without an initial state."""


@dataclass(frozen=True)
class StateModel:
    """(P, F, S): partial observation function over a finite variable space."""

    space: VariableSpace
    states: FrozenSet[str]
    mapping: Mapping[Tuple[Value, ...], str]  # dom(F) -> S, keyed by value tuples

    def __post_init__(self) -> None:
        seen = set()
        for values, state in self.mapping.items():
            self.space.check(Assignment(values))
            if state not in self.states:
                raise ModelError(f"F maps {values!r} to undeclared state {state!r}")
            seen.add(state)
        if seen != set(self.states):
            raise ModelError(f"F is not surjective: no preimage for {sorted(set(self.states) - seen)}")

    @staticmethod
    def from_rows(
        space: VariableSpace,
        states: Sequence[str],
        rows: Sequence[Tuple[Sequence[Value], str]],
    ) -> "StateModel":
        """Build F from wildcard pattern rows, first match wins.

        Each row is (pattern, state) where pattern has one entry per variable,
        either a concrete value or "*". A row that matches no assignment left
        unclaimed by earlier rows is inconsistent and rejected.
        """
        if space.size() > DESK_SCALE:
            raise ModelError("state-model space too large to materialize")
        mapping: Dict[Tuple[Value, ...], str] = {}
        for pattern, state in rows:
            if len(pattern) != space.arity:
                raise ModelError(f"pattern {pattern!r} has wrong arity")
            for i, (entry, (name, domain)) in enumerate(zip(pattern, space.vars)):
                if entry != WILDCARD and entry not in domain:
                    raise ModelError(f"pattern value {entry!r} not in domain of {name!r}")
            claimed = 0
            for p in space.enumerate():
                if p.values in mapping:
                    continue
                if all(e == WILDCARD or e == v for e, v in zip(pattern, p.values)):
                    mapping[p.values] = state
                    claimed += 1
            if claimed == 0:
                raise ModelError(f"row {pattern!r} -> {state!r} is shadowed by earlier rows")
        return StateModel(space, frozenset(states), mapping)

    def observe(self, p: Assignment) -> Optional[str]:
        """F(p) when p is observable, else None."""
        self.space.check(p)
        return self.mapping.get(p.values)

    def preimage(self, state: str) -> Tuple[Assignment, ...]:
        return tuple(
            Assignment(values)
            for values in sorted(self.mapping, key=repr)
            if self.mapping[values] == state
        )


@dataclass(frozen=True)
class ProcessModel:
    """A state model plus a transition relation over its states."""

    state_model: StateModel
    transitions: FrozenSet[Tuple[str, str]]
    initial: Optional[str] = None

    def __post_init__(self) -> None:
        states = self.state_model.states
        for a, b in self.transitions:
            if a not in states or b not in states:
                raise ModelError(f"transition ({a!r}, {b!r}) leaves the state set")
        if self.initial is not None and self.initial not in states:
            raise ModelError(f"initial state {self.initial!r} not in state set")

    @property
    def space(self) -> VariableSpace:
        return self.state_model.space

    @property
    def states(self) -> FrozenSet[str]:
        return self.state_model.states


@dataclass(frozen=True)
class Connection:
    """Known and ground process models connected by inclusion and projection.

    The ground space extends the known space positionally: the first m
    variables coincide by name with known domains included in ground
    domains; `defaults` fixes the trailing ground variables for inclusion.
    """

    known: ProcessModel
    ground: ProcessModel
    defaults: Mapping[str, Value]
    # Optional map: ground variable name -> (component id, runtime var name),
    # used when assembling ground assignments from simulation traces.
    sources: Mapping[str, Tuple[str, str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ks, gs = self.known.space, self.ground.space
        m, n = ks.arity, gs.arity
        if n <= m:
            raise ConnectionError_(f"ground arity {n} must exceed known arity {m}")
        for i in range(m):
            kname, kdom = ks.vars[i]
            gname, gdom = gs.vars[i]
            if kname != gname:
                raise ConnectionError_(f"variable order mismatch at {i}: {kname!r} vs {gname!r}")
            if not all(v in gdom for v in kdom):
                raise ConnectionError_(f"known domain of {kname!r} not included in ground domain")
        extra_names = [name for name, _ in gs.vars[m:]]
        if set(self.defaults) != set(extra_names):
            raise ConnectionError_(
                f"defaults must cover exactly the extra ground variables {extra_names}"
            )
        for name in extra_names:
            if self.defaults[name] not in gs.domain(name):
                raise ConnectionError_(f"default for {name!r} outside its domain")
        if ks.size() <= DESK_SCALE:
            for p in ks.enumerate():
                if self.project(self.include(p)) != p:
                    raise ConnectionError_("projection does not invert inclusion")

    @property
    def shared_arity(self) -> int:
        return self.known.space.arity

    def include(self, p: Assignment) -> Assignment:
        """iota: append the fixed defaults to a known assignment."""
        self.known.space.check(p)
        extra = tuple(self.defaults[name] for name, _ in self.ground.space.vars[self.shared_arity:])
        q = Assignment(p.values + extra)
        self.ground.space.check(q)
        return q

    def project(self, p: Assignment) -> Optional[Assignment]:
        """pi: positional truncation, defined only inside the known universe."""
        self.ground.space.check(p)
        head = p.values[: self.shared_arity]
        for value, (_, domain) in zip(head, self.known.space.vars):
            if value not in domain:
                return None
        return Assignment(head)


@dataclass(frozen=True)
class SafetyProperty:
    """Named total predicate over a ground variable space."""

    name: str
    predicate: Callable[[Mapping[str, Value]], bool] = field(compare=False)
    # Textual form, when built from an expression; used for equality/reports.
    rule: str = ""

    def holds(self, space: VariableSpace, p: Assignment) -> bool:
        return bool(self.predicate(space.as_dict(p)))


def check_safety_consistency(
    prop: SafetyProperty, model: ProcessModel
) -> None:
    """Two assignments observed as the same state must agree on the property."""
    space = model.space
    if space.size() > DESK_SCALE:
        return
    verdicts: Dict[str, bool] = {}
    for values, state in model.state_model.mapping.items():
        v = prop.holds(space, Assignment(values))
        if state in verdicts and verdicts[state] != v:
            raise ModelError(
                f"safety property {prop.name!r} is inconsistent on state {state!r}"
            )
        verdicts.setdefault(state, v)


@dataclass(frozen=True)
class ModelDiff:
    """Exact set differences between ground-truth and known models."""

    forced_states: FrozenSet[str]
    forced_transitions: FrozenSet[Tuple[str, str]]
    incorrect_states: FrozenSet[str]
    incorrect_transitions: FrozenSet[Tuple[str, str]]

    @property
    def incomplete(self) -> bool:
        return bool(self.forced_states or self.forced_transitions)

    @property
    def incorrect(self) -> bool:
        return bool(self.incorrect_states or self.incorrect_transitions)
