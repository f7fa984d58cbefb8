"""Finite variable spaces and point assignments over them.

A variable space is an ordered list of named variables, each with a finite
value domain; the product of the domains is the assignment universe. State
models, process models and the simulation kernel's component states are all
built on these two types.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterator, Mapping, Sequence, Tuple

Value = Any  # int, str (enumerated symbol) or bool


class SpaceError(ValueError):
    """Malformed variable space."""


class ArityMismatch(ValueError):
    """Assignment arity does not equal the space arity."""


class ValueOutOfDomain(ValueError):
    """Assignment value outside the variable's declared domain."""


@dataclass(frozen=True)
class IntRange:
    """Finite contiguous integer domain [lo, hi]; enumerable but compact."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.hi < self.lo:
            raise SpaceError(f"empty integer range [{self.lo}, {self.hi}]")

    def __contains__(self, value: object) -> bool:
        return isinstance(value, int) and not isinstance(value, bool) and self.lo <= value <= self.hi

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.lo, self.hi + 1))

    def __len__(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class Assignment:
    """One point of a variable space: a value per variable, positionally."""

    values: Tuple[Value, ...]

    def __iter__(self) -> Iterator[Value]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Value:
        return self.values[i]


@dataclass(frozen=True)
class VariableSpace:
    """Ordered (name, finite domain) declarations; the product is the universe."""

    vars: Tuple[Tuple[str, Any], ...]  # domain: tuple of values or IntRange

    def __post_init__(self) -> None:
        names = [n for n, _ in self.vars]
        if len(set(names)) != len(names):
            raise SpaceError(f"duplicate variable names in {names}")
        for name, domain in self.vars:
            if len(domain) == 0:
                raise SpaceError(f"variable {name!r} has an empty domain")

    @staticmethod
    def of(*decls: Tuple[str, Sequence[Value]]) -> "VariableSpace":
        return VariableSpace(tuple(
            (name, dom if isinstance(dom, IntRange) else tuple(dom)) for name, dom in decls
        ))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.vars)

    @property
    def arity(self) -> int:
        return len(self.vars)

    def domain(self, name: str) -> Any:
        return self.vars[self.index(name)][1]

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.vars):
            if n == name:
                return i
        raise KeyError(name)

    def check(self, p: Assignment) -> None:
        """Raise unless p conforms to this space."""
        if len(p) != self.arity:
            raise ArityMismatch(f"expected {self.arity} values, got {len(p)}")
        for (name, domain), value in zip(self.vars, p.values):
            if value not in domain:
                raise ValueOutOfDomain(f"{name}={value!r} not in domain")

    def make(self, **values: Value) -> Assignment:
        missing = set(self.names) - set(values)
        extra = set(values) - set(self.names)
        if missing or extra:
            raise ArityMismatch(f"missing={sorted(missing)} extra={sorted(extra)}")
        p = Assignment(tuple(values[n] for n in self.names))
        self.check(p)
        return p

    def get(self, p: Assignment, name: str) -> Value:
        return p.values[self.index(name)]

    def replace(self, p: Assignment, **updates: Value) -> Assignment:
        vals = list(p.values)
        for name, value in updates.items():
            vals[self.index(name)] = value
        q = Assignment(tuple(vals))
        self.check(q)
        return q

    def as_dict(self, p: Assignment) -> Mapping[str, Value]:
        return dict(zip(self.names, p.values))

    def size(self) -> int:
        n = 1
        for _, domain in self.vars:
            n *= len(domain)
        return n

    def enumerate(self) -> Iterator[Assignment]:
        """All assignments, in domain declaration order (deterministic)."""
        for combo in itertools.product(*(tuple(d) for _, d in self.vars)):
            yield Assignment(combo)
