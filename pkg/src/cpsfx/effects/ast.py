"""Syntax tree for the effect-injection script language.

Positions are carried for diagnostics but excluded from equality, so a
parsed program compares structurally equal to its canonical re-parse.
Expressions are kept in flattened n-ary canonical form for and/or.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

Pos = Tuple[int, int]  # (line, col), 1-based
NO_POS: Pos = (0, 0)

INF = "inf"  # infinite delay marker


@dataclass(frozen=True)
class Symbol:
    """Bare enumerated value, e.g. FORWARD."""

    name: str


LitValue = Union[int, str, Symbol]  # int, quoted string, enumerated symbol


@dataclass(frozen=True)
class Lit:
    value: LitValue
    pos: Pos = field(default=NO_POS, compare=False)


@dataclass(frozen=True)
class FieldRef:
    """Bare name: a field of the message under consideration."""

    name: str
    pos: Pos = field(default=NO_POS, compare=False)


@dataclass(frozen=True)
class StoreRef:
    """Dotted name: observation store (MsgType.field) or state (Component.var)."""

    qualifier: str
    name: str
    pos: Pos = field(default=NO_POS, compare=False)


@dataclass(frozen=True)
class TimeRef:
    """The reserved symbol `time`: the simulation clock."""

    pos: Pos = field(default=NO_POS, compare=False)


Operand = Union[Lit, FieldRef, StoreRef, TimeRef]

CMP_OPS = ("==", "!=", "<", ">", "<=", ">=")


@dataclass(frozen=True)
class Compare:
    op: str
    lhs: Operand
    rhs: Operand
    pos: Pos = field(default=NO_POS, compare=False)


@dataclass(frozen=True)
class Not:
    item: "Expr"
    pos: Pos = field(default=NO_POS, compare=False)


@dataclass(frozen=True)
class And:
    parts: Tuple["Expr", ...]
    pos: Pos = field(default=NO_POS, compare=False)


@dataclass(frozen=True)
class Or:
    parts: Tuple["Expr", ...]
    pos: Pos = field(default=NO_POS, compare=False)


Expr = Union[Compare, Not, And, Or]


@dataclass(frozen=True)
class MessagePattern:
    msg_type: str
    from_comp: str
    to_comp: str
    where: Optional[Expr] = None
    pos: Pos = field(default=NO_POS, compare=False)
    # Token spans of (msg_type, from_comp, to_comp) for diagnostics.
    name_pos: Tuple[Pos, Pos, Pos] = field(default=(NO_POS, NO_POS, NO_POS), compare=False)


@dataclass(frozen=True)
class Generate:
    """Emit a new message when the trigger matches."""

    msg_type: str
    from_comp: str
    to_comp: str
    sets: Tuple[Tuple[str, LitValue], ...]
    pos: Pos = field(default=NO_POS, compare=False)
    name_pos: Tuple[Pos, Pos, Pos] = field(default=(NO_POS, NO_POS, NO_POS), compare=False)


@dataclass(frozen=True)
class Delay:
    """Hold the intercepted message; `inf` discards it (drop)."""

    duration: Union[int, str]  # ticks or INF
    pos: Pos = field(default=NO_POS, compare=False)

    @property
    def is_drop(self) -> bool:
        return self.duration == INF


@dataclass(frozen=True)
class Modify:
    """Drop the original and re-emit it with the listed fields overridden."""

    sets: Tuple[Tuple[str, LitValue], ...]
    pos: Pos = field(default=NO_POS, compare=False)


@dataclass(frozen=True)
class Chain:
    """Apply previously defined effects left-to-right to the same message."""

    members: Tuple[str, ...]
    pos: Pos = field(default=NO_POS, compare=False)


Operator = Union[Generate, Delay, Modify, Chain]


@dataclass(frozen=True)
class EffectDef:
    name: str
    trigger: Optional[MessagePattern]  # None for chain definitions
    operator: Operator
    pos: Pos = field(default=NO_POS, compare=False)


@dataclass(frozen=True)
class ActivationRule:
    kind: str  # "activate" | "deactivate"
    effect: str
    trigger: MessagePattern
    given: Optional[Expr] = None
    pos: Pos = field(default=NO_POS, compare=False)


@dataclass(frozen=True)
class EffectProgram:
    effects: Tuple[EffectDef, ...]
    rules: Tuple[ActivationRule, ...]

    def effect(self, name: str) -> EffectDef:
        for e in self.effects:
            if e.name == name:
                return e
        raise KeyError(name)

    def effect_names(self) -> Tuple[str, ...]:
        return tuple(e.name for e in self.effects)


EMPTY_PROGRAM = EffectProgram((), ())


def chain_trigger(program: EffectProgram, effect: EffectDef) -> Optional[MessagePattern]:
    """Trigger pattern of an effect; for chains, the members' common trigger."""
    if effect.trigger is not None:
        return effect.trigger
    if isinstance(effect.operator, Chain) and effect.operator.members:
        return chain_trigger(program, program.effect(effect.operator.members[0]))
    return None
