"""Seeded random program generator for round-trip property tests.

Produces canonical syntax trees (flattened and/or chains, no degenerate
single-part conjunctions) so formatting followed by parsing must return a
structurally identical program.
"""

from __future__ import annotations

import random
import string
from typing import List

from .ast import (
    ActivationRule,
    And,
    Chain,
    Compare,
    Delay,
    EffectDef,
    EffectProgram,
    FieldRef,
    Generate,
    INF,
    Lit,
    MessagePattern,
    Modify,
    Not,
    Or,
    StoreRef,
    Symbol,
    TimeRef,
)

_COMPONENTS = ("CarCtrl", "Motor", "ElevatorCtrl", "ATM", "Cust", "Bank", "SensorHub")
_MSG_TYPES = ("MsgMotor", "MsgCar", "MsgBtn", "MsgDoor", "MsgReq", "MsgCash")
_FIELDS = ("cmd", "pos", "dest", "status", "action", "amount")
_SYMBOLS = ("FORWARD", "REVERSE", "REACHED", "READYTOMOVE", "OPEN", "CLOSED", "EJECT")


def _name(rng: random.Random, prefix: str) -> str:
    return f"{prefix}{rng.randrange(1000)}"


def _literal(rng: random.Random):
    roll = rng.random()
    if roll < 0.45:
        return rng.randint(-20, 100)
    if roll < 0.85:
        return Symbol(rng.choice(_SYMBOLS))
    return "".join(rng.choice(string.ascii_letters + " ") for _ in range(rng.randint(1, 8)))


def _operand(rng: random.Random):
    roll = rng.random()
    if roll < 0.35:
        return FieldRef(rng.choice(_FIELDS))
    if roll < 0.55:
        qualifier = rng.choice(_MSG_TYPES + _COMPONENTS)
        return StoreRef(qualifier, rng.choice(_FIELDS))
    if roll < 0.65:
        return TimeRef()
    return Lit(_literal(rng))


def _compare(rng: random.Random) -> Compare:
    return Compare(rng.choice(("==", "!=", "<", ">", "<=", ">=")), _operand(rng), _operand(rng))


def random_expr(rng: random.Random, depth: int = 2):
    if depth <= 0:
        return _compare(rng)
    roll = rng.random()
    if roll < 0.4:
        return _compare(rng)
    if roll < 0.55:
        return Not(random_expr(rng, depth - 1))
    parts = tuple(
        _non(rng, depth - 1, And) if roll < 0.8 else _non(rng, depth - 1, Or)
        for _ in range(rng.randint(2, 3))
    )
    return And(parts) if roll < 0.8 else Or(parts)


def _non(rng: random.Random, depth: int, forbidden):
    """Sub-expression that is not the forbidden connective (keeps trees flat)."""
    while True:
        expr = random_expr(rng, depth)
        if not isinstance(expr, forbidden):
            return expr


def random_pattern(rng: random.Random) -> MessagePattern:
    where = random_expr(rng, 2) if rng.random() < 0.7 else None
    return MessagePattern(
        rng.choice(_MSG_TYPES), rng.choice(_COMPONENTS), rng.choice(_COMPONENTS), where
    )


def _setlist(rng: random.Random):
    count = rng.randint(1, 3)
    names = rng.sample(_FIELDS, count)
    return tuple((name, _literal(rng)) for name in names)


def random_program(rng: random.Random) -> EffectProgram:
    effects: List[EffectDef] = []
    simple: List[EffectDef] = []
    for i in range(rng.randint(0, 6)):
        name = f"E{i}_{rng.randrange(100)}"
        roll = rng.random()
        if roll < 0.35:
            op = Generate(
                rng.choice(_MSG_TYPES), rng.choice(_COMPONENTS), rng.choice(_COMPONENTS),
                _setlist(rng),
            )
        elif roll < 0.55:
            op = Delay(INF)
        elif roll < 0.75:
            op = Delay(rng.randint(0, 50))
        else:
            op = Modify(_setlist(rng))
        effect = EffectDef(name, random_pattern(rng), op)
        effects.append(effect)
        simple.append(effect)
        if len(simple) >= 2 and rng.random() < 0.3:
            members = tuple(e.name for e in rng.sample(simple, rng.randint(2, len(simple))))
            effects.append(EffectDef(f"C{i}_{rng.randrange(100)}", None, Chain(members)))
    rules = []
    if effects:
        for _ in range(rng.randint(0, 3)):
            given = random_expr(rng, 2) if rng.random() < 0.5 else None
            rules.append(
                ActivationRule(
                    rng.choice(("activate", "deactivate")),
                    rng.choice(effects).name,
                    random_pattern(rng),
                    given,
                )
            )
    return EffectProgram(tuple(effects), tuple(rules))
