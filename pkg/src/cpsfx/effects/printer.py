"""Canonical pretty-printer; parse(format(p)) is the identity on programs."""

from __future__ import annotations

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
    Lit,
    MessagePattern,
    Modify,
    Not,
    Or,
    StoreRef,
    Symbol,
    TimeRef,
)

_PREC_OR, _PREC_AND, _PREC_NOT, _PREC_ATOM = 1, 2, 3, 4


def _literal(value) -> str:
    if isinstance(value, Symbol):
        return value.name
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return f'"{value}"'


def _operand(node) -> str:
    if isinstance(node, Lit):
        return _literal(node.value)
    if isinstance(node, FieldRef):
        return node.name
    if isinstance(node, StoreRef):
        return f"{node.qualifier}.{node.name}"
    if isinstance(node, TimeRef):
        return "time"
    raise TypeError(f"not an operand: {node!r}")


def _prec(node) -> int:
    if isinstance(node, Or):
        return _PREC_OR
    if isinstance(node, And):
        return _PREC_AND
    if isinstance(node, Not):
        return _PREC_NOT
    return _PREC_ATOM


def format_expr(node, parent_prec: int = 0) -> str:
    prec = _prec(node)
    if isinstance(node, Or):
        text = " or ".join(format_expr(p, _PREC_OR) for p in node.parts)
    elif isinstance(node, And):
        text = " and ".join(format_expr(p, _PREC_AND) for p in node.parts)
    elif isinstance(node, Not):
        text = f"not {format_expr(node.item, _PREC_NOT)}"
    elif isinstance(node, Compare):
        text = f"{_operand(node.lhs)} {node.op} {_operand(node.rhs)}"
    else:
        raise TypeError(f"not an expression: {node!r}")
    # Redundant parentheses are dropped; only lower-precedence children keep them.
    if prec < parent_prec:
        return f"({text})"
    return text


def _setlist(sets) -> str:
    return ", ".join(f"{name} = {_literal(value)}" for name, value in sets)


def format_pattern(pattern: MessagePattern) -> str:
    text = f"msg {pattern.msg_type} from {pattern.from_comp} to {pattern.to_comp}"
    if pattern.where is not None:
        text += f" where {format_expr(pattern.where)}"
    return text


def _operator(op) -> str:
    if isinstance(op, Generate):
        return (
            f"generate msg {op.msg_type} from {op.from_comp} to {op.to_comp} "
            f"with {_setlist(op.sets)}"
        )
    if isinstance(op, Delay):
        return "drop" if op.is_drop else f"delay {op.duration}"
    if isinstance(op, Modify):
        return f"modify {_setlist(op.sets)}"
    raise TypeError(f"not a printable operator: {op!r}")


def format_effect(effect: EffectDef) -> str:
    if isinstance(effect.operator, Chain):
        members = ", ".join(effect.operator.members)
        return f"effect {effect.name} = chain({members});"
    return f"effect {effect.name} on {format_pattern(effect.trigger)} {_operator(effect.operator)};"


def format_rule(rule: ActivationRule) -> str:
    text = f"{rule.kind} {rule.effect} on {format_pattern(rule.trigger)}"
    if rule.given is not None:
        text += f" given {format_expr(rule.given)}"
    return text + ";"


def format_program(program: EffectProgram) -> str:
    lines = [format_effect(e) for e in program.effects]
    lines.extend(format_rule(r) for r in program.rules)
    return "\n".join(lines) + ("\n" if lines else "")
