"""Resolution and type checks of a parsed program against scenario declarations.

All problems come back as diagnostics with positions; nothing is thrown.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, List, Mapping, Optional

from ..pmi.space import IntRange
from .ast import (
    ActivationRule,
    And,
    Chain,
    Compare,
    EffectDef,
    EffectProgram,
    FieldRef,
    Generate,
    Lit,
    MessagePattern,
    Modify,
    Not,
    Or,
    Pos,
    StoreRef,
    Symbol,
    TimeRef,
    chain_trigger,
)

UNKNOWN_COMPONENT = "UnknownComponent"
UNKNOWN_MESSAGE_TYPE = "UnknownMessageType"
UNKNOWN_FIELD = "UnknownField"
UNKNOWN_EFFECT = "UnknownEffect"
TRIGGER_MISMATCH_IN_CHAIN = "TriggerMismatchInChain"
TYPE_MISMATCH = "TypeMismatch"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.code}: {self.message}"


@dataclass(frozen=True)
class ScenarioDecls:
    """What a scenario declares: components, message types, state variables."""

    components: frozenset
    message_types: Mapping[str, Mapping[str, Any]]  # type -> field -> domain
    state_vars: Mapping[str, Mapping[str, Any]]  # component -> var -> domain


def _domain_kind(domain) -> str:
    if isinstance(domain, IntRange):
        return "int"
    if domain and all(isinstance(v, str) for v in domain):
        return "sym"
    return "int" if all(isinstance(v, int) for v in domain) else "mixed"


class _Validator:
    def __init__(self, program: EffectProgram, decls: ScenarioDecls):
        self.program = program
        self.decls = decls
        self.diagnostics: List[Diagnostic] = []

    def report(self, code: str, message: str, pos: Pos) -> None:
        self.diagnostics.append(Diagnostic(code, message, pos[0], pos[1]))

    def run(self) -> List[Diagnostic]:
        for effect in self.program.effects:
            if isinstance(effect.operator, Chain):
                self.check_chain(effect)
            else:
                self.check_pattern(effect.trigger)
                self.check_operator(effect)
        for rule in self.program.rules:
            self.check_rule(rule)
        return self.diagnostics

    # -- components / types ----------------------------------------------------

    def check_component(self, name: str, pos: Pos) -> None:
        if name not in self.decls.components:
            self.report(UNKNOWN_COMPONENT, f"unknown component {name!r}", pos)

    def check_msg_type(self, name: str, pos: Pos) -> Optional[Mapping[str, Any]]:
        fields = self.decls.message_types.get(name)
        if fields is None:
            self.report(UNKNOWN_MESSAGE_TYPE, f"unknown message type {name!r}", pos)
        return fields

    def check_pattern(self, pattern: MessagePattern) -> None:
        type_pos, from_pos, to_pos = pattern.name_pos
        fields = self.check_msg_type(pattern.msg_type, type_pos)
        self.check_component(pattern.from_comp, from_pos)
        self.check_component(pattern.to_comp, to_pos)
        if pattern.where is not None:
            self.check_expr(pattern.where, fields or {})

    def check_operator(self, effect: EffectDef) -> None:
        op = effect.operator
        if isinstance(op, Generate):
            type_pos, from_pos, to_pos = op.name_pos
            fields = self.check_msg_type(op.msg_type, type_pos)
            self.check_component(op.from_comp, from_pos)
            self.check_component(op.to_comp, to_pos)
            if fields is not None:
                self.check_sets(op.sets, fields, op.msg_type, op.pos)
        elif isinstance(op, Modify):
            trigger_fields = self.decls.message_types.get(effect.trigger.msg_type)
            if trigger_fields is not None:
                self.check_sets(op.sets, trigger_fields, effect.trigger.msg_type, op.pos)

    def check_sets(self, sets, fields: Mapping[str, Any], type_name: str, pos: Pos) -> None:
        for name, value in sets:
            if name not in fields:
                self.report(
                    UNKNOWN_FIELD, f"message type {type_name!r} has no field {name!r}", pos
                )
                continue
            self.check_value(value, fields[name], f"field {name!r} of {type_name!r}", pos)

    def check_value(self, value, domain, what: str, pos: Pos) -> None:
        kind = _domain_kind(domain)
        if isinstance(value, Symbol):
            if kind != "sym" or value.name not in domain:
                self.report(TYPE_MISMATCH, f"{value.name} is not a value of {what}", pos)
        elif isinstance(value, int):
            if kind != "int" or value not in domain:
                self.report(TYPE_MISMATCH, f"{value} is outside the domain of {what}", pos)
        else:
            self.report(TYPE_MISMATCH, f"string value not allowed for {what}", pos)

    def check_chain(self, effect: EffectDef) -> None:
        op = effect.operator
        reference = None
        for member_name in op.members:
            try:
                member = self.program.effect(member_name)
            except KeyError:
                self.report(UNKNOWN_EFFECT, f"unknown effect {member_name!r}", op.pos)
                continue
            trigger = chain_trigger(self.program, member)
            if reference is None:
                reference = trigger
            elif trigger != reference:
                self.report(
                    TRIGGER_MISMATCH_IN_CHAIN,
                    f"chain {effect.name!r}: member {member_name!r} has a different trigger",
                    op.pos,
                )

    def check_rule(self, rule: ActivationRule) -> None:
        if rule.effect not in self.program.effect_names():
            self.report(UNKNOWN_EFFECT, f"unknown effect {rule.effect!r}", rule.pos)
        self.check_pattern(rule.trigger)
        if rule.given is not None:
            fields = self.decls.message_types.get(rule.trigger.msg_type, {})
            self.check_expr(rule.given, fields)

    # -- expressions -------------------------------------------------------------

    def operand_domain(self, node, fields: Mapping[str, Any]):
        """(kind, domain) of an operand; reports resolution failures."""
        if isinstance(node, Lit):
            if isinstance(node.value, Symbol):
                return ("sym", (node.value.name,))
            if isinstance(node.value, int):
                return ("int", None)
            return ("str", None)
        if isinstance(node, TimeRef):
            return ("int", None)
        if isinstance(node, FieldRef):
            if node.name not in fields:
                self.report(
                    UNKNOWN_FIELD, f"no field {node.name!r} on the trigger message", node.pos
                )
                return None
            domain = fields[node.name]
            return (_domain_kind(domain), domain)
        if isinstance(node, StoreRef):
            if node.qualifier in self.decls.message_types:
                fields2 = self.decls.message_types[node.qualifier]
                if node.name not in fields2:
                    self.report(
                        UNKNOWN_FIELD,
                        f"message type {node.qualifier!r} has no field {node.name!r}",
                        node.pos,
                    )
                    return None
                domain = fields2[node.name]
                return (_domain_kind(domain), domain)
            if node.qualifier in self.decls.components:
                vars2 = self.decls.state_vars.get(node.qualifier, {})
                if node.name not in vars2:
                    self.report(
                        UNKNOWN_FIELD,
                        f"component {node.qualifier!r} has no state variable {node.name!r}",
                        node.pos,
                    )
                    return None
                domain = vars2[node.name]
                return (_domain_kind(domain), domain)
            self.report(
                UNKNOWN_COMPONENT,
                f"{node.qualifier!r} is neither a message type nor a component",
                node.pos,
            )
            return None
        raise TypeError(f"not an operand: {node!r}")

    def check_expr(self, expr, fields: Mapping[str, Any]) -> None:
        if isinstance(expr, Compare):
            lhs = self.operand_domain(expr.lhs, fields)
            rhs = self.operand_domain(expr.rhs, fields)
            if lhs is None or rhs is None:
                return
            (lk, ld), (rk, rd) = lhs, rhs
            if lk != rk:
                self.report(
                    TYPE_MISMATCH, f"cannot compare {lk} value with {rk} value", expr.pos
                )
                return
            if expr.op in ("<", ">", "<=", ">=") and lk != "int":
                self.report(TYPE_MISMATCH, f"ordering comparison on {lk} values", expr.pos)
                return
            # A symbol literal must belong to the domain it is compared against.
            for (kind, domain), (_, other) in ((lhs, rhs), (rhs, lhs)):
                if kind == "sym" and domain is not None and other is not None \
                        and len(domain) == 1 and not isinstance(other, IntRange) \
                        and len(other) > 1 and domain[0] not in other:
                    self.report(
                        TYPE_MISMATCH,
                        f"symbol {domain[0]} is not a declared value here",
                        expr.pos,
                    )
        elif isinstance(expr, Not):
            self.check_expr(expr.item, fields)
        elif isinstance(expr, (And, Or)):
            for part in expr.parts:
                self.check_expr(part, fields)
        else:
            raise TypeError(f"not an expression: {expr!r}")


def validate(program: EffectProgram, decls: ScenarioDecls) -> List[Diagnostic]:
    """All resolution and typing problems; an empty list means ok."""
    return _Validator(program, decls).run()
