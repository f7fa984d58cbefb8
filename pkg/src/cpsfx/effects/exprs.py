"""Expression evaluation shared by trigger clauses and safety predicates.

Values compare by kind: symbols against symbol names, integers against
integers, the clock against integers. A reference that cannot be resolved
(nothing observed yet, or incompatible kinds) makes its comparison false
rather than failing the run; resolution errors are the validator's job.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable, Mapping, Optional

from .ast import And, Compare, Expr, FieldRef, Lit, Not, Or, StoreRef, Symbol, TimeRef
from .parser import parse_expression

MISSING = object()


class EvalEnv:
    """Resolution hooks for the three reference kinds."""

    def __init__(
        self,
        fields: Optional[Mapping[str, Any]] = None,
        store: Optional[Callable[[str, str], Any]] = None,
        now: Optional[Fraction] = None,
    ):
        self.fields = fields or {}
        self.store = store
        self.now = now

    def resolve(self, node) -> Any:
        if isinstance(node, Lit):
            return node.value
        if isinstance(node, FieldRef):
            return self.fields.get(node.name, MISSING)
        if isinstance(node, StoreRef):
            if self.store is None:
                return MISSING
            return self.store(node.qualifier, node.name)
        if isinstance(node, TimeRef):
            return self.now if self.now is not None else MISSING
        raise TypeError(f"not an operand: {node!r}")


def _plain(value) -> Any:
    return value.name if isinstance(value, Symbol) else value


def _compare(op: str, lhs, rhs) -> bool:
    if lhs is MISSING or rhs is MISSING:
        return False
    a, b = _plain(lhs), _plain(rhs)
    if isinstance(a, bool) or isinstance(b, bool):
        a, b = bool(a), bool(b)
    elif isinstance(a, (int, Fraction)) != isinstance(b, (int, Fraction)):
        return op == "!="  # incompatible kinds are simply unequal
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if not isinstance(a, (int, Fraction)) or not isinstance(b, (int, Fraction)):
        return False
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    return a >= b


def eval_expr(expr: Expr, env: EvalEnv) -> bool:
    if isinstance(expr, Compare):
        return _compare(expr.op, env.resolve(expr.lhs), env.resolve(expr.rhs))
    if isinstance(expr, Not):
        return not eval_expr(expr.item, env)
    if isinstance(expr, And):
        return all(eval_expr(p, env) for p in expr.parts)
    if isinstance(expr, Or):
        return any(eval_expr(p, env) for p in expr.parts)
    raise TypeError(f"not an expression: {expr!r}")


def predicate_from_expression(text: str) -> Callable[[Mapping[str, Any]], bool]:
    """Compile a boolean expression over variable names into a predicate."""
    expr = parse_expression(text)
    return lambda env: eval_expr(expr, EvalEnv(fields=env))
