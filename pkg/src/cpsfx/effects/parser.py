"""Lexer and recursive-descent parser for effect scripts.

Any byte sequence either parses to a program or raises exactly one
ScriptSyntaxError pointing inside the offending token; no partial syntax
trees escape. `drop` parses directly to an infinite delay; all-caps
identifiers are enumerated-symbol literals inside expressions but are
accepted as ordinary identifiers in name positions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .ast import (
    ActivationRule,
    And,
    Chain,
    CMP_OPS,
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
    Pos,
    StoreRef,
    Symbol,
    TimeRef,
)


class ScriptError(ValueError):
    """Base for parse-level failures; carries a 1-based position."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.reason = message


class ScriptSyntaxError(ScriptError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        detail = f"expected {expected}" + (f", found {found}" if found else "")
        super().__init__(line, col, detail)
        self.expected = expected
        self.found = found


class DuplicateEffectName(ScriptError):
    pass


class UnknownEffectInChain(ScriptError):
    pass


class CyclicChain(ScriptError):
    pass


KEYWORDS = {
    "effect", "on", "msg", "from", "to", "where", "generate", "with",
    "drop", "delay", "modify", "chain", "activate", "deactivate", "given",
    "and", "or", "not", "inf", "time",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<op>==|!=|<=|>=|<|>|=|,|\(|\)|;|\.)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | name | symbol | int | string | op | eof
    value: str
    line: int
    col: int

    @property
    def pos(self) -> Pos:
        return (self.line, self.col)


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ScriptSyntaxError(line, col, "a token", repr(text[i]))
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            col = 1
            i = m.end()
            continue
        if kind not in ("ws", "comment"):
            if kind == "ident":
                if value in KEYWORDS:
                    tk = "keyword"
                elif re.fullmatch(r"[A-Z][A-Z0-9_]*", value):
                    tk = "symbol"
                else:
                    tk = "name"
                tokens.append(Token(tk, value, line, col))
            else:
                tokens.append(Token(kind, value, line, col))
        col += len(value)
        i = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.i = 0
        self.defined: Dict[str, EffectDef] = {}

    # -- token plumbing ------------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, expected: str) -> None:
        tok = self.cur
        found = tok.value or "end of input"
        raise ScriptSyntaxError(tok.line, tok.col, expected, repr(found))

    def expect_kw(self, word: str) -> Token:
        if self.cur.kind == "keyword" and self.cur.value == word:
            return self.advance()
        self.fail(f"'{word}'")

    def expect_op(self, op: str) -> Token:
        if self.cur.kind == "op" and self.cur.value == op:
            return self.advance()
        self.fail(f"'{op}'")

    def at_kw(self, *words: str) -> bool:
        return self.cur.kind == "keyword" and self.cur.value in words

    def at_op(self, op: str) -> bool:
        return self.cur.kind == "op" and self.cur.value == op

    def ident(self, what: str) -> Token:
        # Names and all-caps symbols are both valid identifiers.
        if self.cur.kind in ("name", "symbol"):
            return self.advance()
        self.fail(what)

    # -- grammar ---------------------------------------------------------------

    def program(self) -> EffectProgram:
        effects: List[EffectDef] = []
        rules: List[ActivationRule] = []
        while self.cur.kind != "eof":
            if self.at_kw("effect"):
                effects.append(self.effectdef())
            elif self.at_kw("activate", "deactivate"):
                rules.append(self.ruledef())
            else:
                self.fail("'effect', 'activate' or 'deactivate'")
        return EffectProgram(tuple(effects), tuple(rules))

    def effectdef(self) -> EffectDef:
        start = self.expect_kw("effect")
        name_tok = self.ident("an effect name")
        name = name_tok.value
        if name in self.defined:
            raise DuplicateEffectName(
                name_tok.line, name_tok.col, f"effect {name!r} already defined"
            )
        if self.at_op("="):
            self.advance()
            self.expect_kw("chain")
            self.expect_op("(")
            members = [self.chain_member(name)]
            while self.at_op(","):
                self.advance()
                members.append(self.chain_member(name))
            self.expect_op(")")
            self.expect_op(";")
            effect = EffectDef(name, None, Chain(tuple(members), start.pos), pos=start.pos)
        else:
            self.expect_kw("on")
            trigger = self.pattern()
            operator = self.operator()
            self.expect_op(";")
            effect = EffectDef(name, trigger, operator, pos=start.pos)
        self.defined[name] = effect
        return effect

    def chain_member(self, owner: str) -> str:
        tok = self.ident("a previously defined effect name")
        if tok.value == owner:
            raise CyclicChain(tok.line, tok.col, f"chain {owner!r} references itself")
        if tok.value not in self.defined:
            raise UnknownEffectInChain(
                tok.line, tok.col, f"chain member {tok.value!r} is not defined yet"
            )
        return tok.value

    def ruledef(self) -> ActivationRule:
        kind_tok = self.advance()
        effect = self.ident("an effect name").value
        self.expect_kw("on")
        trigger = self.pattern()
        given = None
        if self.at_kw("given"):
            self.advance()
            given = self.expr()
        self.expect_op(";")
        return ActivationRule(kind_tok.value, effect, trigger, given, pos=kind_tok.pos)

    def pattern(self) -> MessagePattern:
        start = self.expect_kw("msg")
        msg_type = self.ident("a message type")
        self.expect_kw("from")
        from_comp = self.ident("a component id")
        self.expect_kw("to")
        to_comp = self.ident("a component id")
        where = None
        if self.at_kw("where"):
            self.advance()
            where = self.expr()
        return MessagePattern(
            msg_type.value, from_comp.value, to_comp.value, where,
            pos=start.pos, name_pos=(msg_type.pos, from_comp.pos, to_comp.pos),
        )

    def operator(self):
        if self.at_kw("generate"):
            start = self.advance()
            self.expect_kw("msg")
            msg_type = self.ident("a message type")
            self.expect_kw("from")
            from_comp = self.ident("a component id")
            self.expect_kw("to")
            to_comp = self.ident("a component id")
            self.expect_kw("with")
            sets = self.setlist()
            return Generate(
                msg_type.value, from_comp.value, to_comp.value, sets,
                pos=start.pos, name_pos=(msg_type.pos, from_comp.pos, to_comp.pos),
            )
        if self.at_kw("drop"):
            start = self.advance()
            return Delay(INF, pos=start.pos)
        if self.at_kw("delay"):
            start = self.advance()
            if self.at_kw("inf"):
                self.advance()
                return Delay(INF, pos=start.pos)
            if self.cur.kind == "int":
                tok = self.advance()
                value = int(tok.value)
                if value < 0:
                    raise ScriptSyntaxError(tok.line, tok.col, "a non-negative duration", tok.value)
                return Delay(value, pos=start.pos)
            self.fail("a duration in ticks or 'inf'")
        if self.at_kw("modify"):
            start = self.advance()
            return Modify(self.setlist(), pos=start.pos)
        self.fail("'generate', 'drop', 'delay' or 'modify'")

    def setlist(self) -> Tuple[Tuple[str, object], ...]:
        sets = [self.setting()]
        while self.at_op(","):
            self.advance()
            sets.append(self.setting())
        return tuple(sets)

    def setting(self) -> Tuple[str, object]:
        name = self.ident("a field name")
        self.expect_op("=")
        return (name.value, self.literal())

    def literal(self):
        tok = self.cur
        if tok.kind == "int":
            self.advance()
            return int(tok.value)
        if tok.kind == "string":
            self.advance()
            return tok.value[1:-1]
        if tok.kind == "symbol":
            self.advance()
            return Symbol(tok.value)
        self.fail("an integer, quoted string or symbol")

    # -- expressions -------------------------------------------------------------

    def expr(self):
        return self.or_expr()

    def or_expr(self):
        first = self.and_expr()
        if not self.at_kw("or"):
            return first
        parts = [first]
        while self.at_kw("or"):
            self.advance()
            parts.append(self.and_expr())
        return Or(tuple(parts), pos=parts[0].pos)

    def and_expr(self):
        first = self.not_expr()
        if not self.at_kw("and"):
            return first
        parts = [first]
        while self.at_kw("and"):
            self.advance()
            parts.append(self.not_expr())
        return And(tuple(parts), pos=parts[0].pos)

    def not_expr(self):
        if self.at_kw("not"):
            start = self.advance()
            return Not(self.not_expr(), pos=start.pos)
        return self.primary()

    def primary(self):
        if self.at_op("("):
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        lhs = self.operand()
        if self.cur.kind == "op" and self.cur.value in CMP_OPS:
            op = self.advance().value
            rhs = self.operand()
            return Compare(op, lhs, rhs, pos=lhs.pos)
        self.fail("a comparison operator")

    def operand(self):
        tok = self.cur
        if tok.kind == "int":
            self.advance()
            return Lit(int(tok.value), pos=tok.pos)
        if tok.kind == "string":
            self.advance()
            return Lit(tok.value[1:-1], pos=tok.pos)
        if tok.kind == "keyword" and tok.value == "time":
            self.advance()
            return TimeRef(pos=tok.pos)
        if tok.kind in ("name", "symbol"):
            self.advance()
            if self.at_op("."):
                self.advance()
                attr = self.ident("a field or variable name")
                return StoreRef(tok.value, attr.value, pos=tok.pos)
            if tok.kind == "symbol":
                return Lit(Symbol(tok.value), pos=tok.pos)
            return FieldRef(tok.value, pos=tok.pos)
        self.fail("an operand")


def parse_script(text: str) -> EffectProgram:
    """Parse UTF-8 script text into a program, or raise one ScriptError."""
    return _Parser(tokenize(text)).program()


def parse_expression(text: str):
    """Parse a standalone boolean expression (shared with safety rules)."""
    parser = _Parser(tokenize(text))
    expr = parser.expr()
    if parser.cur.kind != "eof":
        parser.fail("end of expression")
    return expr
