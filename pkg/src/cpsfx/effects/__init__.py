"""Effect-injection script language: parsing, validation, formatting."""

from .ast import (
    ActivationRule,
    And,
    Chain,
    Compare,
    Delay,
    EffectDef,
    EffectProgram,
    EMPTY_PROGRAM,
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
    chain_trigger,
)
from .parser import (
    CyclicChain,
    DuplicateEffectName,
    ScriptError,
    ScriptSyntaxError,
    UnknownEffectInChain,
    parse_expression,
    parse_script,
)
from .printer import format_expr, format_pattern, format_program
from .exprs import EvalEnv, MISSING, eval_expr, predicate_from_expression
from .validate import (
    Diagnostic,
    ScenarioDecls,
    TRIGGER_MISMATCH_IN_CHAIN,
    TYPE_MISMATCH,
    UNKNOWN_COMPONENT,
    UNKNOWN_EFFECT,
    UNKNOWN_FIELD,
    UNKNOWN_MESSAGE_TYPE,
    validate,
)
from .generate import random_expr, random_pattern, random_program
