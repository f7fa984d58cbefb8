"""Script language: parsing, validation, canonical formatting."""

import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpsfx.effects import (
    ActivationRule,
    And,
    Chain,
    Compare,
    CyclicChain,
    Delay,
    DuplicateEffectName,
    EffectDef,
    EffectProgram,
    FieldRef,
    Generate,
    INF,
    Lit,
    MessagePattern,
    Modify,
    ScenarioDecls,
    ScriptError,
    ScriptSyntaxError,
    StoreRef,
    Symbol,
    TRIGGER_MISMATCH_IN_CHAIN,
    UNKNOWN_COMPONENT,
    UnknownEffectInChain,
    format_program,
    parse_script,
    random_program,
    validate,
)
from cpsfx.pmi import IntRange

H5_PATH = Path(__file__).resolve().parents[1] / "src/cpsfx/scenarios/data/h5.fx"

FORWARD_TRIGGER = MessagePattern(
    "MsgMotor", "CarCtrl", "Motor",
    Compare("==", FieldRef("cmd"), Lit(Symbol("FORWARD"))),
)

H5_EXPECTED = EffectProgram(
    effects=(
        EffectDef(
            "H5_0", FORWARD_TRIGGER,
            Generate("MsgMotor", "Motor", "CarCtrl", (("cmd", Symbol("REACHED")),)),
        ),
        EffectDef("H5_1", FORWARD_TRIGGER, Delay(INF)),
        EffectDef("H5", None, Chain(("H5_0", "H5_1"))),
    ),
    rules=(
        ActivationRule(
            "activate", "H5",
            MessagePattern(
                "MsgCar", "CarCtrl", "ElevatorCtrl",
                And((
                    Compare("==", FieldRef("status"), Lit(Symbol("READYTOMOVE"))),
                    Compare("==", FieldRef("pos"), Lit(1)),
                )),
            ),
            Compare("==", StoreRef("MsgBtn", "dest"), Lit(3)),
        ),
    ),
)


def elevator_decls() -> ScenarioDecls:
    return ScenarioDecls(
        components=frozenset({"CarCtrl", "Motor", "ElevatorCtrl", "CarBtn", "CarDoor"}),
        message_types={
            "MsgMotor": {"cmd": ("FORWARD", "REVERSE", "STOP", "PASSED", "REACHED")},
            "MsgCar": {
                "status": ("READYTOMOVE", "ARRIVED", "STOPPEDAT", "SERVICED"),
                "pos": IntRange(1, 5),
            },
            "MsgBtn": {"dest": IntRange(0, 5)},
            "MsgReq": {"dest": IntRange(0, 5)},
            "MsgDoor": {"cmd": ("OPEN", "CLOSE", "NONE"), "status": ("OPEN", "CLOSED", "NONE")},
        },
        state_vars={"CarCtrl": {"pos": IntRange(1, 5)}},
    )


class TestParse:
    def test_h5_script_parses_to_documented_ast(self):
        program = parse_script(H5_PATH.read_text())
        assert program == H5_EXPECTED
        assert len(program.effects) + len(program.rules) == 4

    def test_empty_input_is_empty_program(self):
        program = parse_script("")
        assert program == EffectProgram((), ())

    def test_comments_only(self):
        assert parse_script("# nothing\n  # here\n") == EffectProgram((), ())

    def test_self_chain_is_cyclic(self):
        with pytest.raises(CyclicChain):
            parse_script("effect E = chain(E);")

    def test_unknown_chain_member(self):
        with pytest.raises(UnknownEffectInChain):
            parse_script("effect E = chain(F);")

    def test_duplicate_effect_name(self):
        text = (
            "effect E on msg M from A to B drop;\n"
            "effect E on msg M from A to B drop;\n"
        )
        with pytest.raises(DuplicateEffectName):
            parse_script(text)

    def test_syntax_error_carries_position(self):
        with pytest.raises(ScriptSyntaxError) as err:
            parse_script("effect E on msg M from A to B zap;")
        assert err.value.line == 1
        assert err.value.col == 31

    def test_drop_parses_as_infinite_delay(self):
        program = parse_script("effect E on msg M from A to B drop;")
        op = program.effects[0].operator
        assert isinstance(op, Delay) and op.is_drop

    def test_delay_duration_forms(self):
        program = parse_script(
            "effect E on msg M from A to B delay 7;\n"
            "effect F on msg M from A to B delay inf;\n"
        )
        assert program.effects[0].operator == Delay(7)
        assert program.effects[1].operator == Delay(INF)

    def test_modify_statement(self):
        program = parse_script('effect E on msg M from A to B modify cmd = STOP, pos = 2;')
        assert program.effects[0].operator == Modify((("cmd", Symbol("STOP")), ("pos", 2)))


class TestValidate:
    def test_h5_against_elevator_declarations_is_clean(self):
        program = parse_script(H5_PATH.read_text())
        assert validate(program, elevator_decls()) == []

    def test_component_typo_flagged(self):
        text = H5_PATH.read_text().replace("CarCtrl", "CarCtl")
        diagnostics = validate(parse_script(text), elevator_decls())
        assert any(d.code == UNKNOWN_COMPONENT for d in diagnostics)
        assert all(d.line >= 1 and d.col >= 1 for d in diagnostics)

    def test_diagnostic_points_at_offending_token(self):
        #         1         2         3
        # 123456789012345678901234567890123456
        text = "effect E on msg MsgMotor from Ghost to Motor drop;"
        (diagnostic,) = validate(parse_script(text), elevator_decls())
        assert diagnostic.code == UNKNOWN_COMPONENT
        assert diagnostic.line == 1
        assert diagnostic.col == text.index("Ghost") + 1

    def test_chain_trigger_mismatch_is_one_diagnostic(self):
        text = H5_PATH.read_text().replace(
            "effect H5_1 on msg MsgMotor from CarCtrl to Motor where cmd == FORWARD",
            "effect H5_1 on msg MsgMotor from CarCtrl to Motor where cmd == REVERSE",
        )
        diagnostics = validate(parse_script(text), elevator_decls())
        mismatches = [d for d in diagnostics if d.code == TRIGGER_MISMATCH_IN_CHAIN]
        assert len(mismatches) == 1

    def test_type_mismatch_on_symbol_outside_domain(self):
        text = "effect E on msg MsgMotor from CarCtrl to Motor where cmd == SIDEWAYS drop;"
        diagnostics = validate(parse_script(text), elevator_decls())
        assert any(d.code == "TypeMismatch" for d in diagnostics)

    def test_unknown_field_in_where(self):
        text = "effect E on msg MsgMotor from CarCtrl to Motor where speed == 3 drop;"
        diagnostics = validate(parse_script(text), elevator_decls())
        assert any(d.code == "UnknownField" for d in diagnostics)

    def test_given_clause_resolves_state_variables(self):
        clean = (
            "effect E on msg MsgMotor from CarCtrl to Motor drop;\n"
            "activate E on msg MsgMotor from CarCtrl to Motor given CarCtrl.pos == 1;\n"
        )
        assert validate(parse_script(clean), elevator_decls()) == []
        broken = clean.replace("CarCtrl.pos", "CarCtrl.altitude")
        diagnostics = validate(parse_script(broken), elevator_decls())
        assert any(d.code == "UnknownField" for d in diagnostics)

    def test_unknown_store_qualifier(self):
        text = (
            "effect E on msg MsgMotor from CarCtrl to Motor drop;\n"
            "activate E on msg MsgMotor from CarCtrl to Motor given Nobody.x == 1;\n"
        )
        diagnostics = validate(parse_script(text), elevator_decls())
        assert any(d.code == UNKNOWN_COMPONENT for d in diagnostics)


class TestFormat:
    def test_h5_round_trip(self):
        program = parse_script(H5_PATH.read_text())
        assert parse_script(format_program(program)) == program

    def test_redundant_parens_canonicalized(self):
        text = "effect E on msg M from A to B where ((a == 1)) and (b == 2) drop;"
        program = parse_script(text)
        canon = format_program(program)
        assert "((" not in canon
        assert parse_script(canon) == program

    def test_randomized_round_trip(self, seed):
        rng = random.Random(seed + 10)
        for _ in range(200):
            program = random_program(rng)
            assert parse_script(format_program(program)) == program


class TestGrammarTotality:
    @settings(max_examples=300, deadline=None, database=None)
    @given(st.text(max_size=80))
    def test_any_text_parses_or_raises_one_script_error(self, text):
        try:
            parse_script(text)
        except ScriptError:
            pass

    @settings(max_examples=200, deadline=None, database=None)
    @given(st.binary(max_size=60))
    def test_any_bytes_decoded_parse_or_raise(self, blob):
        try:
            parse_script(blob.decode("utf-8", errors="replace"))
        except ScriptError:
            pass
