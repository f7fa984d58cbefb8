"""Interception plumbing and effect application semantics."""

from fractions import Fraction

import pytest

from cpsfx.attack import (
    SIM_ID,
    AlreadyInserted,
    UnknownEffect,
    UnknownTarget,
    effect_application_count,
    initial_state,
    insert_attack_simulator,
    on_message,
)
from cpsfx.devs import CoupledSpec, build_coupled, eic, equivalent_traces, ic, make_message, strip_subject
from cpsfx.effects import EMPTY_PROGRAM, parse_script
from toys import counter, pulser, relay


def chain_spec():
    """A -> B -> C relay chain fed by one external port."""
    return CoupledSpec(
        "Root", ("kick",), (),
        (pulser("A", 2, 2, msg_type="MsgTick"), relay("B"), counter("C")),
        (
            eic("kick", ("A", "in"), "Root"),
            ic(("A", "out"), ("B", "in")),
            ic(("B", "out"), ("C", "in")),
        ),
    )


def msg(msg_type, src, dst, fields, t, msg_id=1):
    return make_message(msg_type, src, dst, fields, t, t, msg_id=msg_id)


class TestInsertion:
    def test_rewires_only_target_pairs(self):
        rewired_spec, plan = insert_attack_simulator(chain_spec(), {"A", "B"})
        assert plan.intercepted_links == ((("A", "out"), ("B", "in")),)
        assert len(rewired_spec.children) == 4  # one added component
        system = build_coupled(rewired_spec)
        (dest,) = system.routes[("A", "out")]
        assert dest.physical == (SIM_ID, "in_A_out")
        assert dest.logical == ("B", "in")
        (dest,) = system.routes[(SIM_ID, "out_B_in")]
        assert dest.physical == dest.logical == ("B", "in")
        (dest,) = system.routes[("B", "out")]
        assert dest.physical == dest.logical == ("C", "in")

    def test_empty_targets_add_inert_sim(self):
        rewired_spec, plan = insert_attack_simulator(chain_spec(), set())
        assert plan.rewired == ()
        assert any(child.id == SIM_ID for child in rewired_spec.children)

    def test_unknown_target(self):
        with pytest.raises(UnknownTarget):
            insert_attack_simulator(chain_spec(), {"Ghost"})

    def test_already_inserted(self):
        rewired_spec, _ = insert_attack_simulator(chain_spec(), {"A", "B"})
        with pytest.raises(AlreadyInserted):
            insert_attack_simulator(rewired_spec, {"A", "B"})

    def test_transparency_with_empty_program(self):
        baseline = build_coupled(chain_spec()).run(10)
        rewired_spec, _ = insert_attack_simulator(chain_spec(), {"A", "B", "C"})
        instrumented = build_coupled(rewired_spec).run(10)
        assert equivalent_traces(strip_subject(instrumented, SIM_ID), baseline)


DELAY_SCRIPT = """
effect D on msg MsgTick from A to B delay 7;
activate D on msg MsgTick from A to B;
"""


class TestOnMessage:
    def test_passthrough_without_active_effects(self):
        program = parse_script(DELAY_SCRIPT)
        state = initial_state(program)
        # Pattern does not match: different sender.
        other = msg("MsgTick", ("X", "out"), ("B", "in"), {"n": 1}, 3)
        state2, emissions = on_message(state, program, other, 3)
        assert emissions == [(other, Fraction(3))]
        assert state2.active == ()
        assert effect_application_count(state2, "D") == 0

    def test_activation_rule_applies_to_its_own_trigger(self):
        # The activate rule precedes effect matching, so the very message
        # that turns the effect on is already subject to it.
        program = parse_script(DELAY_SCRIPT)
        state = initial_state(program)
        tick = msg("MsgTick", ("A", "out"), ("B", "in"), {"n": 0}, 3)
        state2, emissions = on_message(state, program, tick, 3)
        assert state2.active == ("D",)
        assert emissions == [(tick, Fraction(10))]
        assert effect_application_count(state2, "D") == 1

    def test_drop_emits_nothing(self):
        program = parse_script(
            "effect D on msg MsgTick from A to B drop;\n"
            "activate D on msg MsgTick from A to B;\n"
        )
        state = initial_state(program)
        tick = msg("MsgTick", ("A", "out"), ("B", "in"), {"n": 0}, 3)
        _, emissions = on_message(state, program, tick, 3)
        assert emissions == []

    def test_deactivation_mirrors_activation(self):
        program = parse_script(
            "effect D on msg MsgTick from A to B drop;\n"
            "activate D on msg MsgTick from A to B where n == 0;\n"
            "deactivate D on msg MsgTick from A to B where n == 2;\n"
        )
        state = initial_state(program)
        first = msg("MsgTick", ("A", "out"), ("B", "in"), {"n": 0}, 1)
        state, emissions = on_message(state, program, first, 1)
        assert emissions == []
        second = msg("MsgTick", ("A", "out"), ("B", "in"), {"n": 2}, 2, msg_id=2)
        state, emissions = on_message(state, program, second, 2)
        # Deactivated by this message before effects run, so it passes.
        assert state.active == ()
        assert emissions == [(second, Fraction(2))]

    def test_h5_chain_generates_and_drops(self):
        program = parse_script(
            open("src/cpsfx/scenarios/data/h5.fx").read()
        )
        state = initial_state(
            program,
            routes={("Motor", "CarCtrl"): ("status", "motor"), ("CarCtrl", "Motor"): ("motor", "cmd")},
        )
        press = msg("MsgBtn", ("CarBtn", "btn"), ("ElevatorCtrl", "btn"), {"dest": 3}, 5)
        state, emissions = on_message(state, program, press, 5)
        assert [m.msg_id for m, _ in emissions] == [1]  # passthrough
        ready = msg(
            "MsgCar", ("CarCtrl", "status"), ("ElevatorCtrl", "car"),
            {"status": "READYTOMOVE", "pos": 1}, 8, msg_id=2,
        )
        state, emissions = on_message(state, program, ready, 8)
        assert state.active == ("H5",)
        assert emissions == [(ready, Fraction(8))]
        ids = iter(range(100, 200))
        forward = msg("MsgMotor", ("CarCtrl", "motor"), ("Motor", "cmd"), {"cmd": "FORWARD"}, 8, msg_id=3)
        state, emissions = on_message(
            state, program, forward, 8, alloc=lambda: next(ids)
        )
        assert len(emissions) == 1
        spoofed, when = emissions[0]
        assert when == Fraction(8)
        assert spoofed.msg_type == "MsgMotor"
        assert spoofed.source[0] == "Motor" and spoofed.target[0] == "CarCtrl"
        assert spoofed.fields_dict() == {"cmd": "REACHED"}
        assert effect_application_count(state, "H5") == 1
        assert effect_application_count(state, "H5_0") == 1
        assert effect_application_count(state, "H5_1") == 1

    def test_unknown_effect_count(self):
        state = initial_state(EMPTY_PROGRAM)
        with pytest.raises(UnknownEffect):
            effect_application_count(state, "Ghost")

    def test_given_clause_reads_published_component_state(self):
        # MsgCar messages are declared as snapshots of CarCtrl, so a rule can
        # predicate on the victim's last published state variables.
        program = parse_script(
            "effect D on msg MsgTick from A to B drop;\n"
            "activate D on msg MsgTick from A to B given CarCtrl.pos == 2;\n"
        )
        state = initial_state(program, snapshots={"MsgCar": "CarCtrl"})
        tick = msg("MsgTick", ("A", "out"), ("B", "in"), {"n": 0}, 1)
        state, emissions = on_message(state, program, tick, 1)
        assert state.active == ()  # nothing published yet: clause is false
        report = msg("MsgCar", ("CarCtrl", "status"), ("X", "car"), {"pos": 2}, 2, msg_id=2)
        state, _ = on_message(state, program, report, 2)
        tick2 = msg("MsgTick", ("A", "out"), ("B", "in"), {"n": 1}, 3, msg_id=3)
        state, emissions = on_message(state, program, tick2, 3)
        assert state.active == ("D",)
        assert emissions == []

    def test_given_clause_reads_clock(self):
        program = parse_script(
            "effect D on msg MsgTick from A to B drop;\n"
            "activate D on msg MsgTick from A to B given time > 5;\n"
        )
        state = initial_state(program)
        early = msg("MsgTick", ("A", "out"), ("B", "in"), {"n": 0}, 4)
        state, emissions = on_message(state, program, early, 4)
        assert state.active == () and len(emissions) == 1
        late = msg("MsgTick", ("A", "out"), ("B", "in"), {"n": 1}, 6, msg_id=2)
        state, emissions = on_message(state, program, late, 6)
        assert state.active == ("D",) and emissions == []

    def test_modify_copies_fields_with_overrides(self):
        program = parse_script(
            "effect M on msg MsgCash from ATM to Cust where action == DISPENSE modify action = TRAPPED;\n"
            "activate M on msg MsgCash from ATM to Cust;\n"
        )
        state = initial_state(program)
        dispense = msg(
            "MsgCash", ("ATM", "custcmd"), ("Cust", "cmd"),
            {"action": "DISPENSE", "amount": 40}, 12,
        )
        ids = iter(range(50, 60))
        state, emissions = on_message(state, program, dispense, 12, alloc=lambda: next(ids))
        assert len(emissions) == 1
        replaced, when = emissions[0]
        assert when == Fraction(12)
        assert replaced.fields_dict() == {"action": "TRAPPED", "amount": 40}
        assert replaced.msg_id == 50
        assert replaced.source == dispense.source and replaced.target == dispense.target
