"""Bundled scenario models: loading, structure, behavioral oracles.

The expected values in TestElevatorBaseline come from hand-simulating the
component state tables: floor call at t=2 reaches the controller at t=3
(one button tick); the car call at t=5 reaches it at t=6; the door closes
over t=6..7; the motor starts at t=7 and crosses a floor every 10 ticks,
so the car passes floor 2 at t=17 and arrives at floor 3 at t=27, door
open at t=28.
"""

from fractions import Fraction

import pytest

from cpsfx.attack import SIM_ID, effect_application_count
from cpsfx.devs import MESSAGE_DELIVERED, STATE_CHANGE, build_coupled
from cpsfx.pmi import Assignment, check_ground_truth, diff_models, lemma1_witness
from cpsfx.report import build_report, run_scenario
from cpsfx.scenarios import (
    DATA_DIR,
    ScenarioValidationError,
    atm_baseline,
    elevator_baseline,
    elevator_variant,
    load_process_models,
    load_scenario,
)


def phase_changes(events, comp, var="phase"):
    out = []
    for e in events:
        if e.kind == STATE_CHANGE and e.subject == comp:
            old = e.detail["old"]["vars"].get(var)
            new = e.detail["new"]["vars"].get(var)
            if old != new:
                out.append((e.time, old, new))
    return out


class TestLoading:
    def test_elevator_file_structure(self):
        scenario = load_scenario(DATA_DIR / "elevator.scn")
        assert len(scenario.leaves()) == 10
        assert {d.name for d in scenario.message_types} == {
            "MsgMotor", "MsgCar", "MsgBtn", "MsgDoor", "MsgReq"
        }

    def test_atm_file_structure(self):
        scenario = load_scenario(DATA_DIR / "atm.scn")
        known = scenario.known_models["ATM"]
        assert known.states == frozenset({
            "Insert Readable Card", "Request Password", "Verify Account",
            "Process Transaction", "Dispense Cash", "Eject Card",
            "Print Receipt", "Wrong PIN", "Another Transaction",
        })
        controllers = [c for c in scenario.leaves().values() if c.kind == "atm_controller"]
        assert len(controllers) == 1

    def test_files_equal_constructors(self):
        assert load_scenario(DATA_DIR / "elevator.scn") == elevator_baseline()
        assert load_scenario(DATA_DIR / "atm.scn") == atm_baseline()

    def test_undeclared_component_in_coupling(self, tmp_path):
        text = (DATA_DIR / "elevator.scn").read_text().replace(
            '["ic", "Car.status", "ElevatorCtrl.car"]',
            '["ic", "Car.status", "GhostCtrl.car"]',
        )
        bad = tmp_path / "bad.scn"
        bad.write_text(text)
        (tmp_path / "h5.fx").write_text((DATA_DIR / "h5.fx").read_text())
        with pytest.raises((ScenarioValidationError, ValueError)):
            load_scenario(bad)

    def test_standalone_process_model_file(self, tmp_path):
        pm_file = tmp_path / "car.pm"
        pm_file.write_text(
            """
[[process_model]]
name = "car"
variables = [["door", ["CLOSED", "OPEN"]], ["motor", ["ON", "OFF"]]]
states = ["RUNNING", "STOPPED"]
observation = [
  [["CLOSED", "*"], "RUNNING"],
  [["OPEN", "OFF"], "STOPPED"],
]
transitions = [["RUNNING", "STOPPED"], ["STOPPED", "RUNNING"]]
initial = "STOPPED"
"""
        )
        models = load_process_models(pm_file)
        model = models["car"]
        assert model.state_model.observe(Assignment(("CLOSED", "OFF"))) == "RUNNING"
        assert model.state_model.observe(Assignment(("OPEN", "ON"))) is None
        assert model.initial == "STOPPED"

    def test_process_model_file_with_safety_rules(self, tmp_path):
        from cpsfx.scenarios import load_process_model_bundle

        pm_file = tmp_path / "car.pm"
        pm_file.write_text(
            """
[[process_model]]
name = "car"
variables = [["door", ["CLOSED", "OPEN"]], ["motor", ["ON", "OFF"]]]
states = ["RUNNING", "STOPPED", "X"]
observation = [
  [["CLOSED", "*"], "RUNNING"],
  [["OPEN", "OFF"], "STOPPED"],
  [["OPEN", "ON"], "X"],
]
transitions = [["RUNNING", "STOPPED"], ["STOPPED", "RUNNING"], ["STOPPED", "X"]]
initial = "STOPPED"
safety = [["no-move-open", "not (door == OPEN and motor == ON)"]]
"""
        )
        models, safety = load_process_model_bundle(pm_file)
        (prop,) = safety["car"]
        assert prop.predicate({"door": "OPEN", "motor": "ON"}) is False
        assert prop.predicate({"door": "CLOSED", "motor": "ON"}) is True

    def test_inconsistent_safety_rule_rejected(self, tmp_path):
        from cpsfx.pmi import ModelError
        from cpsfx.scenarios import load_process_model_bundle

        pm_file = tmp_path / "bad.pm"
        pm_file.write_text(
            """
[[process_model]]
name = "car"
variables = [["door", ["CLOSED", "OPEN"]], ["motor", ["ON", "OFF"]]]
states = ["RUNNING", "STOPPED"]
observation = [
  [["CLOSED", "*"], "RUNNING"],
  [["OPEN", "OFF"], "STOPPED"],
]
transitions = [["RUNNING", "STOPPED"]]
safety = [["splits-a-state", "motor == ON"]]
"""
        )
        with pytest.raises(ModelError):
            load_process_model_bundle(pm_file)

    def test_driver_missing_field_rejected(self):
        from dataclasses import replace
        from cpsfx.scenarios.model import Driver, validate_scenario

        scenario = atm_baseline()
        bad = replace(scenario, drivers=(
            Driver(2, "user", "MsgUser", (("act", "INSERT"),)),  # value omitted
        ))
        with pytest.raises(ScenarioValidationError):
            validate_scenario(bad)


class TestElevatorModels:
    def test_car_ground_has_forced_state_x(self):
        scenario = elevator_baseline()
        diff = diff_models(scenario.connections["CarCtrl"])
        assert diff.forced_states == frozenset({"X"})
        assert diff.forced_transitions == frozenset({("STOPPED", "X")})
        assert lemma1_witness(scenario.connections["CarCtrl"], "X") == ("STOPPED", "X")

    def test_ground_models_reachable(self):
        for scenario in (elevator_baseline(), atm_baseline()):
            for comp, ground in scenario.ground_models.items():
                assert check_ground_truth(ground) == frozenset(), comp

    def test_atm_ground_adds_three_attack_states(self):
        scenario = atm_baseline()
        diff = diff_models(scenario.connections["ATM"])
        assert diff.forced_states == frozenset({"Trap Card", "Trap Cash", "Activate Malware"})
        assert lemma1_witness(scenario.connections["ATM"], "Trap Cash") == (
            "Dispense Cash", "Trap Cash"
        )


class TestElevatorBaseline:
    def test_bundled_driver_reaches_floor_three(self):
        scenario = elevator_baseline()
        events, system = run_scenario(scenario, None, 200)
        assert system.states["Motor"] == Assignment(("OFF", "NONE", 3))
        assert system.states["CarCtrl"].values[3] == 3  # believed position agrees

    def test_hand_simulated_timeline(self):
        scenario = elevator_baseline()
        events, system = run_scenario(scenario, None, 200)
        # Motor engages at t=7 (button tick at 6, door closed 6->7).
        starts = [
            e.time for e in events
            if e.kind == STATE_CHANGE and e.subject == "Motor"
            and e.detail["new"]["vars"]["running"] == "ON"
            and e.detail["old"]["vars"]["running"] == "OFF"
        ]
        assert starts == [Fraction(7)]
        # Passes floor 2 at 17, reaches floor 3 at 27.
        positions = [
            (e.time, e.detail["new"]["vars"]["pos"])
            for e in events
            if e.kind == STATE_CHANGE and e.subject == "Motor"
            and e.detail["new"]["vars"]["pos"] != e.detail["old"]["vars"]["pos"]
        ]
        assert positions == [(Fraction(17), 2), (Fraction(27), 3)]
        # Door reopens at 28 and the run is quiescent afterwards.
        door_open = [
            e.time for e in events
            if e.kind == STATE_CHANGE and e.subject == "CarDoor"
            and e.detail["new"]["vars"]["pos"] == "OPEN"
            and e.detail["old"]["vars"]["pos"] == "CLOSED"
        ]
        assert door_open == [Fraction(28)]
        assert max(e.time for e in events) == Fraction(28)

    def test_serviced_notice_leaves_through_output_coupling(self):
        scenario = elevator_baseline()
        events, _ = run_scenario(scenario, None, 200)
        exits = [
            e for e in events
            if e.kind == MESSAGE_DELIVERED and e.subject == "__env__"
            and e.detail["msg"]["type"] == "MsgCar"
        ]
        assert exits and exits[-1].detail["msg"]["fields"]["pos"] == 3

    def test_all_start_dest_pairs(self):
        for start in range(1, 6):
            for dest in range(1, 6):
                scenario = elevator_variant(start=start, dest=dest)
                _, system = run_scenario(scenario, None, 200)
                assert system.states["Motor"].values[2] == dest, (start, dest)

    def test_no_forced_phases_in_baseline(self):
        scenario = elevator_baseline()
        events, _ = run_scenario(scenario, None, 200)
        car = phase_changes(events, "CarCtrl")
        ctrl = phase_changes(events, "ElevatorCtrl")
        assert ("moving", "reached") not in [(o, n) for _, o, n in car]
        assert "stopped" not in [n for _, _, n in ctrl]

    def test_injected_press_hits_car_button_at_five(self):
        from cpsfx.devs import EXTERNAL_TRANSITION, make_message

        scenario = elevator_variant(start=1, dest=3)
        system = build_coupled(scenario.system)
        press = make_message(
            "MsgBtn", ("__env__", "press_car"), ("Elevator", "press_car"), {"dest": 3}, 5
        )
        system.inject_external(press)
        events = system.run(200)
        hits = [e for e in events if e.kind == EXTERNAL_TRANSITION and e.subject == "CarBtn"]
        assert hits and hits[0].time == 5
        assert system.states["Motor"].values[2] == 3


class TestInterceptPlan:
    def test_three_target_plan_rewires_motor_and_controller_links(self):
        from cpsfx.attack import insert_attack_simulator

        scenario = elevator_baseline()
        _, plan = insert_attack_simulator(
            scenario.system, {"Motor", "CarCtrl", "ElevatorCtrl"}
        )
        assert set(plan.intercepted_links) == {
            (("CarCtrl", "motor_out"), ("Motor", "cmd")),
            (("Motor", "status"), ("CarCtrl", "motor_in")),
            (("CarCtrl", "status"), ("ElevatorCtrl", "car")),
            (("ElevatorCtrl", "req"), ("CarCtrl", "req")),
        }


class TestElevatorH5:
    def test_h5_pins_car_at_floor_one(self):
        scenario = elevator_baseline()
        events, system = run_scenario(scenario, scenario.scripts["h5"], 200)
        assert system.states["Motor"] == Assignment(("OFF", "NONE", 1))
        assert effect_application_count(system.states[SIM_ID], "H5") == 2
        car = [(o, n) for _, o, n in phase_changes(events, "CarCtrl")]
        ctrl = [(o, n) for _, o, n in phase_changes(events, "ElevatorCtrl")]
        assert car.count(("moving", "reached")) == 2
        assert ctrl.count(("movingUP", "stopped")) == 2

    def test_h5_report_flags_position_inconsistency(self):
        scenario = elevator_baseline()
        events, _ = run_scenario(scenario, scenario.scripts["h5"], 200)
        report = build_report(scenario, events, "h5", scenario.scripts["h5"], 200)
        assert report.exit_status == 3
        bad = [f for f in report.findings if f.is_pmi]
        assert bad and all(f.component == "Motor" for f in bad)
        assert {f.classification for f in bad} == {"IncorrectlyObserved"}


class TestAtmRuns:
    def run_with(self, script):
        scenario = atm_baseline()
        program = scenario.scripts[script] if script else None
        events, system = run_scenario(scenario, program, 100)
        return scenario, events, system, build_report(scenario, events, script, program, 100)

    def test_baseline_clean(self):
        _, _, system, report = self.run_with(None)
        assert report.exit_status == 0
        assert system.states["Cust"].values[1] == "TAKEN"

    def test_card_trapping_observed_incorrectly(self):
        _, _, system, report = self.run_with("trapcard")
        assert system.states["Cust"].values[0] == "IN"  # card physically kept
        trapped = [f for f in report.findings if f.classification == "IncorrectlyObserved"]
        assert any(f.transition == ("Eject Card", "Trap Card") for f in trapped)
        assert report.exit_status == 3

    def test_cash_trapping_observed_incorrectly(self):
        _, _, system, report = self.run_with("trapcash")
        assert system.states["Cust"].values[1] == "TRAPPED"
        trapped = [f for f in report.findings if f.classification == "IncorrectlyObserved"]
        assert any(f.transition == ("Dispense Cash", "Trap Cash") for f in trapped)
        assert report.exit_status == 3

    def test_jackpotting_skips_authentication(self):
        _, events, _, report = self.run_with("jackpot")
        states = [f.transition[1] for f in report.findings] + [
            f.transition[0] for f in report.findings
        ]
        assert "Dispense Cash" in states
        atm_phases = [n for _, _, n in phase_changes(events, "ATM")]
        assert "PINWAIT" not in atm_phases
        assert any(f.classification == "Unobservable" for f in report.findings)
