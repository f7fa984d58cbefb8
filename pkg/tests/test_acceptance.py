"""Acceptance criteria, one test per criterion, each printing PASS/FAIL.

Run with `pytest -s tests/test_acceptance.py` to see the verdict lines.
Criteria with runtime bounds measure wall-clock time and assert it.
"""

import random
import time

from cpsfx.attack import SIM_ID, effect_application_count
from cpsfx.cli import main
from cpsfx.devs import (
    STATE_CHANGE,
    canonical_trace,
    equivalent_traces,
    strip_subject,
)
from cpsfx.effects import EMPTY_PROGRAM, format_program, parse_script, random_program
from cpsfx.pmi import (
    Assignment,
    Classification,
    classify_transition,
    diff_models,
    lemma1_witness,
    random_connection,
    theorem1_check,
)
from cpsfx.report import build_report, run_scenario
from cpsfx.scenarios import DATA_DIR, atm_baseline, elevator_baseline, elevator_variant
from conftest import SEED
from oracle import theorem_outcome_kind
from test_effects_dsl import H5_EXPECTED


def verdict(number: int, name: str, ok: bool, elapsed: float) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number:2d} {name}: {status} ({elapsed:.2f}s)")
    assert ok, f"criterion {number} ({name}) failed"


def phase_pairs(events, comp):
    pairs = []
    for e in events:
        if e.kind == STATE_CHANGE and e.subject == comp:
            old = e.detail["old"]["vars"].get("phase")
            new = e.detail["new"]["vars"].get("phase")
            if old != new:
                pairs.append((old, new))
    return pairs


def test_criterion_01_h5_end_to_end():
    started = time.monotonic()
    scenario = elevator_baseline()
    events, system = run_scenario(scenario, scenario.scripts["h5"], 200)
    elapsed = time.monotonic() - started
    ok = system.states["Motor"].values[2] == 1
    ok &= effect_application_count(system.states[SIM_ID], "H5") == 2
    ok &= phase_pairs(events, "CarCtrl").count(("moving", "reached")) == 2
    ok &= phase_pairs(events, "ElevatorCtrl").count(("movingUP", "stopped")) == 2
    ok &= elapsed < 1.0
    verdict(1, "h5-end-to-end", ok, elapsed)


def test_criterion_02_baseline_correctness():
    started = time.monotonic()
    ok = True
    for start in range(1, 6):
        for dest in range(1, 6):
            _, system = run_scenario(elevator_variant(start=start, dest=dest), None, 200)
            ok &= system.states["Motor"].values[2] == dest
    # Criterion 1's run without the script arrives at floor 3.
    _, system = run_scenario(elevator_baseline(), None, 200)
    ok &= system.states["Motor"].values[2] == 3
    elapsed = time.monotonic() - started
    ok &= elapsed < 5.0
    verdict(2, "baseline-25-pairs", ok, elapsed)


def test_criterion_03_theorem_property_suite():
    started = time.monotonic()
    rng = random.Random(SEED)
    ok = True
    for _ in range(1000):
        c = random_connection(rng, ensure_incomplete=True)
        try:
            outcome = theorem1_check(c)
        except Exception:
            ok = False
            break
        ok &= outcome.kind.value in (
            "PmiInstance", "CorrectlyObservedForcedTransition"
        )
        ok &= outcome.kind.value == theorem_outcome_kind(c)
        if not ok:
            break
    elapsed = time.monotonic() - started
    ok &= elapsed < 30.0
    verdict(3, "theorem-1000-oracle-agreement", ok, elapsed)


def test_criterion_04_lemma_property_suite():
    started = time.monotonic()
    rng = random.Random(SEED + 1)
    failures = 0
    cases = 0
    for _ in range(1000):
        c = random_connection(rng, ensure_forced_state=True)
        for state in sorted(diff_models(c).forced_states):
            cases += 1
            witness = lemma1_witness(c, state)
            if witness not in c.ground.transitions or witness in c.known.transitions:
                failures += 1
    elapsed = time.monotonic() - started
    ok = failures == 0 and cases >= 1000
    verdict(4, "lemma-1000-witnesses", ok, elapsed)


def test_criterion_05_converse_failure_witness():
    started = time.monotonic()
    scenario = elevator_baseline()
    connection = scenario.connections["Motor"]
    diff = diff_models(connection)
    ok = not diff.incomplete and not diff.incorrect
    finding = classify_transition(connection, Assignment((1, 1)), Assignment((2, 1)))
    ok &= finding.classification is Classification.INCORRECTLY_OBSERVED
    elapsed = time.monotonic() - started
    verdict(5, "converse-complete-correct-yet-pmi", ok, elapsed)


def test_criterion_06_atm_scenarios():
    started = time.monotonic()
    scenario = atm_baseline()
    ok = True
    for script in ("trapcard", "trapcash"):
        program = scenario.scripts[script]
        events, _ = run_scenario(scenario, program, 100)
        report = build_report(scenario, events, script, program, 100)
        ok &= any(f.classification == "IncorrectlyObserved" for f in report.findings)
    program = scenario.scripts["jackpot"]
    events, _ = run_scenario(scenario, program, 100)
    report = build_report(scenario, events, "jackpot", program, 100)
    reached = {f.transition[0] for f in report.findings} | {
        f.transition[1] for f in report.findings
    }
    ok &= "Dispense Cash" in reached
    atm_phases = [p for _, p in phase_pairs(events, "ATM")]
    ok &= "PINWAIT" not in atm_phases
    ok &= diff_models(scenario.connections["ATM"]).forced_states == frozenset(
        {"Trap Card", "Trap Cash", "Activate Malware"}
    )
    elapsed = time.monotonic() - started
    verdict(6, "atm-trapping-and-jackpotting", ok, elapsed)


DROP_TEMPLATE = """
effect E on msg {pattern} {operator};
activate E on msg MsgBtn from CarBtn to ElevatorCtrl;
"""

PATTERNS = (
    "MsgMotor from CarCtrl to Motor where cmd == FORWARD",
    "MsgCar from CarCtrl to ElevatorCtrl where status == READYTOMOVE",
    "MsgReq from ElevatorCtrl to CarCtrl",
    "MsgBtn from CarBtn to ElevatorCtrl",
)


def test_criterion_07_drop_equals_infinite_delay():
    started = time.monotonic()
    rng = random.Random(SEED + 2)
    ok = True
    for _ in range(100):
        start = rng.randint(1, 5)
        dest = rng.randint(1, 5)
        press = rng.randint(3, 9)
        pattern = rng.choice(PATTERNS)
        scenario = elevator_variant(start=start, dest=dest, press_time=press)
        traces = []
        for operator in ("drop", "delay inf"):
            program = parse_script(DROP_TEMPLATE.format(pattern=pattern, operator=operator))
            events, _ = run_scenario(scenario, program, 120)
            traces.append(canonical_trace(events))
        ok &= traces[0] == traces[1]
        if not ok:
            break
    elapsed = time.monotonic() - started
    verdict(7, "drop-equals-delay-inf-100-runs", ok, elapsed)


def test_criterion_08_transparency():
    started = time.monotonic()
    ok = True
    for start in range(1, 6):
        for dest in range(1, 6):
            scenario = elevator_variant(start=start, dest=dest)
            baseline_events, _ = run_scenario(scenario, None, 200)
            instrumented_events, _ = run_scenario(scenario, EMPTY_PROGRAM, 200)
            ok &= equivalent_traces(
                strip_subject(instrumented_events, SIM_ID), baseline_events
            )
    elapsed = time.monotonic() - started
    verdict(8, "transparency-25-pairs", ok, elapsed)


def test_criterion_09_dsl_round_trip():
    started = time.monotonic()
    rng = random.Random(SEED + 3)
    ok = True
    for _ in range(500):
        program = random_program(rng)
        ok &= parse_script(format_program(program)) == program
        if not ok:
            break
    parsed = parse_script((DATA_DIR / "h5.fx").read_text())
    ok &= parsed == H5_EXPECTED
    ok &= len(parsed.effects) + len(parsed.rules) == 4
    elapsed = time.monotonic() - started
    verdict(9, "dsl-round-trip-500", ok, elapsed)


def test_criterion_10_determinism(tmp_path):
    started = time.monotonic()
    ok = True
    jobs = (
        ("elevator.scn", None),
        ("elevator.scn", "h5.fx"),
        ("atm.scn", "trapcash.fx"),
    )
    for index, (scn, script) in enumerate(jobs):
        blobs = []
        for attempt in range(2):
            trace = tmp_path / f"{index}-{attempt}.trace.jsonl"
            argv = ["run", str(DATA_DIR / scn), "--until", "200", "--trace", str(trace)]
            if script:
                argv += ["--script", str(DATA_DIR / script)]
            main(argv)
            blobs.append(trace.read_bytes())
        ok &= blobs[0] == blobs[1]
    elapsed = time.monotonic() - started
    verdict(10, "byte-identical-traces", ok, elapsed)
