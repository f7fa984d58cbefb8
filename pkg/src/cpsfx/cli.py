"""Command-line front end: run scenarios, validate scripts, analyze models.

Exit codes: 0 clean run, 2 safety violation, 3 inconsistency finding
(unobservable or incorrectly observed), 64 usage, 65 unparseable or
invalid input data, 70 internal error.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path
from typing import List, Optional

from .attack.insert import UnroutableGenerate
from .devs.trace import write_trace
from .effects.parser import ScriptError, parse_script
from .effects.validate import validate as validate_program
from .pmi.analysis import NotIncomplete, diff_models, lemma1_witness, theorem1_check
from .report import build_report, report_to_jsonl, report_to_text, run_scenario
from .scenarios.loader import ParseError, load_scenario
from .scenarios.model import ScenarioValidationError

EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70


class UsageError(ValueError):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract is 64
        raise UsageError(message)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="cpsfx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario, optionally under an effect script")
    run.add_argument("scenario", help="path to a .scn scenario file")
    run.add_argument("--script", help="effect script to inject through the attack simulator")
    run.add_argument("--until", required=True, type=int, help="simulation horizon in ticks")
    run.add_argument("--trace", help="write the event log to this .trace.jsonl file")
    run.add_argument("--report", help="write the report to this file as well as stdout")
    run.add_argument("--format", choices=("text", "jsonl"), default="text")
    run.add_argument("--epoch", type=int, help="fixed timestamp to embed in the report")

    val = sub.add_parser("validate", help="check an effect script against a scenario")
    val.add_argument("scenario")
    val.add_argument("script")

    pmi = sub.add_parser("pmi", help="model diff, forced-transition witnesses, theorem outcome")
    pmi.add_argument("scenario")
    pmi.add_argument("--component", required=True)
    return parser


def _load_scenario(path: str):
    try:
        return load_scenario(Path(path))
    except (ParseError, ScenarioValidationError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return None


def _load_script(scenario, path: str):
    try:
        program = parse_script(Path(path).read_text(encoding="utf-8"))
    except (ScriptError, OSError) as err:
        print(f"error: {path}: {err}", file=sys.stderr)
        return None, False
    diagnostics = validate_program(program, scenario.decls())
    for diagnostic in diagnostics:
        print(f"{path}:{diagnostic}", file=sys.stderr)
    return program, not diagnostics


def cmd_run(args) -> int:
    scenario = _load_scenario(args.scenario)
    if scenario is None:
        return EXIT_DATA
    program = None
    script_name = None
    if args.script:
        program, clean = _load_script(scenario, args.script)
        if program is None or not clean:
            return EXIT_DATA
        script_name = Path(args.script).stem
    try:
        events, _system = run_scenario(scenario, program, args.until)
    except UnroutableGenerate as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA
    if args.trace:
        write_trace(events, args.trace)
    report = build_report(
        scenario, events, script=script_name, program=program,
        until=args.until, epoch=args.epoch,
    )
    rendered = report_to_text(report) if args.format == "text" else report_to_jsonl(report)
    sys.stdout.write(rendered)
    if args.report:
        Path(args.report).write_text(rendered, encoding="utf-8")
    return report.exit_status


def cmd_validate(args) -> int:
    scenario = _load_scenario(args.scenario)
    if scenario is None:
        return EXIT_DATA
    program, clean = _load_script(scenario, args.script)
    if program is None:
        return EXIT_DATA
    if clean:
        print("ok")
        return 0
    return EXIT_DATA


def cmd_pmi(args) -> int:
    scenario = _load_scenario(args.scenario)
    if scenario is None:
        return EXIT_DATA
    connection = scenario.connections.get(args.component)
    if connection is None:
        print(f"error: no connection for component {args.component!r}", file=sys.stderr)
        return EXIT_DATA
    diff = diff_models(connection)
    print(f"component: {args.component}")
    print(f"forced states: {sorted(diff.forced_states) or '(none)'}")
    print(f"forced transitions: {sorted(diff.forced_transitions) or '(none)'}")
    print(f"incorrect states: {sorted(diff.incorrect_states) or '(none)'}")
    print(f"incorrect transitions: {sorted(diff.incorrect_transitions) or '(none)'}")
    for state in sorted(diff.forced_states):
        witness = lemma1_witness(connection, state)
        print(f"forced-state witness: {state}: {witness[0]} -> {witness[1]}")
    try:
        outcome = theorem1_check(connection)
    except NotIncomplete:
        print("theorem: NotIncomplete (known model is complete; theorem does not apply)")
    else:
        finding = outcome.finding
        print(
            f"theorem: {outcome.kind.value} on {finding.transition[0]} -> {finding.transition[1]}"
            f" [{finding.classification.value}]"
        )
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "validate":
            return cmd_validate(args)
        return cmd_pmi(args)
    except Exception:  # contract: anything unexpected is an internal error
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
