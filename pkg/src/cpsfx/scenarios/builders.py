"""Programmatic constructors for the bundled scenarios."""

from __future__ import annotations

from ..pmi.space import IntRange
from . import atm as atm_mod
from . import elevator as ele
from .model import (
    DATA_DIR,
    Driver,
    MessageTypeDecl,
    Scenario,
    load_program,
    make_safety,
    validate_scenario,
)

ELEVATOR_MESSAGES = (
    MessageTypeDecl("MsgBtn", (("dest", IntRange(0, 5)),)),
    MessageTypeDecl("MsgReq", (("dest", IntRange(0, 5)),)),
    MessageTypeDecl(
        "MsgCar",
        (
            ("status", ("READYTOMOVE", "ARRIVED", "STOPPEDAT", "SERVICED")),
            ("pos", IntRange(1, 5)),
        ),
    ),
    MessageTypeDecl("MsgMotor", (("cmd", ("FORWARD", "REVERSE", "STOP", "PASSED", "REACHED")),)),
    MessageTypeDecl(
        "MsgDoor",
        (("cmd", ("OPEN", "CLOSE", "NONE")), ("status", ("OPEN", "CLOSED", "NONE"))),
    ),
)


def elevator_variant(start: int = 1, dest: int = 3, floor_call: int = 0,
                     press_time: int = 5) -> Scenario:
    """Elevator scenario with a parameterized starting floor and request."""
    drivers = []
    if floor_call:
        drivers.append(Driver(2, f"press_floor{floor_call}", "MsgBtn", (("dest", floor_call),)))
    drivers.append(Driver(press_time, "press_car", "MsgBtn", (("dest", dest),)))
    scenario = Scenario(
        name="elevator",
        system=ele.elevator_system(start=start),
        message_types=ELEVATOR_MESSAGES,
        drivers=tuple(drivers),
        known_models={
            "CarCtrl": ele.car_known_model(),
            "ElevatorCtrl": ele.ctrl_known_model(),
            "Motor": ele.position_known_model(),
        },
        ground_models={
            "CarCtrl": ele.car_ground_model(),
            "ElevatorCtrl": ele.ctrl_ground_model(start),
            "Motor": ele.position_ground_model(start),
        },
        connections={
            "CarCtrl": ele.car_connection(start),
            "ElevatorCtrl": ele.ctrl_connection(start),
            "Motor": ele.position_connection(start),
        },
        safety=(
            make_safety(
                "no-move-with-door-open", "CarCtrl",
                "not (statusCarDoor == OPEN and motorRunning == ON)",
            ),
        ),
        scripts={"h5": load_program(DATA_DIR / "h5.fx")},
        targets=("CarBtn", "CarCtrl", "ElevatorCtrl", "Motor"),
    )
    validate_scenario(scenario)
    return scenario


def elevator_baseline() -> Scenario:
    """The bundled elevator: car resting at floor 1, hall call at 1, car call to 3."""
    return elevator_variant(start=1, dest=3, floor_call=1)


ATM_MESSAGES = (
    MessageTypeDecl(
        "MsgUser",
        (
            ("act", ("INSERT", "PIN", "AMOUNT", "TAKECASH", "DONE")),
            ("value", IntRange(0, 9999)),
        ),
    ),
    MessageTypeDecl("MsgCard", (("action", ("INSERTED", "EJECT")),)),
    MessageTypeDecl("MsgPin", (("pin", IntRange(0, 9999)),)),
    MessageTypeDecl("MsgAmt", (("amount", IntRange(0, 9999)),)),
    MessageTypeDecl("MsgDone", ()),
    MessageTypeDecl("MsgCash", (("action", ("DISPENSE", "TRAPPED")),)),
    MessageTypeDecl(
        "MsgBank",
        (("pin", IntRange(0, 9999)), ("result", ("NONE", "OK", "BAD"))),
    ),
    MessageTypeDecl("MsgSvc", (("code", ("NONE", "DISPENSE")),)),
)

ATM_DRIVERS = (
    Driver(2, "user", "MsgUser", (("act", "INSERT"), ("value", 0))),
    Driver(6, "user", "MsgUser", (("act", "PIN"), ("value", 1234))),
    Driver(12, "user", "MsgUser", (("act", "AMOUNT"), ("value", 40))),
    Driver(20, "user", "MsgUser", (("act", "TAKECASH"), ("value", 0))),
    Driver(24, "user", "MsgUser", (("act", "DONE"), ("value", 0))),
)


def atm_baseline() -> Scenario:
    scenario = Scenario(
        name="atm",
        system=atm_mod.atm_system(),
        message_types=ATM_MESSAGES,
        drivers=ATM_DRIVERS,
        known_models={"ATM": atm_mod.atm_known_model()},
        ground_models={"ATM": atm_mod.atm_ground_model()},
        connections={"ATM": atm_mod.atm_connection()},
        safety=(
            make_safety("authenticated-access-only", "ATM", "not (phase == WRONGPIN)"),
        ),
        scripts={
            "trapcard": load_program(DATA_DIR / "trapcard.fx"),
            "trapcash": load_program(DATA_DIR / "trapcash.fx"),
            "jackpot": load_program(DATA_DIR / "jackpot.fx"),
        },
        targets=("ATM", "Cust"),
    )
    validate_scenario(scenario)
    return scenario
