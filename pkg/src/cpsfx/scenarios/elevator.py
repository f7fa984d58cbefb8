"""Five-floor elevator reference system.

Leaf components: ElevatorCtrl plus the Car assembly (Motor, CarCtrl,
CarBtn, CarDoor) plus one button atomic per floor — ten leaves. Request
collection and door-status relaying are folded into the controller.

Protocol: the motor, once started, reports PASSED each time it crosses a
floor until STOP; the REACHED acknowledgment exists in the message
vocabulary and the car controller handles it, but no shipped firmware path
emits it. The controller counts PASSED reports against its requested
destination, so a spoofed REACHED is the only way to reach the `reached`
phase: `(moving, reached)` and the elevator controller's
`(movingUP, stopped)` never occur undisturbed.
"""

from __future__ import annotations

from typing import Mapping, Tuple

from ..devs.messages import INFINITY
from ..devs.spec import AtomicSpec, Behavior, CoupledSpec, Emit, eic, eoc, ic
from ..pmi.models import Connection, ProcessModel, StateModel
from ..pmi.space import Assignment, IntRange, VariableSpace

FLOORS = 5

PHASES_CAR = (
    "idle", "cmd_close", "closing", "announce", "launch", "moving",
    "arrive", "reached", "cmd_open", "opening", "dooropen",
)
PHASES_CTRL = ("idle", "dispatch", "movingUP", "movingDOWN", "stopped", "redispatch", "complete")


def _params(**kv) -> Tuple[Tuple[str, object], ...]:
    return tuple(sorted(kv.items()))


def button(comp_id: str, params: Mapping) -> AtomicSpec:
    """Floor or car button: relays a pressed destination after one tick."""
    ticks = params.get("ticks", 1)
    floors = params.get("floors", FLOORS)
    space = VariableSpace.of(("phase", ("idle", "emit")), ("pending", IntRange(0, floors)))

    def ta(s):
        return ticks if s[0] == "emit" else INFINITY

    def delta_int(s):
        return Assignment(("idle", 0))

    def delta_ext(s, e, bag):
        phase, pending = s
        for msg in bag:
            if msg.msg_type == "MsgBtn":
                phase, pending = "emit", msg.field("dest")
        return Assignment((phase, pending))

    def output(s):
        return (Emit.of("btn", "MsgBtn", dest=s[1]),)

    return AtomicSpec(
        comp_id, ("press",), ("btn",), "button", _params(ticks=ticks, floors=floors),
        space, Assignment(("idle", 0)),
        Behavior(ta, delta_int, delta_ext, output),
    )


def motor(comp_id: str, params: Mapping) -> AtomicSpec:
    """Continuous drive: PASSED per floor boundary until STOP or a limit."""
    start = params.get("start", 1)
    floors = params.get("floors", FLOORS)
    travel = params.get("travel_ticks", 10)
    space = VariableSpace.of(
        ("running", ("ON", "OFF")),
        ("dir", ("UP", "DOWN", "NONE")),
        ("pos", IntRange(1, floors)),
    )

    def ta(s):
        return travel if s[0] == "ON" else INFINITY

    def delta_int(s):
        _, direction, pos = s
        pos += 1 if direction == "UP" else -1
        if pos <= 1 or pos >= floors:
            pos = max(1, min(floors, pos))
            if (pos == 1 and direction == "DOWN") or (pos == floors and direction == "UP"):
                return Assignment(("OFF", "NONE", pos))  # limit switch
        return Assignment(("ON", direction, pos))

    def delta_ext(s, e, bag):
        running, direction, pos = s
        for msg in bag:
            if msg.msg_type != "MsgMotor":
                continue
            cmd = msg.field("cmd")
            if cmd == "FORWARD":
                running, direction = "ON", "UP"
            elif cmd == "REVERSE":
                running, direction = "ON", "DOWN"
            elif cmd == "STOP":
                running, direction = "OFF", "NONE"
        return Assignment((running, direction, pos))

    def output(s):
        return (Emit.of("status", "MsgMotor", cmd="PASSED"),)

    return AtomicSpec(
        comp_id, ("cmd",), ("status",), "motor",
        _params(start=start, floors=floors, travel_ticks=travel),
        space, Assignment(("OFF", "NONE", start)),
        Behavior(ta, delta_int, delta_ext, output),
    )


def car_door(comp_id: str, params: Mapping) -> AtomicSpec:
    """Door actuator and position sensor; reports after each actuation."""
    ticks = params.get("door_ticks", 1)
    space = VariableSpace.of(
        ("pos", ("OPEN", "CLOSED")),
        ("target", ("OPEN", "CLOSED")),
        ("phase", ("idle", "actuating", "report")),
    )

    def ta(s):
        if s[2] == "actuating":
            return ticks
        return 0 if s[2] == "report" else INFINITY

    def delta_int(s):
        pos, target, phase = s
        if phase == "actuating":
            return Assignment((target, target, "report"))
        return Assignment((pos, target, "idle"))

    def delta_ext(s, e, bag):
        pos, target, phase = s
        for msg in bag:
            if msg.msg_type == "MsgDoor" and phase == "idle":
                cmd = msg.field("cmd")
                if cmd in ("OPEN", "CLOSE"):
                    target = "OPEN" if cmd == "OPEN" else "CLOSED"
                    phase = "actuating"
        return Assignment((pos, target, phase))

    def output(s):
        return (Emit.of("status", "MsgDoor", cmd="NONE", status=s[0]),)

    return AtomicSpec(
        comp_id, ("cmd",), ("status",), "car_door", _params(door_ticks=ticks),
        space, Assignment(("OPEN", "OPEN", "idle")),
        Behavior(ta, delta_int, delta_ext, output),
    )


def car_ctrl(comp_id: str, params: Mapping) -> AtomicSpec:
    """Operates motor and car door on movement requests; counts progress."""
    start = params.get("start", 1)
    floors = params.get("floors", FLOORS)
    space = VariableSpace.of(
        ("statusCarDoor", ("CLOSED", "OPEN")),
        ("motorRunning", ("ON", "OFF")),
        ("phase", PHASES_CAR),
        ("pos", IntRange(1, floors)),
        ("dest", IntRange(0, floors)),
    )
    transient = {"cmd_close": 0, "announce": 0, "launch": 0, "arrive": 0, "reached": 0, "cmd_open": 0}

    def ta(s):
        return transient.get(s[2], INFINITY)

    def step(pos, dest):
        if dest > pos:
            return 1
        return -1 if dest < pos else 0

    def delta_int(s):
        door, running, phase, pos, dest = s
        if phase == "cmd_close":
            phase = "closing"
        elif phase == "announce":
            phase = "launch"
        elif phase == "launch":
            running, phase = "ON", "moving"
        elif phase == "arrive":
            running, phase = "OFF", "opening"
        elif phase == "reached":
            phase = "idle"
        elif phase == "cmd_open":
            phase = "opening"
        return Assignment((door, running, phase, pos, dest))

    def delta_ext(s, e, bag):
        door, running, phase, pos, dest = s
        for msg in bag:
            if msg.msg_type == "MsgReq":
                d = msg.field("dest")
                if d == 0 or phase not in ("idle", "dooropen"):
                    continue
                if d == pos:
                    if door == "CLOSED":
                        dest, phase = d, "cmd_open"
                    continue  # already at the requested floor with the door open
                dest = d
                phase = "cmd_close" if door == "OPEN" else "announce"
            elif msg.msg_type == "MsgDoor":
                status = msg.field("status")
                if status == "CLOSED":
                    door = "CLOSED"
                    if phase == "closing":
                        phase = "announce"
                elif status == "OPEN":
                    door = "OPEN"
                    if phase == "opening":
                        phase = "dooropen"
            elif msg.msg_type == "MsgMotor":
                cmd = msg.field("cmd")
                if cmd == "PASSED" and phase == "moving":
                    pos += step(pos, dest)
                    if pos == dest:
                        phase = "arrive"
                elif cmd == "REACHED" and phase == "moving":
                    # Believed arrival without a commanded stop.
                    pos += step(pos, dest)
                    running, phase = "OFF", "reached"
        return Assignment((door, running, phase, pos, dest))

    def output(s):
        door, running, phase, pos, dest = s
        if phase == "cmd_close":
            return (Emit.of("door_out", "MsgDoor", cmd="CLOSE", status="NONE"),)
        if phase == "announce":
            return (Emit.of("status", "MsgCar", status="READYTOMOVE", pos=pos),)
        if phase == "launch":
            cmd = "FORWARD" if dest > pos else "REVERSE"
            return (Emit.of("motor_out", "MsgMotor", cmd=cmd),)
        if phase == "arrive":
            return (
                Emit.of("motor_out", "MsgMotor", cmd="STOP"),
                Emit.of("door_out", "MsgDoor", cmd="OPEN", status="NONE"),
                Emit.of("status", "MsgCar", status="ARRIVED", pos=pos),
            )
        if phase == "reached":
            return (Emit.of("status", "MsgCar", status="STOPPEDAT", pos=pos),)
        if phase == "cmd_open":
            return (Emit.of("door_out", "MsgDoor", cmd="OPEN", status="NONE"),)
        return ()

    return AtomicSpec(
        comp_id, ("req", "motor_in", "door_in"), ("status", "motor_out", "door_out"),
        "car_ctrl", _params(start=start, floors=floors),
        space, Assignment(("OPEN", "OFF", "idle", start, 0)),
        Behavior(ta, delta_int, delta_ext, output),
    )


def elevator_ctrl(comp_id: str, params: Mapping) -> AtomicSpec:
    """Collects requests, dispatches the car, reacts to its reports."""
    start = params.get("start", 1)
    floors = params.get("floors", FLOORS)
    space = VariableSpace.of(
        ("phase", PHASES_CTRL),
        ("carpos", IntRange(1, floors)),
        ("dest", IntRange(0, floors)),
    )
    transient = {"dispatch": 0, "redispatch": 0, "complete": 0}

    def ta(s):
        if s[0] == "stopped":
            return 1  # assess the unexpected halt
        return transient.get(s[0], INFINITY)

    def delta_int(s):
        phase, carpos, dest = s
        if phase in ("dispatch", "redispatch"):
            phase = "movingUP" if dest > carpos else "movingDOWN"
        elif phase == "stopped":
            phase = "complete" if carpos == dest else "redispatch"
        elif phase == "complete":
            phase, dest = "idle", 0
        return Assignment((phase, carpos, dest))

    def delta_ext(s, e, bag):
        phase, carpos, dest = s
        for msg in bag:
            if msg.msg_type == "MsgBtn":
                d = msg.field("dest")
                if phase == "idle" and d != 0:
                    dest = d
                    phase = "complete" if d == carpos else "dispatch"
            elif msg.msg_type == "MsgCar":
                status = msg.field("status")
                carpos = msg.field("pos")
                if status == "ARRIVED" and phase in ("movingUP", "movingDOWN"):
                    phase = "complete"
                elif status == "STOPPEDAT" and phase in ("movingUP", "movingDOWN"):
                    phase = "stopped"
        return Assignment((phase, carpos, dest))

    def output(s):
        phase, carpos, dest = s
        if phase in ("dispatch", "redispatch"):
            return (Emit.of("req", "MsgReq", dest=dest),)
        if phase == "complete":
            return (
                Emit.of("serviced", "MsgCar", status="SERVICED", pos=carpos),
                Emit.of("req", "MsgReq", dest=dest),
            )
        return ()

    return AtomicSpec(
        comp_id, ("btn", "car"), ("req", "serviced"), "elevator_ctrl",
        _params(start=start, floors=floors),
        space, Assignment(("idle", start, 0)),
        Behavior(ta, delta_int, delta_ext, output),
    )


def elevator_system(start: int = 1, floors: int = FLOORS) -> CoupledSpec:
    """The coupled model: controller, car assembly, one button per floor."""
    car = CoupledSpec(
        id="Car",
        input_ports=("press", "req"),
        output_ports=("btn", "status"),
        children=(
            motor("Motor", {"start": start, "floors": floors}),
            car_ctrl("CarCtrl", {"start": start, "floors": floors}),
            button("CarBtn", {"floors": floors}),
            car_door("CarDoor", {}),
        ),
        couplings=(
            eic("press", ("CarBtn", "press"), "Car"),
            eic("req", ("CarCtrl", "req"), "Car"),
            ic(("CarCtrl", "motor_out"), ("Motor", "cmd")),
            ic(("Motor", "status"), ("CarCtrl", "motor_in")),
            ic(("CarCtrl", "door_out"), ("CarDoor", "cmd")),
            ic(("CarDoor", "status"), ("CarCtrl", "door_in")),
            eoc(("CarBtn", "btn"), "btn", "Car"),
            eoc(("CarCtrl", "status"), "status", "Car"),
        ),
    )
    floors_specs = tuple(
        button(f"Floor{i}", {"floors": floors}) for i in range(1, floors + 1)
    )
    inputs = ("press_car",) + tuple(f"press_floor{i}" for i in range(1, floors + 1))
    couplings = [
        eic("press_car", ("Car", "press"), "Elevator"),
    ]
    couplings.extend(
        eic(f"press_floor{i}", (f"Floor{i}", "press"), "Elevator")
        for i in range(1, floors + 1)
    )
    couplings.append(ic(("Car", "btn"), ("ElevatorCtrl", "btn")))
    couplings.extend(
        ic((f"Floor{i}", "btn"), ("ElevatorCtrl", "btn")) for i in range(1, floors + 1)
    )
    couplings.append(ic(("Car", "status"), ("ElevatorCtrl", "car")))
    couplings.append(ic(("ElevatorCtrl", "req"), ("Car", "req")))
    couplings.append(eoc(("ElevatorCtrl", "serviced"), "serviced", "Elevator"))
    return CoupledSpec(
        id="Elevator",
        input_ports=inputs,
        output_ports=("serviced",),
        children=(elevator_ctrl("ElevatorCtrl", {"start": start, "floors": floors}), car)
        + floors_specs,
        couplings=tuple(couplings),
    )


# -- process models ------------------------------------------------------------


def car_known_model() -> ProcessModel:
    space = VariableSpace.of(
        ("statusCarDoor", ("CLOSED", "OPEN")),
        ("motorRunning", ("ON", "OFF")),
    )
    sm = StateModel.from_rows(
        space,
        ["RUNNING", "STOPPED"],
        [(("CLOSED", "*"), "RUNNING"), (("OPEN", "OFF"), "STOPPED")],
    )
    return ProcessModel(sm, frozenset({("RUNNING", "STOPPED"), ("STOPPED", "RUNNING")}))


def car_ground_model(floors: int = FLOORS) -> ProcessModel:
    space = VariableSpace.of(
        ("statusCarDoor", ("CLOSED", "OPEN")),
        ("motorRunning", ("ON", "OFF")),
        ("pos", IntRange(1, floors)),
    )
    sm = StateModel.from_rows(
        space,
        ["RUNNING", "STOPPED", "X"],
        [
            (("CLOSED", "*", "*"), "RUNNING"),
            (("OPEN", "OFF", "*"), "STOPPED"),
            (("OPEN", "ON", "*"), "X"),
        ],
    )
    transitions = frozenset(
        {("RUNNING", "STOPPED"), ("STOPPED", "RUNNING"), ("STOPPED", "X")}
    )
    return ProcessModel(sm, transitions, initial="STOPPED")


def car_connection(start: int = 1, floors: int = FLOORS) -> Connection:
    return Connection(
        car_known_model(),
        car_ground_model(floors),
        defaults={"pos": start},
        sources={
            "statusCarDoor": ("CarDoor", "pos"),
            "motorRunning": ("Motor", "running"),
            "pos": ("Motor", "pos"),
        },
    )


def position_known_model(floors: int = FLOORS) -> ProcessModel:
    space = VariableSpace.of(("pos", IntRange(1, floors)))
    states = [f"At{i}" for i in range(1, floors + 1)]
    sm = StateModel(
        space, frozenset(states), {(i,): f"At{i}" for i in range(1, floors + 1)}
    )
    transitions = frozenset(
        (f"At{i}", f"At{j}")
        for i in range(1, floors + 1)
        for j in range(1, floors + 1)
        if abs(i - j) <= 1
    )
    return ProcessModel(sm, transitions)


def position_ground_model(start: int = 1, floors: int = FLOORS) -> ProcessModel:
    """True car position; the shared believed-position variable is ignored."""
    space = VariableSpace.of(("pos", IntRange(1, floors)), ("actual", IntRange(1, floors)))
    states = [f"At{i}" for i in range(1, floors + 1)]
    rows = [(("*", i), f"At{i}") for i in range(1, floors + 1)]
    sm = StateModel.from_rows(space, states, rows)
    return ProcessModel(
        sm, position_known_model(floors).transitions, initial=f"At{start}"
    )


def position_connection(start: int = 1, floors: int = FLOORS) -> Connection:
    return Connection(
        position_known_model(floors),
        position_ground_model(start, floors),
        defaults={"actual": start},
        sources={"pos": ("CarCtrl", "pos"), "actual": ("Motor", "pos")},
    )


def ctrl_known_model() -> ProcessModel:
    space = VariableSpace.of(("phase", ("idle", "movingUP", "movingDOWN", "stopped")))
    states = ("idle", "movingUP", "movingDOWN", "stopped")
    sm = StateModel(space, frozenset(states), {(p,): p for p in states})
    transitions = frozenset({
        ("idle", "movingUP"), ("idle", "movingDOWN"),
        ("movingUP", "idle"), ("movingDOWN", "idle"),
    })
    return ProcessModel(sm, transitions)


def ctrl_ground_model(start: int = 1, floors: int = FLOORS) -> ProcessModel:
    space = VariableSpace.of(("phase", PHASES_CTRL), ("carpos", IntRange(1, floors)))
    states = ("idle", "movingUP", "movingDOWN", "stopped")
    # Zero-time phases never survive an instant and stay unobserved.
    rows = [((p, "*"), p) for p in states]
    sm = StateModel.from_rows(space, states, rows)
    transitions = frozenset(ctrl_known_model().transitions | {
        ("movingUP", "stopped"), ("movingDOWN", "stopped"),
        ("stopped", "movingUP"), ("stopped", "movingDOWN"), ("stopped", "idle"),
    })
    return ProcessModel(sm, transitions, initial="idle")


def ctrl_connection(start: int = 1, floors: int = FLOORS) -> Connection:
    return Connection(
        ctrl_known_model(),
        ctrl_ground_model(start, floors),
        defaults={"carpos": start},
        sources={"phase": ("ElevatorCtrl", "phase"), "carpos": ("ElevatorCtrl", "carpos")},
    )
