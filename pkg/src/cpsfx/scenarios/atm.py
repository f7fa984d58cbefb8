"""ATM reference system: one controller, a customer-side hardware
interface (card slot, keypad, cash tray) and a stubbed verification host.

The firmware keeps a vestigial service-dispense entry point (MsgSvc); no
legitimate flow sends it, which is exactly the hole the jackpotting script
drives. Cash leaving the tray has no sensor: after dispensing, the
controller times out toward the next interaction, so physical trapping is
invisible to it.
"""

from __future__ import annotations

from typing import Mapping, Tuple

from ..devs.messages import INFINITY
from ..devs.spec import AtomicSpec, Behavior, CoupledSpec, Emit, eic, ic
from ..pmi.models import Connection, ProcessModel, StateModel
from ..pmi.space import Assignment, IntRange, VariableSpace

PHASES_ATM = (
    "CARDWAIT", "PINWAIT", "VERIFYSEND", "VERIFY", "WRONGPIN",
    "PROCTX", "DISPENSECMD", "DISPENSE", "ANOTHERTX",
    "EJECTCMD", "EJECT", "RECEIPTPREP", "RECEIPT",
    "SVCDISPENSE", "SVCFIRE",
)

# Firmware phases visible to the designed state machine.
KNOWN_PHASES = (
    "CARDWAIT", "PINWAIT", "VERIFY", "WRONGPIN", "PROCTX",
    "DISPENSE", "ANOTHERTX", "EJECT", "RECEIPT",
)

STATE_OF_PHASE = {
    "CARDWAIT": "Insert Readable Card",
    "PINWAIT": "Request Password",
    "VERIFY": "Verify Account",
    "WRONGPIN": "Wrong PIN",
    "PROCTX": "Process Transaction",
    "DISPENSE": "Dispense Cash",
    "ANOTHERTX": "Another Transaction",
    "EJECT": "Eject Card",
    "RECEIPT": "Print Receipt",
}

KNOWN_TRANSITIONS = frozenset({
    ("Insert Readable Card", "Request Password"),
    ("Request Password", "Verify Account"),
    ("Verify Account", "Process Transaction"),
    ("Verify Account", "Wrong PIN"),
    ("Wrong PIN", "Request Password"),
    ("Wrong PIN", "Print Receipt"),
    ("Process Transaction", "Dispense Cash"),
    ("Dispense Cash", "Another Transaction"),
    ("Another Transaction", "Process Transaction"),
    ("Another Transaction", "Eject Card"),
    ("Eject Card", "Print Receipt"),
    ("Print Receipt", "Insert Readable Card"),
})

FORCED_TRANSITIONS = frozenset({
    ("Eject Card", "Trap Card"),
    ("Trap Card", "Insert Readable Card"),
    ("Dispense Cash", "Trap Cash"),
    ("Trap Cash", "Eject Card"),
    ("Insert Readable Card", "Activate Malware"),
    ("Activate Malware", "Dispense Cash"),
})


def _params(**kv) -> Tuple[Tuple[str, object], ...]:
    return tuple(sorted(kv.items()))


def atm_controller(comp_id: str, params: Mapping) -> AtomicSpec:
    max_tries = params.get("max_tries", 3)
    dispense_ticks = params.get("dispense_ticks", 5)
    menu_ticks = params.get("menu_ticks", 8)
    space = VariableSpace.of(
        ("phase", PHASES_ATM),
        ("tries", IntRange(0, max_tries)),
        ("pin", IntRange(0, 9999)),
    )
    delays = {
        "VERIFYSEND": 0, "WRONGPIN": 2, "DISPENSECMD": 0, "DISPENSE": dispense_ticks,
        "ANOTHERTX": menu_ticks, "EJECTCMD": 0, "EJECT": 2, "RECEIPTPREP": 0,
        "RECEIPT": 3, "SVCDISPENSE": 1, "SVCFIRE": 0,
    }

    def ta(s):
        return delays.get(s[0], INFINITY)

    def delta_int(s):
        phase, tries, pin = s
        if phase == "VERIFYSEND":
            phase = "VERIFY"
        elif phase == "WRONGPIN":
            phase = "PINWAIT" if tries < max_tries else "RECEIPTPREP"
        elif phase == "DISPENSECMD":
            phase = "DISPENSE"
        elif phase == "DISPENSE":
            phase = "ANOTHERTX"
        elif phase == "ANOTHERTX":
            phase = "EJECTCMD"  # nothing more requested; give the card back
        elif phase == "EJECTCMD":
            phase = "EJECT"
        elif phase == "EJECT":
            phase = "RECEIPTPREP"
        elif phase == "RECEIPTPREP":
            phase = "RECEIPT"
        elif phase == "RECEIPT":
            phase, tries = "CARDWAIT", 0
        elif phase == "SVCDISPENSE":
            phase = "SVCFIRE"
        elif phase == "SVCFIRE":
            phase = "DISPENSE"
        return Assignment((phase, tries, pin))

    def delta_ext(s, e, bag):
        phase, tries, pin = s
        for msg in bag:
            kind = msg.msg_type
            if kind == "MsgCard" and msg.field("action") == "INSERTED" and phase == "CARDWAIT":
                phase = "PINWAIT"
            elif kind == "MsgSvc" and msg.field("code") == "DISPENSE" and phase == "CARDWAIT":
                phase = "SVCDISPENSE"
            elif kind == "MsgPin" and phase == "PINWAIT":
                pin, phase = msg.field("pin"), "VERIFYSEND"
            elif kind == "MsgBank" and phase == "VERIFY":
                if msg.field("result") == "OK":
                    phase = "PROCTX"
                else:
                    tries, phase = min(tries + 1, max_tries), "WRONGPIN"
            elif kind == "MsgAmt" and phase in ("PROCTX", "ANOTHERTX"):
                phase = "DISPENSECMD"
            elif kind == "MsgDone" and phase == "ANOTHERTX":
                phase = "EJECTCMD"
        return Assignment((phase, tries, pin))

    def output(s):
        phase, tries, pin = s
        if phase == "VERIFYSEND":
            return (Emit.of("bank", "MsgBank", pin=pin, result="NONE"),)
        if phase in ("DISPENSECMD", "SVCFIRE"):
            return (Emit.of("cust_out", "MsgCash", action="DISPENSE"),)
        if phase == "EJECTCMD":
            return (Emit.of("cust_out", "MsgCard", action="EJECT"),)
        return ()

    return AtomicSpec(
        comp_id, ("cust", "bankin"), ("cust_out", "bank"), "atm_controller",
        _params(max_tries=max_tries, dispense_ticks=dispense_ticks, menu_ticks=menu_ticks),
        space, Assignment(("CARDWAIT", 0, 0)),
        Behavior(ta, delta_int, delta_ext, output),
    )


def atm_customer(comp_id: str, params: Mapping) -> AtomicSpec:
    """Physical interface: relays user actions, holds card and cash state."""
    ticks = params.get("ticks", 1)
    space = VariableSpace.of(
        ("card", ("NONE", "IN")),
        ("cash", ("NONE", "DISPENSED", "TAKEN", "TRAPPED")),
        ("phase", ("idle", "emit")),
        ("outkind", ("NONE", "INSERTED", "PIN", "AMT", "DONE")),
        ("outval", IntRange(0, 9999)),
    )

    def ta(s):
        return ticks if s[2] == "emit" else INFINITY

    def delta_int(s):
        card, cash, _, _, _ = s
        return Assignment((card, cash, "idle", "NONE", 0))

    def delta_ext(s, e, bag):
        card, cash, phase, outkind, outval = s
        for msg in bag:
            if msg.msg_type == "MsgUser":
                act = msg.field("act")
                value = msg.field("value")
                if act == "INSERT":
                    card, phase, outkind = "IN", "emit", "INSERTED"
                elif act == "PIN":
                    phase, outkind, outval = "emit", "PIN", value
                elif act == "AMOUNT":
                    phase, outkind, outval = "emit", "AMT", value
                elif act == "TAKECASH":
                    if cash == "DISPENSED":
                        cash = "TAKEN"
                elif act == "DONE":
                    phase, outkind = "emit", "DONE"
            elif msg.msg_type == "MsgCash":
                action = msg.field("action")
                if action == "DISPENSE":
                    cash = "DISPENSED"
                elif action == "TRAPPED":
                    cash = "TRAPPED"
            elif msg.msg_type == "MsgCard" and msg.field("action") == "EJECT":
                card = "NONE"
        return Assignment((card, cash, phase, outkind, outval))

    def output(s):
        _, _, _, outkind, outval = s
        if outkind == "INSERTED":
            return (Emit.of("atm", "MsgCard", action="INSERTED"),)
        if outkind == "PIN":
            return (Emit.of("atm", "MsgPin", pin=outval),)
        if outkind == "AMT":
            return (Emit.of("atm", "MsgAmt", amount=outval),)
        if outkind == "DONE":
            return (Emit.of("atm", "MsgDone"),)
        return ()

    return AtomicSpec(
        comp_id, ("user", "cmd"), ("atm",), "atm_customer", _params(ticks=ticks),
        space, Assignment(("NONE", "NONE", "idle", "NONE", 0)),
        Behavior(ta, delta_int, delta_ext, output),
    )


def atm_bank(comp_id: str, params: Mapping) -> AtomicSpec:
    """Immediate-reply verification stub."""
    good_pin = params.get("good_pin", 1234)
    space = VariableSpace.of(
        ("phase", ("idle", "reply")),
        ("result", ("NONE", "OK", "BAD")),
    )

    def ta(s):
        return 1 if s[0] == "reply" else INFINITY

    def delta_int(s):
        return Assignment(("idle", "NONE"))

    def delta_ext(s, e, bag):
        phase, result = s
        for msg in bag:
            if msg.msg_type == "MsgBank" and msg.field("result") == "NONE":
                result = "OK" if msg.field("pin") == good_pin else "BAD"
                phase = "reply"
        return Assignment((phase, result))

    def output(s):
        return (Emit.of("resp", "MsgBank", pin=0, result=s[1]),)

    return AtomicSpec(
        comp_id, ("req",), ("resp",), "atm_bank", _params(good_pin=good_pin),
        space, Assignment(("idle", "NONE")),
        Behavior(ta, delta_int, delta_ext, output),
    )


def atm_system() -> CoupledSpec:
    return CoupledSpec(
        id="AtmSystem",
        input_ports=("user",),
        output_ports=(),
        children=(
            atm_controller("ATM", {}),
            atm_customer("Cust", {}),
            atm_bank("Bank", {}),
        ),
        couplings=(
            eic("user", ("Cust", "user"), "AtmSystem"),
            ic(("Cust", "atm"), ("ATM", "cust")),
            ic(("ATM", "cust_out"), ("Cust", "cmd")),
            ic(("ATM", "bank"), ("Bank", "req")),
            ic(("Bank", "resp"), ("ATM", "bankin")),
        ),
    )


# -- process models ------------------------------------------------------------


def atm_known_model() -> ProcessModel:
    space = VariableSpace.of(("phase", KNOWN_PHASES))
    states = tuple(STATE_OF_PHASE.values())
    sm = StateModel(
        space, frozenset(states), {(p,): STATE_OF_PHASE[p] for p in KNOWN_PHASES}
    )
    return ProcessModel(sm, KNOWN_TRANSITIONS, initial="Insert Readable Card")


def atm_ground_model(max_tries: int = 3) -> ProcessModel:
    space = VariableSpace.of(
        ("phase", PHASES_ATM),
        ("card", ("NONE", "IN")),
        ("cash", ("NONE", "DISPENSED", "TAKEN", "TRAPPED")),
        ("tries", IntRange(0, max_tries)),
    )
    states = tuple(STATE_OF_PHASE.values()) + ("Trap Card", "Trap Cash", "Activate Malware")
    rows = [
        (("SVCDISPENSE", "*", "*", "*"), "Activate Malware"),
        (("RECEIPT", "*", "*", max_tries), "Print Receipt"),  # intentional retention
        (("RECEIPT", "IN", "*", "*"), "Trap Card"),
        (("RECEIPT", "*", "*", "*"), "Print Receipt"),
        (("ANOTHERTX", "*", "TRAPPED", "*"), "Trap Cash"),
        (("ANOTHERTX", "*", "*", "*"), "Another Transaction"),
        (("CARDWAIT", "*", "*", "*"), "Insert Readable Card"),
        (("PINWAIT", "*", "*", "*"), "Request Password"),
        (("VERIFY", "*", "*", "*"), "Verify Account"),
        (("WRONGPIN", "*", "*", "*"), "Wrong PIN"),
        (("PROCTX", "*", "*", "*"), "Process Transaction"),
        (("DISPENSE", "*", "*", "*"), "Dispense Cash"),
        (("EJECT", "*", "*", "*"), "Eject Card"),
    ]
    sm = StateModel.from_rows(space, states, rows)
    return ProcessModel(
        sm, KNOWN_TRANSITIONS | FORCED_TRANSITIONS, initial="Insert Readable Card"
    )


def atm_connection(max_tries: int = 3) -> Connection:
    return Connection(
        atm_known_model(),
        atm_ground_model(max_tries),
        defaults={"card": "NONE", "cash": "NONE", "tries": 0},
        sources={
            "phase": ("ATM", "phase"),
            "card": ("Cust", "card"),
            "cash": ("Cust", "cash"),
            "tries": ("ATM", "tries"),
        },
    )
