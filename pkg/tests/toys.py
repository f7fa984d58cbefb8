"""Small reusable atomic models for kernel and interception tests."""

from cpsfx.devs import AtomicSpec, Behavior, Emit, INFINITY
from cpsfx.pmi import Assignment, IntRange, VariableSpace


def pulser(comp_id: str, period: int, count: int, msg_type: str = "MsgTick") -> AtomicSpec:
    """Emits `count` messages on port `out`, one every `period` ticks."""
    space = VariableSpace.of(("sent", IntRange(0, count)))

    def ta(s):
        return period if s[0] < count else INFINITY

    def delta_int(s):
        return Assignment((s[0] + 1,))

    def delta_ext(s, e, bag):
        return s

    def output(s):
        return (Emit.of("out", msg_type, n=s[0]),)

    return AtomicSpec(
        comp_id, ("in",), ("out",), "pulser", (("period", period), ("count", count)),
        space, Assignment((0,)),
        Behavior(ta, delta_int, delta_ext, output),
    )


def counter(comp_id: str, limit: int = 100) -> AtomicSpec:
    """Passive accumulator of everything arriving on port `in`."""
    space = VariableSpace.of(("seen", IntRange(0, limit)))

    def ta(s):
        return INFINITY

    def delta_int(s):
        return s

    def delta_ext(s, e, bag):
        return Assignment((s[0] + len(bag),))

    def output(s):
        return ()

    return AtomicSpec(
        comp_id, ("in",), (), "counter", (("limit", limit),),
        space, Assignment((0,)),
        Behavior(ta, delta_int, delta_ext, output),
    )


def relay(comp_id: str, msg_type: str = "MsgTick") -> AtomicSpec:
    """Re-emits each received message after zero delay."""
    space = VariableSpace.of(("pending", IntRange(0, 1_000)))

    def ta(s):
        return 0 if s[0] > 0 else INFINITY

    def delta_int(s):
        return Assignment((0,))

    def delta_ext(s, e, bag):
        return Assignment((s[0] + len(bag),))

    def output(s):
        return tuple(Emit.of("out", msg_type, n=i) for i in range(s[0]))

    return AtomicSpec(
        comp_id, ("in",), ("out",), "relay", (),
        space, Assignment((0,)),
        Behavior(ta, delta_int, delta_ext, output),
    )
