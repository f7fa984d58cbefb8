"""Atomic and coupled model descriptions.

An atomic spec bundles the declarative surface (ports, state variable
space, initial state, a registry kind and its parameters) with a behavior
object holding the transition functions. Behavior callables are excluded
from equality so two specs built through the same registry compare equal
structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Tuple, Union

from ..pmi.space import VariableSpace
from .messages import Message


class DuplicateLabel(ValueError):
    pass


class SelfInfluence(ValueError):
    pass


class DanglingCoupling(ValueError):
    pass


@dataclass(frozen=True)
class Emit:
    """Output-function result: a typed payload leaving through a port."""

    port: str
    msg_type: str
    fields: Tuple[Tuple[str, Any], ...]

    @staticmethod
    def of(port: str, msg_type: str, **fields: Any) -> "Emit":
        return Emit(port, msg_type, tuple(fields.items()))


@dataclass(frozen=True)
class Forward:
    """Output-function result: re-emission of an existing message object.

    Used by the attack simulator so pass-through keeps the message identity.
    """

    port: str
    message: Message


Output = Union[Emit, Forward]


@dataclass(frozen=True)
class Behavior:
    """DEVS transition functions over an opaque state.

    delta_con defaults to delta_int on an empty bag and otherwise to
    delta_ext applied after delta_int with zero elapsed time. Behaviors with
    wants_ctx receive the kernel's run context as an extra final argument to
    every transition function (used for message-id allocation and trace
    records by instrumented components).
    """

    ta: Callable[[Any], Any]
    delta_int: Callable[[Any], Any]
    delta_ext: Callable[..., Any]
    output: Callable[[Any], Tuple[Output, ...]]
    delta_con: Optional[Callable[..., Any]] = None
    wants_ctx: bool = False


@dataclass(frozen=True)
class AtomicSpec:
    id: str
    input_ports: Tuple[str, ...]
    output_ports: Tuple[str, ...]
    kind: str
    params: Tuple[Tuple[str, Any], ...]
    space: Optional[VariableSpace]
    initial: Any
    behavior: Behavior = field(compare=False, repr=False)

    @property
    def params_dict(self) -> Mapping[str, Any]:
        return dict(self.params)


@dataclass(frozen=True)
class Coupling:
    kind: str  # "EIC" | "IC" | "EOC"
    source: Tuple[str, str]
    target: Tuple[str, str]
    # When a coupling is rerouted through an interceptor, the address the
    # original coupling delivered to; messages keep it as their target.
    logical_target: Optional[Tuple[str, str]] = None


def eic(src_port: str, target: Tuple[str, str], owner: str) -> Coupling:
    return Coupling("EIC", (owner, src_port), tuple(target))


def ic(source: Tuple[str, str], target: Tuple[str, str]) -> Coupling:
    return Coupling("IC", tuple(source), tuple(target))


def eoc(source: Tuple[str, str], dst_port: str, owner: str) -> Coupling:
    return Coupling("EOC", tuple(source), (owner, dst_port))


@dataclass(frozen=True)
class CoupledSpec:
    id: str
    input_ports: Tuple[str, ...]
    output_ports: Tuple[str, ...]
    children: Tuple[Union[AtomicSpec, "CoupledSpec"], ...]
    couplings: Tuple[Coupling, ...]

    def child(self, label: str) -> Union[AtomicSpec, "CoupledSpec"]:
        for c in self.children:
            if c.id == label:
                return c
        raise KeyError(label)


def validate_coupled(spec: CoupledSpec) -> None:
    """Check label uniqueness, endpoint existence and influence rules."""
    labels = [c.id for c in spec.children]
    if len(set(labels)) != len(labels):
        raise DuplicateLabel(f"duplicate child labels in {spec.id!r}")
    if spec.id in labels:
        raise DuplicateLabel(f"child of {spec.id!r} shares its label")
    by_id = {c.id: c for c in spec.children}
    for cp in spec.couplings:
        s_id, s_port = cp.source
        t_id, t_port = cp.target
        if cp.kind == "EIC":
            if s_id != spec.id or s_port not in spec.input_ports:
                raise DanglingCoupling(f"EIC source {cp.source} is not an input of {spec.id!r}")
            if t_id not in by_id or t_port not in by_id[t_id].input_ports:
                raise DanglingCoupling(f"EIC target {cp.target} unknown in {spec.id!r}")
        elif cp.kind == "EOC":
            if t_id != spec.id or t_port not in spec.output_ports:
                raise DanglingCoupling(f"EOC target {cp.target} is not an output of {spec.id!r}")
            if s_id not in by_id or s_port not in by_id[s_id].output_ports:
                raise DanglingCoupling(f"EOC source {cp.source} unknown in {spec.id!r}")
        elif cp.kind == "IC":
            if s_id == t_id:
                raise SelfInfluence(f"{s_id!r} influences itself in {spec.id!r}")
            if s_id not in by_id or s_port not in by_id[s_id].output_ports:
                raise DanglingCoupling(f"IC source {cp.source} unknown in {spec.id!r}")
            if t_id not in by_id or t_port not in by_id[t_id].input_ports:
                raise DanglingCoupling(f"IC target {cp.target} unknown in {spec.id!r}")
        else:
            raise DanglingCoupling(f"unknown coupling kind {cp.kind!r}")
    for c in spec.children:
        if isinstance(c, CoupledSpec):
            validate_coupled(c)
