"""Man-in-the-middle insertion: rewire intercepted couplings through a
zero-latency simulator component.

Interception is computed on the flattened coupling graph, so indirectly
connected targets (across hierarchy levels) are covered; the returned spec
is flat. External input/output couplings are never rewired.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from ..devs.kernel import SimulationSystem
from ..devs.spec import CoupledSpec, Coupling, eic, eoc, ic
from ..effects.ast import EffectProgram, Generate, EMPTY_PROGRAM
from .simulator import SIM_ID, attack_sim_atomic

Link = Tuple[Tuple[str, str], Tuple[str, str]]  # (src comp, port) -> (dst comp, port)


class UnknownTarget(ValueError):
    pass


class AlreadyInserted(ValueError):
    pass


class UnroutableGenerate(ValueError):
    """A generate operator names a pair with no intercepted coupling."""


@dataclass(frozen=True)
class InterceptPlan:
    targets: FrozenSet[str]
    rewired: Tuple[Tuple[Link, Tuple[Link, Link]], ...]  # original -> (to sim, from sim)

    @property
    def intercepted_links(self) -> Tuple[Link, ...]:
        return tuple(original for original, _ in self.rewired)


def in_port(src: Tuple[str, str]) -> str:
    return f"in_{src[0]}_{src[1]}"


def out_port(dst: Tuple[str, str]) -> str:
    return f"out_{dst[0]}_{dst[1]}"


def _leaf_targets(system: SimulationSystem, spec: CoupledSpec, targets: Iterable[str]) -> FrozenSet[str]:
    coupled_ids: Dict[str, CoupledSpec] = {}

    def walk(node) -> None:
        if isinstance(node, CoupledSpec):
            coupled_ids[node.id] = node
            for child in node.children:
                walk(child)

    walk(spec)
    resolved = set()
    for target in targets:
        if target in system.leaves:
            resolved.add(target)
        elif target in coupled_ids:
            stack = [coupled_ids[target]]
            while stack:
                node = stack.pop()
                for child in node.children:
                    if isinstance(child, CoupledSpec):
                        stack.append(child)
                    else:
                        resolved.add(child.id)
        else:
            raise UnknownTarget(f"{target!r} is not a component of {spec.id!r}")
    return frozenset(resolved)


def insert_attack_simulator(
    spec: CoupledSpec,
    targets: Iterable[str],
    program: EffectProgram = EMPTY_PROGRAM,
    snapshots: Optional[Mapping[str, str]] = None,
) -> Tuple[CoupledSpec, InterceptPlan]:
    """Flatten, intercept every coupling between two targets, add the simulator.

    The program is bound into the simulator's initial state; with the empty
    program the rewired system is trace-equivalent to the original apart
    from the simulator's own zero-time hop records.
    """
    system = SimulationSystem(spec)
    if SIM_ID in system.leaves:
        raise AlreadyInserted(f"{spec.id!r} already contains {SIM_ID}")
    leaf_targets = _leaf_targets(system, spec, targets)

    intercepted: Dict[Link, None] = {}
    plain_links = []
    eoc_links = []
    for source in sorted(system.routes):
        for dest in system.routes[source]:
            target = dest.logical
            if target[0] == spec.id:
                eoc_links.append((source, target))
            elif source[0] in leaf_targets and target[0] in leaf_targets:
                intercepted[(source, target)] = None
            else:
                plain_links.append((source, target))

    routes = {}
    for (src, dst) in intercepted:
        routes.setdefault((src[0], dst[0]), (src[1], dst[1]))
    for effect in program.effects:
        op = effect.operator
        if isinstance(op, Generate) and (op.from_comp, op.to_comp) not in routes:
            raise UnroutableGenerate(
                f"effect {effect.name!r} generates {op.from_comp}->{op.to_comp}, "
                "which is not an intercepted pair"
            )

    sim = attack_sim_atomic(
        program=program,
        in_ports=tuple(sorted({in_port(src) for src, _ in intercepted})),
        out_ports=tuple(sorted({out_port(dst) for _, dst in intercepted})),
        routes=routes,
        snapshots=dict(snapshots or {}),
        targets=leaf_targets,
    )

    couplings = []
    for port in spec.input_ports:
        for dest in system.eic_routes.get(port, ()):
            couplings.append(eic(port, dest.logical, spec.id))
    for source, dest in plain_links:
        couplings.append(ic(source, dest))
    for source, dest in eoc_links:
        couplings.append(eoc(source, dest[1], spec.id))
    rewired = []
    for src, dst in intercepted:
        to_sim = (src, (SIM_ID, in_port(src)))
        from_sim = ((SIM_ID, out_port(dst)), dst)
        # Messages keep the original address while physically visiting the sim.
        couplings.append(Coupling("IC", src, to_sim[1], logical_target=dst))
        couplings.append(ic(*from_sim))
        rewired.append(((src, dst), (to_sim, from_sim)))

    children = tuple(system.leaves[name] for name in sorted(system.leaves)) + (sim,)
    flat = CoupledSpec(
        id=spec.id,
        input_ports=spec.input_ports,
        output_ports=spec.output_ports,
        children=children,
        couplings=tuple(couplings),
    )
    plan = InterceptPlan(targets=leaf_targets, rewired=tuple(rewired))
    return flat, plan
