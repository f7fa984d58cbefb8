"""Seeded random generation of connected model pairs for property testing.

Spaces are kept at desk scale (at most 4 variables of at most 3 values,
at most 8 states) so brute-force oracles over the full assignment universe
stay tractable. All randomness flows through the caller's Random instance;
generation is deterministic for a fixed seed.
"""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Tuple

from .models import Connection, ProcessModel, StateModel
from .space import VariableSpace


def _random_state_model(
    rng: random.Random,
    space: VariableSpace,
    states: List[str],
    unobservable_p: float,
) -> StateModel:
    universe = list(space.enumerate())
    rng.shuffle(universe)
    mapping: Dict[Tuple, str] = {}
    for state, p in zip(states, universe):
        mapping[p.values] = state  # one guaranteed preimage per state
    for p in universe[len(states):]:
        if rng.random() >= unobservable_p:
            mapping[p.values] = rng.choice(states)
    return StateModel(space, frozenset(states), mapping)


def _spanning_transitions(rng: random.Random, states: List[str], extra_p: float) -> set:
    transitions = set()
    reachable = [states[0]]
    for s in states[1:]:
        transitions.add((rng.choice(reachable), s))
        reachable.append(s)
    for a in states:
        for b in states:
            if rng.random() < extra_p:
                transitions.add((a, b))
    return transitions


def random_connection(
    rng: random.Random,
    max_vars: int = 4,
    max_domain: int = 3,
    max_states: int = 8,
    ensure_incomplete: bool = True,
    ensure_forced_state: Optional[bool] = None,
) -> Connection:
    """One random known/ground pair connected by inclusion and projection."""
    n = rng.randint(2, max_vars)
    m = rng.randint(1, n - 1)
    ground_vars = []
    for i in range(n):
        size = rng.randint(1, max_domain)
        ground_vars.append((f"v{i}", tuple(f"v{i}x{j}" for j in range(size))))
    known_vars = []
    for name, dom in ground_vars[:m]:
        ksize = rng.randint(1, len(dom))
        sub = sorted(rng.sample(range(len(dom)), ksize))
        known_vars.append((name, tuple(dom[j] for j in sub)))
    ground_space = VariableSpace(tuple(ground_vars))
    known_space = VariableSpace(tuple(known_vars))

    k_r = rng.randint(1, min(max_states, ground_space.size()))
    ground_states = [f"G{i}" for i in range(k_r)]
    t_r = _spanning_transitions(rng, ground_states, extra_p=0.20)
    if not t_r:
        t_r.add((ground_states[0], ground_states[0]))

    if ensure_forced_state is None:
        ensure_forced_state = rng.random() < 0.5
    known_states = [s for s in ground_states if rng.random() < 0.75]
    if ensure_forced_state and len(known_states) == len(ground_states):
        known_states.pop(rng.randrange(len(known_states)))
    if not ensure_forced_state and rng.random() < 0.7:
        known_states = list(ground_states)
    for i in range(rng.randint(0, 2)):  # states only the controller believes in
        known_states.append(f"K{i}")
    known_states = known_states[: min(max_states, known_space.size())]
    if not known_states:
        known_states = [ground_states[0]]
    if ground_states[0] not in known_states and not any(b == ground_states[0] for _, b in t_r):
        # Keep every forced state enterable: the initial state needs an
        # incoming transition for the forced-transition lemma to bite.
        t_r.add((rng.choice(ground_states), ground_states[0]))

    t_k = set()
    for a in known_states:
        for b in known_states:
            if (a, b) in t_r and rng.random() < 0.6:
                t_k.add((a, b))
            elif rng.random() < 0.10:
                t_k.add((a, b))

    ground_sm = _random_state_model(rng, ground_space, ground_states, unobservable_p=0.2)
    faithful = rng.random() < 0.5
    defaults = {name: rng.choice(dom) for name, dom in ground_vars[m:]}
    if faithful:
        # Project the ground observation wherever it lands in a known state.
        mapping: Dict[Tuple, str] = {}
        for p in known_space.enumerate():
            extended = p.values + tuple(defaults[name] for name, _ in ground_vars[m:])
            state = ground_sm.mapping.get(extended)
            if state in known_states:
                mapping[p.values] = state
            elif rng.random() < 0.4:
                mapping[p.values] = rng.choice(known_states)
        missing = [s for s in known_states if s not in set(mapping.values())]
        free = [p.values for p in known_space.enumerate() if p.values not in mapping]
        rng.shuffle(free)
        if len(free) < len(missing):
            # Not enough unclaimed assignments; rebuild at random instead.
            known_sm = _random_state_model(rng, known_space, known_states, unobservable_p=0.2)
        else:
            for s, values in zip(missing, free):
                mapping[values] = s
            known_sm = StateModel(known_space, frozenset(known_states), mapping)
    else:
        known_sm = _random_state_model(rng, known_space, known_states, unobservable_p=0.2)

    if ensure_incomplete:
        forced_states = set(ground_states) - set(known_states)
        if not (set(t_r) - t_k) and not forced_states:
            victim = sorted(t_r)[rng.randrange(len(t_r))]
            t_k.discard(victim)

    known = ProcessModel(known_sm, frozenset(t_k))
    ground = ProcessModel(ground_sm, frozenset(t_r), initial=ground_states[0])
    return Connection(known, ground, defaults)
