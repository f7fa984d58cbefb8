"""Independent brute-force enumeration used to check the theorem machinery.

Deliberately re-derives observability from the raw definitions (domain
membership and mapping lookups) rather than calling the library's
observation helpers.
"""


def observe_in_known(connection, values):
    """Known-model observation of a ground value tuple, or None."""
    known_space = connection.known.space
    head = values[: known_space.arity]
    for value, (_, domain) in zip(head, known_space.vars):
        if value not in domain:
            return None
    return connection.known.state_model.mapping.get(head)


def preimages(model):
    pre = {}
    for values, state in model.state_model.mapping.items():
        pre.setdefault(state, []).append(values)
    return pre


def theorem_outcome_kind(connection) -> str:
    """Enumerate every witness pair of every forced transition."""
    forced = sorted(set(connection.ground.transitions) - set(connection.known.transitions))
    assert forced, "oracle needs an incomplete connection with realizable forced transitions"
    pre = preimages(connection.ground)
    any_bad = False
    for s_a, s_b in forced:
        for p_a in pre.get(s_a, ()):
            for p_b in pre.get(s_b, ()):
                o_a = observe_in_known(connection, p_a)
                o_b = observe_in_known(connection, p_b)
                if o_a is None or o_b is None or (o_a, o_b) != (s_a, s_b):
                    any_bad = True
    return "PmiInstance" if any_bad else "CorrectlyObservedForcedTransition"


def witness_is_bad(connection, p_a, p_b) -> bool:
    o_a = observe_in_known(connection, p_a.values)
    o_b = observe_in_known(connection, p_b.values)
    s_a = connection.ground.state_model.mapping[p_a.values]
    s_b = connection.ground.state_model.mapping[p_b.values]
    return o_a is None or o_b is None or (o_a, o_b) != (s_a, s_b)
