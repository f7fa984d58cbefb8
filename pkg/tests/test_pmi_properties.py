"""Randomized property suites for the observability theorems."""

import random

from cpsfx.pmi import (
    TheoremOutcomeKind,
    diff_models,
    lemma1_witness,
    random_connection,
    theorem1_check,
)
from oracle import theorem_outcome_kind, witness_is_bad


def test_theorem_agrees_with_brute_force(seed):
    rng = random.Random(seed)
    kinds = {"PmiInstance": 0, "CorrectlyObservedForcedTransition": 0}
    for _ in range(300):
        c = random_connection(rng, ensure_incomplete=True)
        outcome = theorem1_check(c)
        expected = theorem_outcome_kind(c)
        assert outcome.kind.value == expected
        kinds[expected] += 1
        finding = outcome.finding
        if outcome.kind is TheoremOutcomeKind.PMI_INSTANCE:
            assert finding.is_pmi
            assert witness_is_bad(c, *finding.witness)
        else:
            assert not finding.is_pmi
            assert not witness_is_bad(c, *finding.witness)
            assert finding.transition in c.ground.transitions
            assert finding.transition not in c.known.transitions
    # The generator must exercise both branches of the disjunction.
    assert kinds["PmiInstance"] > 0
    assert kinds["CorrectlyObservedForcedTransition"] > 0


def test_lemma_witness_always_in_forced_set(seed):
    rng = random.Random(seed + 7)
    with_forced = 0
    for _ in range(300):
        c = random_connection(rng, ensure_forced_state=True)
        diff = diff_models(c)
        for state in sorted(diff.forced_states):
            transition = lemma1_witness(c, state)
            assert transition in c.ground.transitions
            assert transition not in c.known.transitions
            assert transition[1] == state
            with_forced += 1
    assert with_forced >= 300
