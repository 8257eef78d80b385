import itertools
import random
from fractions import Fraction

import pytest

from seqalloc.engine import run_sequential_allocation, run_with_report
from seqalloc.model import UtilityFunction, ValidationError, bundle_utility
from seqalloc.oracle import brute_force_best_response, enumerate_achievable_bundles
from seqalloc.two_agent import (
    achievability_certificate,
    best_response,
    canonical_report,
    is_achievable,
    lexicographic_best_response,
    nash_evidence,
    verify_nash_two_agents,
)
from seqalloc.golden import alternating_manipulation_example, two_agent_example

from conftest import random_consistent_utilities, random_instance


def test_canonical_report_layout():
    report = canonical_report(
        {"a", "d"}, opponent_pref=("d", "c", "b", "a"), all_items=("a", "b", "c", "d")
    )
    assert report == ("d", "a", "b", "c")


def test_canonical_report_rejects_unknown_items():
    with pytest.raises(ValidationError):
        canonical_report({"z"}, ("a",), ("a",))


def test_reference_best_response():
    inst = two_agent_example()
    report, bundle = lexicographic_best_response(inst, "1")
    assert bundle == {"o1", "o4"}
    assert run_with_report(inst, "1", report).bundles["1"] == bundle


def test_profitable_manipulation_found():
    inst = alternating_manipulation_example()
    truthful = run_sequential_allocation(inst).bundles["1"]
    assert truthful == {"a", "c"}
    _, bundle = lexicographic_best_response(inst, "1")
    assert bundle == {"a", "b"}


def test_rejects_non_two_agent_instances():
    inst = random_instance(random.Random(0), n=3, m=4)
    with pytest.raises(ValidationError):
        lexicographic_best_response(inst, "1")
    with pytest.raises(ValidationError):
        is_achievable({"o0"}, inst, "1")


def test_achievability_matches_certificate_exhaustively():
    rng = random.Random(41)
    for _ in range(60):
        inst = random_instance(rng, n=2, m=5)
        manip = rng.choice(inst.agents)
        for size in (1, 2, 3):
            for S in itertools.combinations(inst.items, size):
                assert is_achievable(S, inst, manip) == achievability_certificate(
                    S, inst, manip
                ), (inst, manip, S)


def test_achievable_sets_match_oracle_containment():
    rng = random.Random(42)
    for _ in range(40):
        inst = random_instance(rng, n=2, m=6)
        manip = rng.choice(inst.agents)
        achievable = enumerate_achievable_bundles(inst, manip)
        for size in (1, 2):
            for S in itertools.combinations(inst.items, size):
                expected = any(set(S) <= b for b in achievable)
                assert is_achievable(S, inst, manip) == expected


def test_best_response_matches_oracle_on_random_instances():
    rng = random.Random(43)
    for _ in range(120):
        inst = random_instance(rng, n=2, m=rng.randint(2, 7))
        manip = rng.choice(inst.agents)
        u = random_consistent_utilities(rng, inst, manip)
        report, bundle, value = best_response(inst, u, manip)
        oracle = brute_force_best_response(inst, u, manip)
        assert value == oracle.max_utility
        assert bundle in oracle.optimal_bundles
        assert run_with_report(inst, manip, report).bundles[manip] == bundle


def test_best_response_bundle_is_utility_independent():
    rng = random.Random(44)
    for _ in range(30):
        inst = random_instance(rng, n=2, m=6)
        manip = rng.choice(inst.agents)
        bundles = set()
        for _ in range(3):
            u = random_consistent_utilities(rng, inst, manip)
            _, bundle, _ = best_response(inst, u, manip)
            bundles.add(bundle)
        assert len(bundles) == 1


def test_best_response_rejects_inconsistent_utilities():
    inst = two_agent_example()
    flat = UtilityFunction({"1": {o: Fraction(1) for o in inst.items}})
    with pytest.raises(ValidationError):
        best_response(inst, flat, "1")


def test_truthful_reporting_is_equilibrium_with_sole_interest():
    # each agent wants a disjoint half of the items most; no profitable lies
    from seqalloc.model import validate_instance

    inst = validate_instance(
        items=["o0", "o1", "o2", "o3"],
        agents=["1", "2"],
        preferences={
            "1": ["o0", "o1", "o2", "o3"],
            "2": ["o2", "o3", "o0", "o1"],
        },
        sequence=["1", "2", "1", "2"],
    )
    u = UtilityFunction(
        {
            "1": {"o0": Fraction(8), "o1": Fraction(4), "o2": Fraction(2), "o3": Fraction(1)},
            "2": {"o2": Fraction(8), "o3": Fraction(4), "o0": Fraction(2), "o1": Fraction(1)},
        }
    )
    assert verify_nash_two_agents(inst, u)


def test_nash_evidence_flags_profitable_deviation():
    inst = alternating_manipulation_example()
    u = UtilityFunction(
        {
            "1": {"a": Fraction(8), "b": Fraction(4), "c": Fraction(2), "d": Fraction(1)},
            "2": {"b": Fraction(8), "c": Fraction(4), "a": Fraction(2), "d": Fraction(1)},
        }
    )
    evidence = {e.agent: e for e in nash_evidence(inst, u)}
    assert evidence["1"].can_improve
    assert evidence["1"].best_response_bundle == {"a", "b"}
    assert not verify_nash_two_agents(inst, u)


def test_nash_verification_agrees_with_oracle_on_random_profiles():
    rng = random.Random(46)
    for _ in range(40):
        inst = random_instance(rng, n=2, m=5)
        u = UtilityFunction(
            {
                a: random_consistent_utilities(rng, inst, a).values[a]
                for a in inst.agents
            }
        )
        current = run_sequential_allocation(inst)
        improvable = any(
            brute_force_best_response(inst, u, a).max_utility
            > bundle_utility(u, a, current.bundles[a])
            for a in inst.agents
        )
        assert verify_nash_two_agents(inst, u) == (not improvable)
