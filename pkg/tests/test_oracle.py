import itertools
import random

import pytest

from seqalloc.engine import run_with_report
from seqalloc.model import bundle_utility
from seqalloc.oracle import (
    BudgetExceededError,
    brute_force_best_response,
    enumerate_achievable_bundles,
    refuted_greedy_best_response,
)
from seqalloc.golden import counterexample_utilities, three_agent_counterexample

from conftest import random_consistent_utilities, random_instance


def _all_report_bundles(inst, manip):
    """Ground truth by literally trying every one of the m! reports."""
    out = set()
    for perm in itertools.permutations(inst.items):
        out.add(run_with_report(inst, manip, perm).bundles[manip])
    return out


def test_enumeration_equals_all_reports_on_small_instances():
    rng = random.Random(51)
    for _ in range(25):
        inst = random_instance(rng, n=rng.choice([2, 3]), m=rng.randint(2, 5))
        manip = rng.choice(inst.agents)
        assert enumerate_achievable_bundles(inst, manip) == _all_report_bundles(
            inst, manip
        )


def test_oracle_optimum_matches_all_reports():
    rng = random.Random(52)
    for _ in range(20):
        inst = random_instance(rng, n=3, m=5)
        manip = rng.choice(inst.agents)
        u = random_consistent_utilities(rng, inst, manip)
        res = brute_force_best_response(inst, u, manip)
        truth = {
            b: bundle_utility(u, manip, b) for b in _all_report_bundles(inst, manip)
        }
        best = max(truth.values())
        assert res.max_utility == best
        assert set(res.optimal_bundles) == {b for b, v in truth.items() if v == best}


def test_witness_reports_replay_to_their_bundles():
    rng = random.Random(53)
    for _ in range(30):
        inst = random_instance(rng, n=rng.choice([2, 3]), m=6)
        manip = rng.choice(inst.agents)
        u = random_consistent_utilities(rng, inst, manip)
        res = brute_force_best_response(inst, u, manip)
        for bundle in res.optimal_bundles:
            report = res.witness_reports[bundle]
            assert sorted(report) == sorted(inst.items)
            assert run_with_report(inst, manip, report).bundles[manip] == bundle


def test_optimal_bundles_are_deduplicated_and_ordered():
    inst = three_agent_counterexample()
    res = brute_force_best_response(inst, counterexample_utilities(tie=True), "1")
    assert len(set(res.optimal_bundles)) == len(res.optimal_bundles)
    keys = [sorted(inst.items.index(o) for o in b) for b in res.optimal_bundles]
    assert keys == sorted(keys)
    assert set(res.optimal_bundles) == {frozenset("ad"), frozenset("bc")}


def test_greedy_suboptimal_for_three_agents():
    inst = three_agent_counterexample()
    u = counterexample_utilities(tie=False)
    greedy = refuted_greedy_best_response(inst, "1")
    oracle = brute_force_best_response(inst, u, "1")
    assert greedy == {"a", "d"}
    assert bundle_utility(u, "1", greedy) < oracle.max_utility


def test_greedy_optimal_for_two_agents():
    rng = random.Random(54)
    for _ in range(50):
        inst = random_instance(rng, n=2, m=6)
        manip = rng.choice(inst.agents)
        u = random_consistent_utilities(rng, inst, manip)
        greedy = refuted_greedy_best_response(inst, manip)
        oracle = brute_force_best_response(inst, u, manip)
        assert bundle_utility(u, manip, greedy) == oracle.max_utility


def _manipulator_heavy_instance(m: int):
    from seqalloc.model import validate_instance

    items = [f"o{k}" for k in range(m)]
    return validate_instance(
        items=items,
        agents=["1", "2"],
        preferences={"1": items, "2": list(reversed(items))},
        sequence=["1", "2"] * (m // 2),
    )


def test_node_budget_is_enforced():
    inst = _manipulator_heavy_instance(8)
    with pytest.raises(BudgetExceededError, match="node budget"):
        enumerate_achievable_bundles(inst, "1", node_budget=3)


def test_turn_guard_is_enforced():
    inst = _manipulator_heavy_instance(12)
    with pytest.raises(BudgetExceededError, match="turns"):
        enumerate_achievable_bundles(inst, "1", max_turns=5)
