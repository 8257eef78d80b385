"""Exponential-time ground truth for best responses, any number of agents.

The search branches over the manipulator's pick at each of their turns;
between turns every other agent picks greedily. This is outcome-equivalent
to searching over all m! reports because a report only influences the
outcome through the item picked at each of the manipulator's turns.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from .model import Instance, UtilityFunction, bundle_utility

DEFAULT_NODE_BUDGET = 2_000_000
DEFAULT_MAX_TURNS = 16


class BudgetExceededError(RuntimeError):
    """Search guard tripped: too many nodes or too many manipulator turns."""


@dataclass(frozen=True)
class OracleResult:
    max_utility: Fraction
    optimal_bundles: tuple[frozenset[str], ...]
    witness_reports: Mapping[frozenset, tuple[str, ...]]


def _leaf_bundles(
    inst: Instance, manipulator: str, node_budget: int, max_turns: int
) -> Iterator[tuple[frozenset[int], tuple[int, ...]]]:
    """Yield (bundle, manipulator pick order) for every leaf of the search.

    Bundles repeat when different pick orders coincide; items are indices
    into ``inst.items``. Deterministic order: picks tried in canonical item
    order at every branch.
    """
    if inst.turns(manipulator) > max_turns:
        raise BudgetExceededError(
            f"manipulator has {inst.turns(manipulator)} turns, guard allows {max_turns}"
        )
    item_index = {o: k for k, o in enumerate(inst.items)}
    agent_index = {a: i for i, a in enumerate(inst.agents)}
    prefs = [[item_index[o] for o in inst.preferences[a]] for a in inst.agents]
    seq = [agent_index[a] for a in inst.sequence]
    manip = agent_index[manipulator]
    m = len(inst.items)
    L = len(seq)
    taken = bytearray(m)
    nodes = 0

    def walk(t: int, picks: list[int]):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceededError(f"search exceeded node budget {node_budget}")
        # advance through non-manipulator stages
        auto: list[int] = []
        while t < L and seq[t] != manip:
            row = prefs[seq[t]]
            for item in row:
                if not taken[item]:
                    taken[item] = 1
                    auto.append(item)
                    break
            t += 1
        if t == L:
            yield frozenset(picks), tuple(picks)
        else:
            for item in range(m):
                if not taken[item]:
                    taken[item] = 1
                    picks.append(item)
                    yield from walk(t + 1, picks)
                    picks.pop()
                    taken[item] = 0
        for item in auto:
            taken[item] = 0

    yield from walk(0, [])


def enumerate_achievable_bundles(
    inst: Instance,
    manipulator: str,
    node_budget: int = DEFAULT_NODE_BUDGET,
    max_turns: int = DEFAULT_MAX_TURNS,
) -> set[frozenset[str]]:
    """All bundles the manipulator can end up holding under some report."""
    out = set()
    for bundle, _ in _leaf_bundles(inst, manipulator, node_budget, max_turns):
        out.add(frozenset(inst.items[k] for k in bundle))
    return out


def _witness_report(inst: Instance, picks: tuple[int, ...]) -> tuple[str, ...]:
    chosen = [inst.items[k] for k in picks]
    rest = [o for o in inst.items if o not in set(chosen)]
    return tuple(chosen + rest)


def brute_force_best_response(
    inst: Instance,
    u: UtilityFunction,
    manipulator: str,
    node_budget: int = DEFAULT_NODE_BUDGET,
    max_turns: int = DEFAULT_MAX_TURNS,
) -> OracleResult:
    """Exact maximum utility, every optimal bundle, one witness report each."""
    vals = u.values[manipulator]
    item_values = [vals[o] for o in inst.items]
    best: Fraction | None = None
    argmax: dict[frozenset[int], tuple[int, ...]] = {}
    for bundle, picks in _leaf_bundles(inst, manipulator, node_budget, max_turns):
        utility = sum((item_values[k] for k in bundle), Fraction(0))
        if best is None or utility > best:
            best = utility
            argmax = {bundle: picks}
        elif utility == best and bundle not in argmax:
            argmax[bundle] = picks
    assert best is not None  # L >= 1 guarantees at least one leaf
    named = {
        frozenset(inst.items[k] for k in bundle): _witness_report(inst, picks)
        for bundle, picks in argmax.items()
    }
    ordered = tuple(
        sorted(named, key=lambda b: sorted(inst.items.index(o) for o in b))
    )
    return OracleResult(best, ordered, named)


def refuted_greedy_best_response(
    inst: Instance,
    manipulator: str,
    node_budget: int = DEFAULT_NODE_BUDGET,
    max_turns: int = DEFAULT_MAX_TURNS,
) -> frozenset[str]:
    """The ordinal greedy known to be suboptimal for three or more agents.

    Scans the manipulator's true order and keeps an item whenever the kept
    set plus that item is contained in some achievable bundle. Correct for
    two agents, not in general.
    """
    achievable = enumerate_achievable_bundles(inst, manipulator, node_budget, max_turns)
    turns = inst.turns(manipulator)
    kept: set[str] = set()
    for o in inst.preferences[manipulator]:
        if len(kept) == turns:
            break
        trial = kept | {o}
        if any(trial <= bundle for bundle in achievable):
            kept.add(o)
    return frozenset(kept)
