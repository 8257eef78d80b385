"""Exact polynomial-time best response and Nash verification for two agents.

Achievability of a target set is decided by one engine run with the
canonical report (the target items first, in the opponent's relative
order). For a target smaller than the manipulator's turn count,
"achievable" means some report yields a bundle containing it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .engine import run_sequential_allocation, run_with_report
from .model import (
    Instance,
    UtilityFunction,
    ValidationError,
    bundle_utility,
    order_from_utilities,
    validate_utilities,
)


def _require_two_agents(inst: Instance) -> None:
    if len(inst.agents) != 2:
        raise ValidationError(
            [f"two-agent algorithm called on an instance with {len(inst.agents)} agents"]
        )


def _opponent(inst: Instance, manipulator: str) -> str:
    a, b = inst.agents
    if manipulator == a:
        return b
    if manipulator == b:
        return a
    raise ValidationError([f"unknown agent {manipulator}"])


def canonical_report(
    S: Iterable[str], opponent_pref: tuple[str, ...], all_items: tuple[str, ...]
) -> tuple[str, ...]:
    """Target items first, sorted by the opponent's preference; then the rest.

    The tail order never affects the outcome, so the fixed canonical item
    order is used to keep outputs deterministic.
    """
    S = set(S)
    unknown = S - set(all_items)
    if unknown:
        raise ValidationError([f"unknown items in target set: {sorted(unknown)}"])
    rank = {o: k for k, o in enumerate(opponent_pref)}
    prefix = sorted(S, key=rank.__getitem__)
    tail = [o for o in all_items if o not in S]
    return tuple(prefix + tail)


def is_achievable(S: Iterable[str], inst: Instance, manipulator: str) -> bool:
    """True iff some report gives the manipulator a bundle containing S."""
    _require_two_agents(inst)
    opponent = _opponent(inst, manipulator)
    S = set(S)
    report = canonical_report(S, inst.preferences[opponent], inst.items)
    alloc = run_with_report(inst, manipulator, report)
    return S <= alloc.bundles[manipulator]


def achievability_certificate(S: Iterable[str], inst: Instance, manipulator: str) -> bool:
    """Direct stage-wise check of achievability on the canonical-report trace.

    At every stage where the manipulator takes the i-th target item, each
    item already held by the opponent must be strictly preferred by the
    opponent to that target item.
    """
    _require_two_agents(inst)
    opponent = _opponent(inst, manipulator)
    opp_pref = inst.preferences[opponent]
    rank = {o: k for k, o in enumerate(opp_pref)}
    prefix = sorted(set(S), key=rank.__getitem__)
    report = canonical_report(prefix, opp_pref, inst.items)
    alloc = run_with_report(inst, manipulator, report)

    opponent_holdings: list[str] = []
    own_picks = 0
    for _, agent, item in alloc.trace:
        if agent == opponent:
            opponent_holdings.append(item)
            continue
        own_picks += 1
        if own_picks > len(prefix):
            break
        target = prefix[own_picks - 1]
        if item != target:
            return False
        if any(rank[held] >= rank[target] for held in opponent_holdings):
            return False
    return own_picks >= len(prefix)


def lexicographic_best_response(
    inst: Instance, manipulator: str
) -> tuple[tuple[str, ...], frozenset[str]]:
    """Greedy over the manipulator's true order, keeping achievable extensions.

    Returns the canonical report for the selected set and the set itself;
    replaying the report through the engine yields exactly that set.
    """
    _require_two_agents(inst)
    opponent = _opponent(inst, manipulator)
    turns = inst.turns(manipulator)
    S: list[str] = []
    for o in inst.preferences[manipulator]:
        if len(S) == turns:
            break
        if is_achievable(S + [o], inst, manipulator):
            S.append(o)
    report = canonical_report(S, inst.preferences[opponent], inst.items)
    return report, frozenset(S)


def best_response(
    inst: Instance, u: UtilityFunction, manipulator: str
) -> tuple[tuple[str, ...], frozenset[str], Fraction]:
    """Utility-maximizing report for any utilities consistent with the order.

    The resulting bundle does not depend on which consistent utilities are
    supplied; they are only used to report the achieved utility.
    """
    _require_two_agents(inst)
    validate_utilities(UtilityFunction({manipulator: u.values[manipulator]}), inst)
    report, bundle = lexicographic_best_response(inst, manipulator)
    return report, bundle, bundle_utility(u, manipulator, bundle)


@dataclass(frozen=True)
class NashEvidence:
    agent: str
    current_bundle: frozenset[str]
    current_utility: Fraction
    best_response_bundle: frozenset[str]
    best_response_utility: Fraction

    @property
    def can_improve(self) -> bool:
        return self.best_response_utility > self.current_utility


def nash_evidence(inst: Instance, u: UtilityFunction) -> list[NashEvidence]:
    """Per-agent best-response comparison against the reported profile.

    ``inst`` carries the reported preferences; ``u`` carries each agent's
    true utilities, whose induced order is that agent's true preference.
    """
    _require_two_agents(inst)
    current = run_sequential_allocation(inst)
    out = []
    for agent in inst.agents:
        true_order = order_from_utilities(u, agent, inst.items)
        deviation_setting = inst.with_preference(agent, true_order)
        _, bundle, utility = best_response(
            deviation_setting, UtilityFunction({agent: u.values[agent]}), agent
        )
        out.append(
            NashEvidence(
                agent=agent,
                current_bundle=current.bundles[agent],
                current_utility=bundle_utility(u, agent, current.bundles[agent]),
                best_response_bundle=bundle,
                best_response_utility=utility,
            )
        )
    return out


def verify_nash_two_agents(inst: Instance, u: UtilityFunction) -> bool:
    """True iff no agent's best response beats their bundle under the reports."""
    return not any(e.can_improve for e in nash_evidence(inst, u))
