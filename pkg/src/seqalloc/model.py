"""Domain types for sequential allocation: instances, utilities, allocations.

All types are immutable after construction and all utilities are exact
rationals (``fractions.Fraction``), so tie detection is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping


class ValidationError(ValueError):
    """Raised when raw instance data violates an invariant.

    ``problems`` lists every violation found, not just the first.
    """

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Instance:
    """A complete allocation setting: items, agents, preferences, sequence.

    ``items`` doubles as the canonical global item order used wherever a
    deterministic tie-free ordering of items is needed.
    """

    items: tuple[str, ...]
    agents: tuple[str, ...]
    preferences: Mapping[str, tuple[str, ...]]
    sequence: tuple[str, ...]

    def turns(self, agent: str) -> int:
        return sum(1 for a in self.sequence if a == agent)

    def with_preference(self, agent: str, order: Iterable[str]) -> "Instance":
        """Copy of the instance with one agent's preference replaced."""
        order = tuple(order)
        if sorted(order) != sorted(self.items):
            raise ValidationError(
                [f"replacement preference for agent {agent} is not a permutation of the item set"]
            )
        prefs = dict(self.preferences)
        prefs[agent] = order
        return Instance(self.items, self.agents, prefs, self.sequence)


def validate_instance(
    items: Iterable[str],
    agents: Iterable[str],
    preferences: Mapping[str, Iterable[str]],
    sequence: Iterable[str],
) -> Instance:
    """Validate raw data and return an Instance.

    Raises ValidationError listing every violated invariant: duplicate ids,
    incomplete or non-permutation preferences, unknown agents in the
    sequence, or a sequence longer than the item count.
    """
    items = tuple(items)
    agents = tuple(agents)
    sequence = tuple(sequence)
    prefs = {a: tuple(p) for a, p in preferences.items()}
    problems: list[str] = []

    if len(set(items)) != len(items):
        problems.append("duplicate item ids")
    if len(set(agents)) != len(agents):
        problems.append("duplicate agent ids")
    if set(items) & set(agents):
        problems.append("item and agent ids overlap")

    item_set = set(items)
    for a in agents:
        if a not in prefs:
            problems.append(f"agent {a} has no preference list")
        elif sorted(prefs[a]) != sorted(items):
            if set(prefs[a]) <= item_set and len(set(prefs[a])) == len(prefs[a]):
                problems.append(f"incomplete preference for agent {a}")
            else:
                problems.append(f"preference of agent {a} is not a permutation of the item set")
    for a in prefs:
        if a not in agents:
            problems.append(f"preference given for unknown agent {a}")

    for a in sequence:
        if a not in agents:
            problems.append(f"sequence references unknown agent {a}")
    if len(sequence) > len(items):
        problems.append("sequence exceeds item count")
    if not agents:
        problems.append("no agents")
    if not items:
        problems.append("no items")

    if problems:
        raise ValidationError(problems)
    return Instance(items, agents, prefs, sequence)


@dataclass(frozen=True)
class UtilityFunction:
    """Per-agent additive item utilities, positive and exact.

    May cover a subset of the agents (e.g. only the manipulator).
    """

    values: Mapping[str, Mapping[str, Fraction]]

    def of(self, agent: str, item: str) -> Fraction:
        return self.values[agent][item]

    def agents(self) -> tuple[str, ...]:
        return tuple(self.values)


def validate_utilities(u: UtilityFunction, inst: Instance) -> None:
    """Check positivity and consistency with each covered agent's order."""
    problems = []
    for agent, vals in u.values.items():
        if agent not in inst.agents:
            problems.append(f"utilities given for unknown agent {agent}")
            continue
        order = inst.preferences[agent]
        if set(vals) != set(inst.items):
            problems.append(f"utilities of agent {agent} do not cover the item set")
            continue
        for o in order:
            if vals[o] <= 0:
                problems.append(f"non-positive utility for agent {agent}, item {o}")
        for better, worse in zip(order, order[1:]):
            if not vals[better] > vals[worse]:
                problems.append(
                    f"utilities of agent {agent} not strictly decreasing at {better} vs {worse}"
                )
    if problems:
        raise ValidationError(problems)


def make_lexicographic_utilities(
    preferences: Mapping[str, tuple[str, ...]],
) -> UtilityFunction:
    """Powers-of-two utilities: each item outweighs all less-preferred ones.

    The k-th ranked of m items is worth 2**(m-k), so every prefix-dominance
    inequality holds with slack 1.
    """
    values = {}
    for agent, order in preferences.items():
        m = len(order)
        values[agent] = {o: Fraction(2 ** (m - k - 1)) for k, o in enumerate(order)}
    return UtilityFunction(values)


def bundle_utility(u: UtilityFunction, agent: str, bundle: Iterable[str]) -> Fraction:
    """Exact additive utility of a bundle. Raises KeyError on unknown items."""
    vals = u.values[agent]
    return sum((vals[o] for o in bundle), Fraction(0))


def order_from_utilities(u: UtilityFunction, agent: str, items: Iterable[str]) -> tuple[str, ...]:
    """The strict preference order induced by an agent's utilities.

    Raises ValidationError if two items are valued equally (the induced
    order would not be strict).
    """
    items = tuple(items)
    vals = u.values[agent]
    ranked = sorted(items, key=lambda o: (-vals[o], items.index(o)))
    for a, b in zip(ranked, ranked[1:]):
        if vals[a] == vals[b]:
            raise ValidationError(
                [f"agent {agent} values {a} and {b} equally; induced order is not strict"]
            )
    return tuple(ranked)


@dataclass(frozen=True)
class Allocation:
    """Bundles per agent plus the stage-by-stage pick trace.

    Trace entries are ``(stage, agent, item)`` with stages numbered from 1.
    Items beyond the sequence length remain unallocated.
    """

    bundles: Mapping[str, frozenset[str]]
    trace: tuple[tuple[int, str, str], ...] = field(default_factory=tuple)

    def holder_of(self, item: str) -> str | None:
        for agent, bundle in self.bundles.items():
            if item in bundle:
                return agent
        return None

    def matrix(self, inst: Instance) -> list[list[int]]:
        """0/1 assignment matrix, rows in agent order, columns in item order."""
        return [
            [1 if o in self.bundles.get(a, frozenset()) else 0 for o in inst.items]
            for a in inst.agents
        ]
