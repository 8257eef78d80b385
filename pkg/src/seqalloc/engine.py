"""Sequential allocation engine.

At each stage the agent named by the sequence receives their most-preferred
remaining item. Pure functions; the inner loop runs in the selected kernel
(compiled or pure Python, see ``seqalloc.kernel``).
"""

from __future__ import annotations

from typing import Iterable

from . import kernel
from .model import Allocation, Instance, ValidationError


def _encode(inst: Instance):
    item_index = {o: k for k, o in enumerate(inst.items)}
    agent_index = {a: i for i, a in enumerate(inst.agents)}
    prefs = [[item_index[o] for o in inst.preferences[a]] for a in inst.agents]
    seq = [agent_index[a] for a in inst.sequence]
    return prefs, seq, item_index


def run_sequential_allocation(inst: Instance) -> Allocation:
    """Execute the picking sequence and return bundles plus the full trace."""
    prefs, seq, _ = _encode(inst)
    picks = kernel.allocate(prefs, seq, len(inst.items))
    trace = tuple(
        (stage + 1, inst.sequence[stage], inst.items[item])
        for stage, item in enumerate(picks)
    )
    bundles = {a: set() for a in inst.agents}
    for _, agent, item in trace:
        bundles[agent].add(item)
    return Allocation({a: frozenset(b) for a, b in bundles.items()}, trace)


def run_with_report(inst: Instance, agent: str, report: Iterable[str]) -> Allocation:
    """Allocate with one agent's preference replaced by ``report``."""
    report = tuple(report)
    if agent not in inst.agents:
        raise ValidationError([f"unknown agent {agent}"])
    return run_sequential_allocation(inst.with_preference(agent, report))
