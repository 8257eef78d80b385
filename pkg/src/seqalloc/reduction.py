"""Compiler from restricted 3-CNF formulas to best-response instances.

Input formulas are 3-CNF where every literal (each variable in each
polarity) occurs in exactly two clauses. The compiler emits an allocation
setting in which one designated manipulator (agent "1") can reach a target
utility T under some report iff the formula is satisfiable.

Structure of the generated picking sequence: one 16-stage choice round per
variable (the manipulator commits to a polarity by picking both choice
items of one literal), one 3-stage clause round per clause (agents opposed
to the clause's literals grab clause items unless kept busy), and a final
collection round of |C| manipulator turns for the top clause items.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .engine import run_with_report
from .model import Allocation, Instance, UtilityFunction, validate_instance

MANIPULATOR = "1"


class FormulaError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class RestrictedFormula:
    """3-CNF with every literal occurring exactly twice.

    Clauses are ordered triples of nonzero DIMACS-style integers; variable
    v appears as v (positive) or -v (negative).
    """

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def variables(self) -> range:
        return range(1, self.num_vars + 1)

    def is_satisfied_by(self, assignment: Mapping[int, bool]) -> bool:
        return all(
            any(assignment[abs(lit)] == (lit > 0) for lit in clause)
            for clause in self.clauses
        )

    def satisfying_assignments(self) -> list[dict[int, bool]]:
        """All satisfying assignments, by direct enumeration over 2^|X|."""
        out = []
        for bits in itertools.product([True, False], repeat=self.num_vars):
            assignment = {v: bits[v - 1] for v in self.variables()}
            if self.is_satisfied_by(assignment):
                out.append(assignment)
        return out


def validate_formula(num_vars: int, clauses: Sequence[Sequence[int]]) -> RestrictedFormula:
    problems = []
    for idx, clause in enumerate(clauses, start=1):
        if len(clause) != 3:
            problems.append(f"clause {idx} has {len(clause)} literals, expected 3")
            continue
        if len({abs(l) for l in clause}) != 3:
            problems.append(f"clause {idx} repeats a variable")
        for lit in clause:
            if lit == 0 or abs(lit) > num_vars:
                problems.append(f"clause {idx} references unknown variable {lit}")
    if not problems:
        counts: dict[int, int] = {}
        for clause in clauses:
            for lit in clause:
                counts[lit] = counts.get(lit, 0) + 1
        for v in range(1, num_vars + 1):
            for lit in (v, -v):
                c = counts.get(lit, 0)
                if c != 2:
                    problems.append(f"literal {lit} occurs {c} times, expected exactly 2")
    if problems:
        raise FormulaError(problems)
    return RestrictedFormula(num_vars, tuple(tuple(c) for c in clauses))


def parse_formula(text: str) -> RestrictedFormula:
    """Parse DIMACS CNF, then validate the exactly-twice restriction."""
    num_vars = None
    declared_clauses = None
    tokens: list[int] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise FormulaError([f"line {line_no}: malformed problem line"])
            num_vars, declared_clauses = int(fields[2]), int(fields[3])
            continue
        try:
            tokens.extend(int(t) for t in line.split())
        except ValueError:
            raise FormulaError([f"line {line_no}: unknown token"]) from None
    if num_vars is None:
        raise FormulaError(["missing 'p cnf' problem line"])
    clauses: list[list[int]] = []
    current: list[int] = []
    for t in tokens:
        if t == 0:
            clauses.append(current)
            current = []
        else:
            current.append(t)
    if current:
        clauses.append(current)
    if declared_clauses is not None and len(clauses) != declared_clauses:
        raise FormulaError(
            [f"problem line declares {declared_clauses} clauses, found {len(clauses)}"]
        )
    return validate_formula(num_vars, clauses)


# --- gadget naming ---------------------------------------------------------


def lit_name(lit: int) -> str:
    v = abs(lit)
    return f"x{v}" if lit > 0 else f"~x{v}"


def agent_id(lit: int, copy: int) -> str:
    return f"a_{lit_name(lit)}^{copy}"


def choice_item(lit: int, j: int) -> str:
    return f"o_{lit_name(lit)}^{j}"


def consistency_item(lit: int, j: int) -> str:
    return f"h_{lit_name(lit)}^{j}"


def dummy_item(lit: int, j: str) -> str:
    return f"d_{lit_name(lit)}^{j}"


def clause_item(c: int, j: int) -> str:
    return f"o_c{c}^{j}"


@dataclass(frozen=True)
class RoundSpan:
    kind: str  # "choice" | "clause" | "collection"
    label: str  # variable or clause name, "" for collection
    start: int  # 1-based stage, inclusive
    end: int


@dataclass(frozen=True)
class GadgetRegistry:
    """Names of every generated agent and item, keyed by formula element."""

    literal_agents: Mapping[tuple[int, int], str]  # (literal, copy) -> agent
    choice_items: Mapping[int, tuple[str, str]]  # literal -> (o^1, o^2)
    consistency_items: Mapping[int, tuple[str, str, str]]
    dummy_items: Mapping[int, tuple[str, str, str, str]]  # (d^11, d^12, d^21, d^22)
    clause_items: Mapping[int, tuple[str, str, str]]  # clause index -> (o^1, o^2, o^3)
    clause_agents: Mapping[int, tuple[str, str, str]]  # scheduled order per clause round
    occurrences: Mapping[int, tuple[int, int]]  # literal -> its two clause indices
    rounds: tuple[RoundSpan, ...]

    def to_json(self) -> str:
        doc = {
            "literal_agents": {f"{lit},{copy}": a for (lit, copy), a in self.literal_agents.items()},
            "choice_items": {str(k): v for k, v in self.choice_items.items()},
            "consistency_items": {str(k): v for k, v in self.consistency_items.items()},
            "dummy_items": {str(k): v for k, v in self.dummy_items.items()},
            "clause_items": {str(k): v for k, v in self.clause_items.items()},
            "clause_agents": {str(k): v for k, v in self.clause_agents.items()},
            "occurrences": {str(k): v for k, v in self.occurrences.items()},
            "rounds": [[r.kind, r.label, r.start, r.end] for r in self.rounds],
        }
        return json.dumps(doc, indent=2, sort_keys=True)


@dataclass(frozen=True)
class ReductionOutput:
    formula: RestrictedFormula
    instance: Instance
    utility: UtilityFunction  # covers the manipulator only
    target: Fraction
    registry: GadgetRegistry


def _occurrences(f: RestrictedFormula) -> dict[int, tuple[int, int]]:
    occ: dict[int, list[int]] = {}
    for c, clause in enumerate(f.clauses, start=1):
        for lit in clause:
            occ.setdefault(lit, []).append(c)
    return {lit: (rounds[0], rounds[1]) for lit, rounds in occ.items()}


def build_instance(f: RestrictedFormula) -> ReductionOutput:
    """Compile the formula. The utility ledger is audited before returning."""
    occ = _occurrences(f)
    n_vars = f.num_vars
    n_clauses = len(f.clauses)

    # canonical item order: per variable the manipulator-relevant block then
    # the dummies, then all clause items
    items: list[str] = []
    for v in f.variables():
        x, nx = v, -v
        items += [choice_item(x, 1), choice_item(nx, 1), choice_item(x, 2), choice_item(nx, 2)]
        items += [consistency_item(nx, j) for j in (1, 2, 3)]
        items += [consistency_item(x, j) for j in (1, 2, 3)]
        items += [dummy_item(x, j) for j in ("11", "12", "21", "22")]
        items += [dummy_item(nx, j) for j in ("11", "12", "21", "22")]
    for c in range(1, n_clauses + 1):
        items += [clause_item(c, j) for j in (1, 2, 3)]

    agents = [MANIPULATOR]
    literal_agents: dict[tuple[int, int], str] = {}
    for v in f.variables():
        for lit in (-v, v):
            for copy in (1, 2):
                a = agent_id(lit, copy)
                literal_agents[(lit, copy)] = a
                agents.append(a)

    # picking sequence
    sequence: list[str] = []
    rounds: list[RoundSpan] = []
    for v in f.variables():
        neg1, neg2 = agent_id(-v, 1), agent_id(-v, 2)
        pos1, pos2 = agent_id(v, 1), agent_id(v, 2)
        start = len(sequence) + 1
        sequence += [
            MANIPULATOR, neg1, neg2, pos1, pos2,
            MANIPULATOR, neg1, neg2, pos1, pos2,
            neg1, neg2, MANIPULATOR, pos1, pos2, MANIPULATOR,
        ]
        rounds.append(RoundSpan("choice", lit_name(v), start, len(sequence)))
    clause_agents: dict[int, tuple[str, str, str]] = {}
    for c, clause in enumerate(f.clauses, start=1):
        start = len(sequence) + 1
        scheduled = tuple(
            agent_id(-lit, 1 if occ[lit][0] == c else 2) for lit in clause
        )
        clause_agents[c] = scheduled
        sequence += list(scheduled)
        rounds.append(RoundSpan("clause", f"c{c}", start, len(sequence)))
    start = len(sequence) + 1
    sequence += [MANIPULATOR] * n_clauses
    rounds.append(RoundSpan("collection", "", start, len(sequence)))

    # preferences: explicit relevant lists, completed with the canonical order
    prefs: dict[str, tuple[str, ...]] = {}

    manip: list[str] = []
    for v in f.variables():
        x, nx = v, -v
        manip += [choice_item(x, 1), choice_item(nx, 1), choice_item(x, 2), choice_item(nx, 2)]
        manip += [consistency_item(nx, j) for j in (1, 2, 3)]
        manip += [consistency_item(x, j) for j in (1, 2, 3)]
    manip += [clause_item(c, 1) for c in range(1, n_clauses + 1)]
    prefs[MANIPULATOR] = _complete(manip, items)

    for v in f.variables():
        x, nx = v, -v
        first_x, second_x = occ[x]
        first_nx, second_nx = occ[nx]
        # agents of the negative literal chase items of the positive one
        prefs[agent_id(nx, 1)] = _complete(
            [
                choice_item(x, 1), dummy_item(x, "11"), dummy_item(x, "12"),
                choice_item(x, 2),
                consistency_item(x, 1), consistency_item(x, 2), consistency_item(x, 3),
            ]
            + _clause_block(first_x),
            items,
        )
        prefs[agent_id(nx, 2)] = _complete(
            [
                dummy_item(x, "21"), choice_item(x, 1), choice_item(x, 2),
                dummy_item(x, "22"),
                consistency_item(x, 1), consistency_item(x, 2), consistency_item(x, 3),
            ]
            + _clause_block(second_x),
            items,
        )
        # agents of the positive literal chase items of the negative one
        prefs[agent_id(x, 1)] = _complete(
            [
                choice_item(nx, 1), dummy_item(nx, "11"), consistency_item(nx, 1),
                choice_item(nx, 2),
                consistency_item(nx, 2), consistency_item(nx, 3), dummy_item(nx, "12"),
            ]
            + _clause_block(first_nx),
            items,
        )
        prefs[agent_id(x, 2)] = _complete(
            [
                dummy_item(nx, "21"), choice_item(nx, 1), choice_item(nx, 2),
                consistency_item(nx, 1), consistency_item(nx, 2), consistency_item(nx, 3),
                dummy_item(nx, "22"),
            ]
            + _clause_block(second_nx),
            items,
        )

    instance = validate_instance(items, agents, prefs, sequence)
    utility, target = _manipulator_utility(f, instance, prefs[MANIPULATOR])

    registry = GadgetRegistry(
        literal_agents=literal_agents,
        choice_items={
            lit: (choice_item(lit, 1), choice_item(lit, 2)) for lit in occ
        },
        consistency_items={
            lit: tuple(consistency_item(lit, j) for j in (1, 2, 3)) for lit in occ
        },
        dummy_items={
            lit: tuple(dummy_item(lit, j) for j in ("11", "12", "21", "22")) for lit in occ
        },
        clause_items={
            c: tuple(clause_item(c, j) for j in (1, 2, 3)) for c in range(1, n_clauses + 1)
        },
        clause_agents=clause_agents,
        occurrences=occ,
        rounds=tuple(rounds),
    )
    out = ReductionOutput(f, instance, utility, target, registry)
    audit_utilities(out)  # every build re-checks the utility ledger
    return out


def _clause_block(c: int) -> list[str]:
    return [clause_item(c, 3), clause_item(c, 2), clause_item(c, 1)]


def _complete(explicit: list[str], items: list[str]) -> tuple[str, ...]:
    seen = set(explicit)
    return tuple(explicit + [o for o in items if o not in seen])


# --- manipulator utility ---------------------------------------------------

# per-round relative values, in units of the round scale B
_ROUND_WEIGHTS = {
    "o_x^1": 100, "o_~x^1": 100, "o_x^2": 90, "o_~x^2": 90,
    "h_~x^1": 60, "h_~x^2": 45, "h_~x^3": 31, "h_x^1": 30, "h_x^2": 15, "h_x^3": 1,
}
_ROUND_TOTAL = sum(_ROUND_WEIGHTS.values())  # 562, plus 2 for the epsilon bonuses
# value guaranteed per round by the cheaper consistent branch: both choice
# items of one literal plus the worse top/bottom consistency pair
_ROUND_FLOOR = 100 + 90 + 31 + 30  # = 251


def _round_values(v: int, B: int) -> dict[str, int]:
    """Concrete utilities of the ten manipulator-relevant items of round v.

    A +1 epsilon separates each positive-literal choice item from its
    negative twin; everything else scales with B.
    """
    x, nx = v, -v
    return {
        choice_item(x, 1): 100 * B + 1,
        choice_item(nx, 1): 100 * B,
        choice_item(x, 2): 90 * B + 1,
        choice_item(nx, 2): 90 * B,
        consistency_item(nx, 1): 60 * B,
        consistency_item(nx, 2): 45 * B,
        consistency_item(nx, 3): 31 * B,
        consistency_item(x, 1): 30 * B,
        consistency_item(x, 2): 15 * B,
        consistency_item(x, 3): 1 * B,
    }


def _manipulator_utility(
    f: RestrictedFormula, inst: Instance, manip_pref: tuple[str, ...]
) -> tuple[UtilityFunction, Fraction]:
    """Assign integer utilities satisfying the construction's ledger.

    Scales are built bottom-up: tail items get 1..t descending along the
    manipulator's preference, clause items sit just above the whole tail,
    and each choice round's scale exceeds the total value of everything
    below it (with margin 2|X| for the epsilon bonuses), so a lost round or
    clause item can never be compensated later.
    """
    n_vars, n_clauses = f.num_vars, len(f.clauses)
    explicit = 10 * n_vars + n_clauses
    tail = manip_pref[explicit:]
    values: dict[str, int] = {}

    t = len(tail)
    for k, item in enumerate(tail):
        values[item] = t - k
    tail_sum = t * (t + 1) // 2

    W = tail_sum + 2 * n_vars + 3
    for c in range(1, n_clauses + 1):
        values[clause_item(c, 1)] = W + (n_clauses - c)
    clause_sum = sum(values[clause_item(c, 1)] for c in range(1, n_clauses + 1))

    below = tail_sum + clause_sum
    scales: dict[int, int] = {}
    for v in range(n_vars, 0, -1):
        B = below + 2 * n_vars + 3
        scales[v] = B
        values.update(_round_values(v, B))
        below += _ROUND_TOTAL * B + 2

    target = sum(_ROUND_FLOOR * scales[v] for v in f.variables()) + clause_sum
    utility = UtilityFunction(
        {MANIPULATOR: {o: Fraction(values[o]) for o in inst.items}}
    )
    return utility, Fraction(target)


def audit_utilities(out: ReductionOutput) -> None:
    """Re-check every inequality the construction relies on.

    Raises AssertionError with a named inequality on any failure.
    """
    f = out.formula
    vals = {o: out.utility.of(MANIPULATOR, o) for o in out.instance.items}
    pref = out.instance.preferences[MANIPULATOR]

    # strict decrease along the manipulator's full preference order
    for a, b in zip(pref, pref[1:]):
        assert vals[a] > vals[b], f"order violated at {a} vs {b}"
    assert all(v > 0 for v in vals.values()), "non-positive utility"

    n_clauses = len(f.clauses)
    explicit = 10 * f.num_vars + n_clauses
    tail_sum = sum(vals[o] for o in pref[explicit:])
    tail_max = max(vals[o] for o in pref[explicit:])
    eps_total = 2 * f.num_vars

    for v in f.variables():
        x, nx = v, -v
        o1p, o1n = vals[choice_item(x, 1)], vals[choice_item(nx, 1)]
        o2p, o2n = vals[choice_item(x, 2)], vals[choice_item(nx, 2)]
        h = {
            (s, j): vals[consistency_item(s * v, j)]
            for s in (1, -1)
            for j in (1, 2, 3)
        }
        B = h[(1, 3)]
        # near-ties between a literal's items and its negation's
        assert 0 < o1p - o1n <= eps_total, f"x{v}: o^1 twins not nearly tied"
        assert 0 < o2p - o2n <= eps_total, f"x{v}: o^2 twins not nearly tied"
        assert o1n - o2p >= B, f"x{v}: o^1 items do not dominate o^2 items"
        # consistency ordering h_~x^1 > h_~x^2 > h_~x^3 > h_x^1 > h_x^2 > h_x^3
        ordered = [h[(-1, 1)], h[(-1, 2)], h[(-1, 3)], h[(1, 1)], h[(1, 2)], h[(1, 3)]]
        assert all(a > b for a, b in zip(ordered, ordered[1:])), f"x{v}: h order violated"
        # the two consistent pairs tie and beat the inconsistent pair
        assert h[(1, 2)] + h[(-1, 2)] < h[(-1, 1)] + h[(1, 3)] == h[(1, 1)] + h[(-1, 3)], (
            f"x{v}: consistency pair inequality violated"
        )
        # inter-round dominance: one unit of this round's scale exceeds the
        # total value of everything below it, epsilon bonuses included
        round_min = min([o1p, o1n, o2p, o2n] + list(h.values()))
        lower = [o for o in pref if vals[o] < round_min]
        assert round_min - eps_total > sum(vals[o] for o in lower), (
            f"x{v}: round scale does not dominate later items"
        )

    # top clause items dominate everything the collection round could scrape up
    for c in range(1, n_clauses + 1):
        assert vals[clause_item(c, 1)] - eps_total > tail_max, (
            f"c{c}: top clause item does not dominate leftovers"
        )
    assert min(vals[clause_item(c, 1)] for c in range(1, n_clauses + 1)) > tail_sum, (
        "clause scale does not dominate the tail"
    )


# --- report construction and verification ----------------------------------


def _round_quadruple(v: int, kind: str) -> list[str]:
    """The four items the manipulator picks in round v, in pick order.

    kind: "T" (consistent, variable true), "F" (consistent, false),
    "I1" (inconsistent o_x^1 then o_~x^2), "I2" (inconsistent o_~x^1 then o_x^2).
    """
    x, nx = v, -v
    if kind == "T":
        return [choice_item(nx, 1), choice_item(nx, 2), consistency_item(nx, 3), consistency_item(x, 1)]
    if kind == "F":
        return [choice_item(x, 1), choice_item(x, 2), consistency_item(nx, 1), consistency_item(x, 3)]
    if kind == "I1":
        return [choice_item(x, 1), choice_item(nx, 2), consistency_item(nx, 2), consistency_item(x, 2)]
    if kind == "I2":
        return [choice_item(nx, 1), choice_item(x, 2), consistency_item(nx, 2), consistency_item(x, 2)]
    raise ValueError(f"unknown round kind {kind!r}")


def _pattern_report(out: ReductionOutput, kinds: Sequence[str]) -> tuple[str, ...]:
    body: list[str] = []
    for v, kind in zip(out.formula.variables(), kinds):
        body += _round_quadruple(v, kind)
    body += [clause_item(c, 1) for c in range(1, len(out.formula.clauses) + 1)]
    seen = set(body)
    return tuple(body + [o for o in out.instance.items if o not in seen])


def assignment_to_report(
    out: ReductionOutput, assignment: Mapping[int, bool]
) -> tuple[str, ...]:
    """Manipulator report realizing a truth assignment.

    Per choice round the report leads with the four items of the matching
    consistent branch, then all top clause items in clause order, then the
    remaining items canonically.
    """
    missing = [v for v in out.formula.variables() if v not in assignment]
    if missing:
        raise ValueError(f"assignment is not total, missing variables {missing}")
    kinds = ["T" if assignment[v] else "F" for v in out.formula.variables()]
    return _pattern_report(out, kinds)


@dataclass(frozen=True)
class ForwardResult:
    utility: Fraction
    meets_target: bool
    allocation: Allocation
    manipulator_bundle: frozenset[str]


def verify_forward(out: ReductionOutput, assignment: Mapping[int, bool]) -> ForwardResult:
    """Replay an assignment's report and compare the utility against T."""
    report = assignment_to_report(out, assignment)
    alloc = run_with_report(out.instance, MANIPULATOR, report)
    bundle = alloc.bundles[MANIPULATOR]
    utility = sum((out.utility.of(MANIPULATOR, o) for o in bundle), Fraction(0))
    return ForwardResult(utility, utility >= out.target, alloc, bundle)


@dataclass(frozen=True)
class PatternOutcome:
    kinds: tuple[str, ...]
    utility: Fraction
    meets_target: bool
    consistent: bool
    assignment: dict[int, bool] | None  # only for consistent patterns
    satisfies: bool | None


@dataclass(frozen=True)
class PatternReport:
    outcomes: tuple[PatternOutcome, ...]
    satisfiable: bool  # via the structured patterns
    sat_enumeration_agrees: bool  # cross-check against direct 2^|X| enumeration


def verify_choice_patterns(
    out: ReductionOutput, max_patterns: int = 65536
) -> PatternReport:
    """Replay every combination of per-round choices and audit the outcomes.

    Checks that (a) inconsistent rounds leave the manipulator with exactly
    the middle consistency pair of that variable and (b) the target is met
    exactly by consistent patterns whose induced assignment satisfies the
    formula. Raises RuntimeError on any violation.
    """
    f = out.formula
    total = 4 ** f.num_vars
    if total > max_patterns:
        raise BudgetError(f"{total} patterns exceed the budget {max_patterns}")
    outcomes = []
    pattern_sat = False
    for kinds in itertools.product(["T", "F", "I1", "I2"], repeat=f.num_vars):
        report = _pattern_report(out, kinds)
        alloc = run_with_report(out.instance, MANIPULATOR, report)
        bundle = alloc.bundles[MANIPULATOR]
        utility = sum((out.utility.of(MANIPULATOR, o) for o in bundle), Fraction(0))
        meets = utility >= out.target
        consistent = all(k in ("T", "F") for k in kinds)
        assignment = satisfies = None
        if consistent:
            assignment = {v: k == "T" for v, k in zip(f.variables(), kinds)}
            satisfies = f.is_satisfied_by(assignment)
            if meets != satisfies:
                raise RuntimeError(
                    f"pattern {kinds}: meets_target={meets} but satisfies={satisfies}"
                )
            pattern_sat = pattern_sat or meets
        else:
            for v, k in zip(f.variables(), kinds):
                if k in ("T", "F"):
                    continue
                pair = {consistency_item(v, 2), consistency_item(-v, 2)}
                got = bundle & set(
                    consistency_item(s * v, j) for s in (1, -1) for j in (1, 2, 3)
                )
                if got != pair:
                    raise RuntimeError(
                        f"pattern {kinds}: round x{v} consistency items {sorted(got)},"
                        f" expected exactly {sorted(pair)}"
                    )
            if meets:
                raise RuntimeError(f"inconsistent pattern {kinds} meets the target")
        outcomes.append(
            PatternOutcome(tuple(kinds), utility, meets, consistent, assignment, satisfies)
        )
    direct_sat = bool(f.satisfying_assignments())
    return PatternReport(tuple(outcomes), pattern_sat, pattern_sat == direct_sat)


class BudgetError(RuntimeError):
    pass
