"""Extraction of rationalizing priority structures from choice tables.

Given a table that satisfies the four characterizing axioms, a priority
profile is recovered by constructive peeling: the first ordering by repeated
capacity-1 choices, each later ordering from capacity-i choices with the
earlier orderings' top alternatives removed and re-appended at the tail.
Every extraction validates its own output by full re-materialization, so a
precondition slip surfaces as a diagnosable failure instead of a silently
wrong profile.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ChoiceTable, Problem, popcount
from .rules import (
    CapacityWise,
    CapacityWiseLists,
    Lexicographic,
    PriorityOrdering,
    PriorityProfile,
    Responsive,
    materialize,
)


class ExtractionError(ValueError):
    """Raised when a peel step or the final validation fails.

    Carries the construction step or the first mismatching problem, so the
    caller can diagnose which precondition the input table violates.
    """

    def __init__(self, message: str, *, step: str | None = None,
                 problem: Problem | None = None):
        super().__init__(message)
        self.step = step
        self.problem = problem


@dataclass(frozen=True)
class ResidualSets:
    """The chain A_1 = A, A_t = A minus C(A, t-1); |A_t| = n - t + 1."""

    sets: tuple[int, ...]

    def at(self, t: int) -> int:
        return self.sets[t - 1]


def residual_sets(c: ChoiceTable) -> ResidualSets:
    full = c.universe.full_mask
    sets = [full]
    for t in range(2, c.n + 1):
        a_t = full & ~c.choose(Problem(full, t - 1))
        if popcount(a_t) != c.n - t + 1:
            raise ExtractionError(
                f"residual set at t={t} has {popcount(a_t)} elements; "
                "the table is not capacity-filling",
                step=f"residual t={t}",
            )
        sets.append(a_t)
    return ResidualSets(tuple(sets))


def _peel_singleton(c: ChoiceTable, mask: int, q: int, drop: int, step: str) -> int:
    """C(mask, q) minus drop, required to be a single new alternative."""
    got = c.choose(Problem(mask, q)) & ~drop
    if popcount(got) != 1:
        raise ExtractionError(
            f"peel step {step} produced {popcount(got)} alternatives "
            "instead of one",
            step=step,
        )
    return got.bit_length() - 1


def extract_lex_profile(c: ChoiceTable) -> PriorityProfile:
    """Recover a priority profile whose lexicographic table equals ``c``.

    The caller is expected to have verified capacity-filling, gross
    substitutes, monotonicity, and the irrelevance of accepted alternatives;
    any violation surfaces as :class:`ExtractionError` during peeling or at
    the final re-materialization check.
    """
    n = c.n
    full = c.universe.full_mask
    heads: list[int] = []  # top alternative of each ordering built so far
    orderings: list[PriorityOrdering] = []

    for i in range(1, n + 1):
        drop = 0
        for h in heads:
            drop |= 1 << h
        rank: list[int] = []
        remaining = full
        # first entry: the new alternative appearing at capacity i
        a_i1 = _peel_singleton(c, full, i, drop, step=f"ordering {i}, position 1")
        rank.append(a_i1)
        remaining &= ~(1 << a_i1)
        # positions 2..n-i+1: peel at capacity i, ignoring earlier heads
        for j in range(2, n - i + 2):
            peeled = 0
            for alt in rank:
                peeled |= 1 << alt
            a_ij = _peel_singleton(
                c, full & ~peeled, i, drop, step=f"ordering {i}, position {j}"
            )
            rank.append(a_ij)
            remaining &= ~(1 << a_ij)
        # tail positions: earlier orderings' heads, in construction order
        rank.extend(heads)
        heads.append(a_i1)
        orderings.append(PriorityOrdering(tuple(rank)))

    profile = PriorityProfile(tuple(orderings))
    got = materialize(Lexicographic(profile), c.universe)
    diff = got.first_difference(c)
    if diff is not None:
        raise ExtractionError(
            f"extracted profile fails validation at problem {diff}; "
            "the table is not lexicographic",
            problem=diff,
        )
    return profile


def profiles_equivalent(
    c: ChoiceTable, p1: PriorityProfile, p2: PriorityProfile
) -> bool:
    """Whether two profiles generate the same lexicographic rule as ``c``.

    ``c`` must be the materialization of ``p1``.  Equivalence holds exactly
    when each ordering's restriction to the residual set A_t coincides
    across the profiles (the restriction to A_1 = A pins the first ordering
    entirely).
    """
    if materialize(Lexicographic(p1), c.universe) != c:
        raise ValueError("c is not the materialization of p1")
    res = residual_sets(c)
    for t in range(1, c.n + 1):
        a_t = res.at(t)
        r1 = [alt for alt in p1.orderings[t - 1].rank if (a_t >> alt) & 1]
        r2 = [alt for alt in p2.orderings[t - 1].rank if (a_t >> alt) & 1]
        if r1 != r2:
            return False
    return True


def extract_responsive(c: ChoiceTable) -> PriorityOrdering:
    """Recover a single ordering whose responsive table equals ``c``.

    Built by repeated capacity-1 peeling, then validated at all capacities.
    """
    n = c.n
    full = c.universe.full_mask
    rank: list[int] = []
    remaining = full
    for j in range(n):
        alt = _peel_singleton(c, remaining, 1, 0, step=f"position {j + 1}")
        rank.append(alt)
        remaining &= ~(1 << alt)
    ordering = PriorityOrdering(tuple(rank))
    got = materialize(Responsive(ordering), c.universe)
    diff = got.first_difference(c)
    if diff is not None:
        raise ExtractionError(
            f"table is not responsive: first mismatch at problem {diff}",
            problem=diff,
        )
    return ordering


def extract_capacity_wise_responsive(c: ChoiceTable) -> list[PriorityOrdering]:
    """One ordering per capacity whose top-q sets reproduce the table.

    For each capacity, an ordering is any linear extension of the
    chosen-over relation at that capacity (every chosen alternative must
    outrank every rejected one at every set).  Incomparable alternatives
    are broken by lowest index; a cycle or a validation mismatch raises
    :class:`ExtractionError`.
    """
    from . import _kernels

    n = c.n
    orderings: list[PriorityOrdering] = []
    for q in range(1, n + 1):
        wit = _kernels.chosen_over_wit(n, c.entries, q)
        succ = [set() for _ in range(n)]
        indeg = [0] * n
        for a in range(n):
            for b in range(n):
                if wit[a, b] and b not in succ[a]:
                    succ[a].add(b)
                    indeg[b] += 1
        rank: list[int] = []
        ready = sorted(a for a in range(n) if indeg[a] == 0)
        while ready:
            a = ready.pop(0)
            rank.append(a)
            added = []
            for b in succ[a]:
                indeg[b] -= 1
                if indeg[b] == 0:
                    added.append(b)
            if added:
                ready = sorted(ready + added)
        if len(rank) != n:
            cyc = [c.universe.labels[a] for a in range(n) if indeg[a] > 0]
            raise ExtractionError(
                f"chosen-over relation at capacity {q} is cyclic among {cyc}; "
                "the table violates the per-capacity revealed preference axiom",
                step=f"capacity {q}",
            )
        orderings.append(PriorityOrdering(tuple(rank)))
    lists = CapacityWiseLists(
        tuple(tuple([o] * q) for q, o in enumerate(orderings, start=1))
    )
    got = materialize(CapacityWise(lists), c.universe)
    diff = got.first_difference(c)
    if diff is not None:
        raise ExtractionError(
            "table is not capacity-wise responsive: first mismatch at "
            f"problem {diff}",
            problem=diff,
        )
    return orderings
