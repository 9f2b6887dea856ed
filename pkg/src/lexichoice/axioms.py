"""Exhaustive axiom checkers over choice tables.

Every checker scans the full problem space and returns an
:class:`AxiomReport`: a pass verdict, or a fail verdict carrying the first
counterexample found in a deterministic canonical order (sets ascending by
bitmask, capacities ascending, alternatives ascending).  Fail witnesses are
structured label-based dicts that :func:`replay_witness` can re-check
against the raw table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import ChoiceTable, Problem, iter_bits, popcount, popcount_array
from .rules import CapacityWiseLists


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    verdict: str  # "pass" | "fail"
    witness: dict | None
    problems_checked: int

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"


@dataclass(frozen=True)
class RevealedPreference:
    """The capacity-wise revealed preference relation at one capacity.

    ``edges`` holds ordered index pairs (a, b): a revealed preferred to b.
    ``witnesses`` maps each edge to the first set exhibiting it.
    """

    capacity: int
    edges: frozenset[tuple[int, int]]
    witnesses: dict[tuple[int, int], int]


def _labels(c: ChoiceTable, mask: int) -> list[str]:
    return sorted(c.universe.labels_of(mask))


def _n_problems(c: ChoiceTable) -> int:
    return ((1 << c.n) - 1) * c.n


def _pass(axiom: str, c: ChoiceTable) -> AxiomReport:
    return AxiomReport(axiom, "pass", None, _n_problems(c))


def _fail(axiom: str, c: ChoiceTable, witness: dict) -> AxiomReport:
    return AxiomReport(axiom, "fail", witness, _n_problems(c))


# --- the four characterizing axioms -----------------------------------------


def check_capacity_filling(c: ChoiceTable) -> AxiomReport:
    """|C(S, q)| must equal min(|S|, q) at every problem."""
    masks = np.arange(1 << c.n, dtype=np.int64)
    set_sizes = popcount_array(masks)
    for_all = popcount_array(c.entries[:, 1:])
    want = np.minimum(set_sizes[:, None], np.arange(1, c.n + 1)[None, :])
    viol = for_all != want
    viol[0, :] = False
    if not viol.any():
        return _pass("capacity_filling", c)
    s, qi = np.argwhere(viol)[0]
    s, q = int(s), int(qi) + 1
    return _fail(
        "capacity_filling",
        c,
        {
            "S": _labels(c, s),
            "q": q,
            "chosen": _labels(c, c.choose(Problem(s, q))),
        },
    )


def check_gross_substitutes(c: ChoiceTable) -> AxiomReport:
    """Chosen alternatives stay chosen when other alternatives are removed."""
    out = _kernels.gs_first_violation(c.n, c.entries)
    if out[0] < 0:
        return _pass("gross_substitutes", c)
    s, q, a, b = (int(v) for v in out)
    return _fail(
        "gross_substitutes",
        c,
        {
            "S": _labels(c, s),
            "q": q,
            "a": c.universe.labels[a],
            "b": c.universe.labels[b],
        },
    )


def check_monotonicity(c: ChoiceTable) -> AxiomReport:
    """C(S, q) must be contained in C(S, q+1)."""
    lost = c.entries[:, 1:c.n] & ~c.entries[:, 2:c.n + 1]
    viol = lost != 0
    if not viol.any():
        return _pass("monotonicity", c)
    s, qi = np.argwhere(viol)[0]
    s, q = int(s), int(qi) + 1
    alt = next(iter_bits(int(lost[s, qi])))
    return _fail(
        "monotonicity",
        c,
        {"S": _labels(c, s), "q": q, "alt": c.universe.labels[alt]},
    )


def check_iaa(c: ChoiceTable) -> AxiomReport:
    """Irrelevance of accepted alternatives.

    Equal rejection sets at q must yield equal newly-accepted sets at q+1.
    Sets are indexed by rejection-set fingerprint per capacity, so the scan
    is linear in the problem space rather than quadratic in set pairs.
    """
    size = 1 << c.n
    for q in range(1, c.n):
        seen: dict[int, tuple[int, int]] = {}
        for s in range(1, size):
            rej = s & ~int(c.entries[s, q])
            new = int(c.entries[s, q + 1]) & rej
            if rej in seen:
                s0, new0 = seen[rej]
                if new != new0:
                    return _fail(
                        "iaa",
                        c,
                        {
                            "S": _labels(c, s0),
                            "S_prime": _labels(c, s),
                            "q": q,
                            "rejected": _labels(c, rej),
                            "new_accepted_S": _labels(c, new0),
                            "new_accepted_S_prime": _labels(c, new),
                        },
                    )
            else:
                seen[rej] = (s, new)
    return _pass("iaa", c)


# --- revealed preference axioms ----------------------------------------------


def revealed_pref(c: ChoiceTable, q: int) -> RevealedPreference:
    """Edges (a, b): some S has a, b rejected at q-1, a chosen and b rejected at q."""
    if q < 2:
        raise ValueError("revealed preference requires capacity q >= 2")
    if q > c.n:
        raise ValueError(f"capacity {q} outside 2..{c.n}")
    wit = _kernels.revealed_wit(c.n, c.entries, q)
    edges = set()
    witnesses = {}
    for a in range(c.n):
        for b in range(c.n):
            if wit[a, b]:
                edges.add((a, b))
                witnesses[(a, b)] = int(wit[a, b])
    return RevealedPreference(q, frozenset(edges), witnesses)


def check_cwarp(c: ChoiceTable) -> AxiomReport:
    """The revealed preference relation must be asymmetric at every capacity."""
    for q in range(2, c.n + 1):
        wit = _kernels.revealed_wit(c.n, c.entries, q)
        for a in range(c.n):
            for b in range(a + 1, c.n):
                if wit[a, b] and wit[b, a]:
                    return _fail(
                        "cwarp",
                        c,
                        {
                            "q": q,
                            "a": c.universe.labels[a],
                            "b": c.universe.labels[b],
                            "S_ab": _labels(c, int(wit[a, b])),
                            "S_ba": _labels(c, int(wit[b, a])),
                        },
                    )
    return _pass("cwarp", c)


def check_cwarp_alternative(c: ChoiceTable) -> AxiomReport:
    """Pairwise-set formulation of the same asymmetry condition.

    Quantifies over pairs of sets directly, as an independent cross-check of
    :func:`check_cwarp`; quadratic in the number of sets, so intended for
    small universes.
    """
    size = 1 << c.n
    for q in range(2, c.n + 1):
        for s in range(1, size):
            cs_prev = int(c.entries[s, q - 1])
            cs = int(c.entries[s, q])
            for t in range(1, size):
                ct_prev = int(c.entries[t, q - 1])
                ct = int(c.entries[t, q])
                both = s & t
                excluded = both & ~(cs_prev | ct_prev)
                for a in iter_bits(excluded):
                    if not (cs >> a) & 1:
                        continue
                    for b in iter_bits(excluded):
                        if b == a:
                            continue
                        if (ct >> b) & 1 and not (cs >> b) & 1:
                            if not (ct >> a) & 1:
                                return _fail(
                                    "cwarp_alternative",
                                    c,
                                    {
                                        "q": q,
                                        "S": _labels(c, s),
                                        "T": _labels(c, t),
                                        "a": c.universe.labels[a],
                                        "b": c.universe.labels[b],
                                    },
                                )
    return _pass("cwarp_alternative", c)


def _chosen_over_first(c: ChoiceTable, a: int, b: int) -> tuple[int, int] | None:
    """First problem (canonical order) with a chosen and b rejected."""
    best = None
    for q in range(1, c.n + 1):
        wit = _kernels.chosen_over_wit(c.n, c.entries, q)
        if wit[a, b]:
            cand = (int(wit[a, b]), q)
            if best is None or cand < best:
                best = cand
    return best


def check_wrarp(c: ChoiceTable) -> AxiomReport:
    """Per-capacity asymmetry of the chosen-over relation.

    A violation of the pairwise formulation (a chosen over b at one problem,
    b chosen over a at another problem of the same capacity) is exactly a
    symmetric chosen-over pair at that capacity.
    """
    for q in range(1, c.n + 1):
        wit = _kernels.chosen_over_wit(c.n, c.entries, q)
        for a in range(c.n):
            for b in range(a + 1, c.n):
                if wit[a, b] and wit[b, a]:
                    return _fail(
                        "wrarp",
                        c,
                        {
                            "q": q,
                            "a": c.universe.labels[a],
                            "b": c.universe.labels[b],
                            "S_ab": _labels(c, int(wit[a, b])),
                            "S_ba": _labels(c, int(wit[b, a])),
                        },
                    )
    return _pass("wrarp", c)


def check_cwrarp(c: ChoiceTable) -> AxiomReport:
    """Cross-capacity asymmetry of the chosen-over relation."""
    first: dict[tuple[int, int], tuple[int, int]] = {}
    for q in range(1, c.n + 1):
        wit = _kernels.chosen_over_wit(c.n, c.entries, q)
        for a in range(c.n):
            for b in range(c.n):
                if wit[a, b]:
                    cand = (int(wit[a, b]), q)
                    if (a, b) not in first or cand < first[(a, b)]:
                        first[(a, b)] = cand
    for a in range(c.n):
        for b in range(a + 1, c.n):
            if (a, b) in first and (b, a) in first:
                s_ab, q_ab = first[(a, b)]
                s_ba, q_ba = first[(b, a)]
                return _fail(
                    "cwrarp",
                    c,
                    {
                        "a": c.universe.labels[a],
                        "b": c.universe.labels[b],
                        "S_ab": _labels(c, s_ab),
                        "q_ab": q_ab,
                        "S_ba": _labels(c, s_ba),
                        "q_ba": q_ba,
                    },
                )
    return _pass("cwrarp", c)


def check_path_independence(c: ChoiceTable) -> AxiomReport:
    """C(S union T, q) must equal C(C(S,q) union C(T,q), q) for all S, T, q."""
    out = _kernels.path_independence_first(c.n, c.entries)
    if out[0] < 0:
        return _pass("path_independence", c)
    s, t, q = (int(v) for v in out)
    return _fail(
        "path_independence",
        c,
        {"S": _labels(c, s), "T": _labels(c, t), "q": q},
    )


# --- capacity-wise list structure --------------------------------------------


def _is_insertion(prev: tuple, cur: tuple) -> bool:
    """cur is prev with one extra element inserted, relative order kept."""
    if len(cur) != len(prev) + 1:
        return False
    for k in range(len(cur)):
        if cur[:k] == prev[:k] and cur[k + 1:] == prev[k:]:
            return True
    return False


def check_insertion(lists: CapacityWiseLists) -> AxiomReport:
    """Each capacity's list extends the previous one by a single insertion."""
    for q in range(2, lists.n + 1):
        if not _is_insertion(lists.at(q - 1), lists.at(q)):
            return AxiomReport(
                "insertion",
                "fail",
                {
                    "q": q,
                    "list_prev": [list(o.rank) for o in lists.at(q - 1)],
                    "list_q": [list(o.rank) for o in lists.at(q)],
                },
                lists.n,
            )
    return AxiomReport("insertion", "pass", None, lists.n)


# --- witness replay -----------------------------------------------------------


ALL_CHECKS = {
    "capacity_filling": check_capacity_filling,
    "gross_substitutes": check_gross_substitutes,
    "monotonicity": check_monotonicity,
    "iaa": check_iaa,
    "cwarp": check_cwarp,
    "wrarp": check_wrarp,
    "cwrarp": check_cwrarp,
    "path_independence": check_path_independence,
}

CORE_AXIOMS = ("capacity_filling", "gross_substitutes", "monotonicity", "iaa")


def replay_witness(c: ChoiceTable, axiom: str, w: dict) -> bool:
    """Re-evaluate a fail witness against the raw table.

    Returns True when the witness still exhibits the claimed violation.
    """
    u = c.universe
    m = u.mask_of
    if axiom == "capacity_filling":
        s, q = m(w["S"]), w["q"]
        got = c.choose(Problem(s, q))
        return popcount(got) != min(popcount(s), q) and got == m(w["chosen"])
    if axiom == "gross_substitutes":
        s, q = m(w["S"]), w["q"]
        a, b = u.index(w["a"]), u.index(w["b"])
        sub = s & ~(1 << b)
        return (
            bool((c.choose(Problem(s, q)) >> a) & 1)
            and sub != 0
            and not (c.choose(Problem(sub, q)) >> a) & 1
        )
    if axiom == "monotonicity":
        s, q, a = m(w["S"]), w["q"], u.index(w["alt"])
        return bool((c.choose(Problem(s, q)) >> a) & 1) and not (
            c.choose(Problem(s, q + 1)) >> a
        ) & 1
    if axiom == "iaa":
        s, sp, q = m(w["S"]), m(w["S_prime"]), w["q"]
        rej = s & ~c.choose(Problem(s, q))
        rejp = sp & ~c.choose(Problem(sp, q))
        if rej != rejp:
            return False
        new = c.choose(Problem(s, q + 1)) & rej
        newp = c.choose(Problem(sp, q + 1)) & rejp
        return new != newp and new == m(w["new_accepted_S"]) and newp == m(
            w["new_accepted_S_prime"]
        )
    if axiom == "cwarp":
        q = w["q"]
        a, b = u.index(w["a"]), u.index(w["b"])
        return _revealed_at(c, q, a, b, m(w["S_ab"])) and _revealed_at(
            c, q, b, a, m(w["S_ba"])
        )
    if axiom == "wrarp":
        q = w["q"]
        a, b = u.index(w["a"]), u.index(w["b"])
        return _chosen_over_at(c, q, a, b, m(w["S_ab"])) and _chosen_over_at(
            c, q, b, a, m(w["S_ba"])
        )
    if axiom == "cwrarp":
        a, b = u.index(w["a"]), u.index(w["b"])
        return _chosen_over_at(c, w["q_ab"], a, b, m(w["S_ab"])) and _chosen_over_at(
            c, w["q_ba"], b, a, m(w["S_ba"])
        )
    if axiom == "path_independence":
        s, t, q = m(w["S"]), m(w["T"]), w["q"]
        merged = c.choose(Problem(s, q)) | c.choose(Problem(t, q))
        return c.choose(Problem(s | t, q)) != c.choose(Problem(merged, q))
    raise ValueError(f"unknown axiom {axiom!r}")


def _chosen_over_at(c: ChoiceTable, q: int, a: int, b: int, s: int) -> bool:
    ch = c.choose(Problem(s, q))
    return bool((ch >> a) & 1) and bool(((s & ~ch) >> b) & 1)


def _revealed_at(c: ChoiceTable, q: int, a: int, b: int, s: int) -> bool:
    prev = c.choose(Problem(s, q - 1))
    if (prev >> a) & 1 or (prev >> b) & 1:
        return False
    return _chosen_over_at(c, q, a, b, s)
