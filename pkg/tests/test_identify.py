import itertools

import pytest

from lexichoice import (
    CapacityWise,
    CapacityWiseLists,
    ExtractionError,
    Lexicographic,
    PriorityOrdering,
    PriorityProfile,
    Problem,
    Responsive,
    check_cwrarp,
    check_wrarp,
    extract_capacity_wise_responsive,
    extract_lex_profile,
    extract_responsive,
    materialize,
    ordering_from_labels,
    profiles_equivalent,
    residual_sets,
)
from lexichoice.casebook import (
    constant_singleton_table,
    trigger_switch_table,
    switching_rule_table,
    open_walk_rule_5,
    walk_open_rule_5,
)

from conftest import random_ordering, random_profile, universe


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_lex_round_trip(rng, n):
    u = universe(n)
    for _ in range(25):
        profile = random_profile(rng, n)
        t = materialize(Lexicographic(profile), u)
        recovered = extract_lex_profile(t)
        assert materialize(Lexicographic(recovered), u) == t
        assert profiles_equivalent(t, profile, recovered)


def test_first_ordering_is_forced(rng):
    n = 5
    u = universe(n)
    for _ in range(10):
        profile = random_profile(rng, n)
        t = materialize(Lexicographic(profile), u)
        recovered = extract_lex_profile(t)
        # the first ordering is identified exactly by capacity-1 peeling
        assert recovered.orderings[0] == profile.orderings[0]


def test_residual_sets():
    u = universe(3)
    t = materialize(Responsive(ordering_from_labels(u, "abc")), u)
    res = residual_sets(t)
    assert res.at(1) == u.mask_of("abc")
    assert res.at(2) == u.mask_of("bc")
    assert res.at(3) == u.mask_of("c")
    with pytest.raises(ExtractionError):
        residual_sets(constant_singleton_table())


def test_profiles_equivalent_last_ordering_redundant(rng):
    n = 4
    u = universe(n)
    profile = random_profile(rng, n)
    t = materialize(Lexicographic(profile), u)
    replaced = PriorityProfile(
        profile.orderings[:-1] + (random_ordering(rng, n),)
    )
    assert profiles_equivalent(t, profile, replaced)
    assert materialize(Lexicographic(replaced), u) == t


def test_profiles_equivalent_matches_behavioral_oracle(rng):
    n = 4
    u = universe(n)
    for _ in range(40):
        p1 = random_profile(rng, n)
        p2 = random_profile(rng, n)
        t = materialize(Lexicographic(p1), u)
        behavioral = materialize(Lexicographic(p2), u) == t
        assert profiles_equivalent(t, p1, p2) == behavioral
    with pytest.raises(ValueError):
        p1 = random_profile(rng, n)
        t = materialize(Lexicographic(p1), u)
        wrong = PriorityProfile(
            (PriorityOrdering(tuple(reversed(p1.orderings[0].rank))),)
            + p1.orderings[1:]
        )
        if materialize(Lexicographic(wrong), u) == t:
            raise ValueError("degenerate draw")  # pragma: no cover
        profiles_equivalent(t, wrong, p1)


def test_extract_fails_on_non_lexicographic_tables():
    for t in (switching_rule_table(), constant_singleton_table(), trigger_switch_table()):
        with pytest.raises(ExtractionError):
            extract_lex_profile(t)
    u, wo = walk_open_rule_5()
    with pytest.raises(ExtractionError):
        extract_lex_profile(materialize(CapacityWise(wo), u))


def test_extraction_error_carries_diagnostics():
    try:
        extract_lex_profile(constant_singleton_table())
    except ExtractionError as e:
        assert e.step is not None or e.problem is not None
    else:  # pragma: no cover
        pytest.fail("expected failure")


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_responsive_round_trip_and_cwrarp_iff(rng, n):
    u = universe(n)
    for _ in range(10):
        ordering = random_ordering(rng, n)
        t = materialize(Responsive(ordering), u)
        assert extract_responsive(t) == ordering
        assert check_cwrarp(t).ok
    # rotating with two distinct orderings fails cross-capacity asymmetry
    if n >= 3:
        w = random_ordering(rng, n)
        o = PriorityOrdering(tuple(reversed(w.rank)))
        from lexichoice import build_rotating

        t = materialize(CapacityWise(build_rotating(w, o, n)), u)
        assert not check_cwrarp(t).ok
        with pytest.raises(ExtractionError):
            extract_responsive(t)


def test_extract_responsive_iff_cwrarp(rng):
    """Success of single-ordering extraction coincides with capacity-filling
    plus cross-capacity asymmetry, over a mixed pool of tables."""
    n = 3
    u = universe(n)
    pool = [
        materialize(Responsive(random_ordering(rng, n)), u) for _ in range(5)
    ] + [materialize(Lexicographic(random_profile(rng, n)), u) for _ in range(15)]
    pool.append(switching_rule_table())
    pool.append(trigger_switch_table())
    from lexichoice import check_capacity_filling

    for t in pool:
        ok = check_capacity_filling(t).ok and check_cwrarp(t).ok
        try:
            extract_responsive(t)
            extracted = True
        except ExtractionError:
            extracted = False
        assert extracted == ok


def test_capacity_wise_responsive_round_trip(rng):
    n = 4
    u = universe(n)
    perms = [PriorityOrdering(p) for p in itertools.permutations(range(n))]
    for _ in range(10):
        per_q = [perms[rng.randrange(len(perms))] for _ in range(n)]
        lists = CapacityWiseLists(
            tuple(tuple([per_q[q - 1]] * q) for q in range(1, n + 1))
        )
        t = materialize(CapacityWise(lists), u)
        assert check_wrarp(t).ok
        orderings = extract_capacity_wise_responsive(t)
        for q in range(1, n + 1):
            rebuilt = materialize(Responsive(orderings[q - 1]), u)
            for s in range(1, 1 << n):
                assert rebuilt.choose(Problem(s, q)) == t.choose(Problem(s, q))


def test_capacity_wise_responsive_failures():
    assert not check_wrarp(trigger_switch_table()).ok
    with pytest.raises(ExtractionError):
        extract_capacity_wise_responsive(trigger_switch_table())
    # genuinely mixed per-capacity lists are not per-capacity responsive:
    # settled empirically and pinned
    u, ow = open_walk_rule_5()
    t = materialize(CapacityWise(ow), u)
    assert not check_wrarp(t).ok
    with pytest.raises(ExtractionError):
        extract_capacity_wise_responsive(t)


def test_rotating_equivalent_to_alternating_profile():
    u = universe(5)
    w = ordering_from_labels(u, "abcde")
    o = ordering_from_labels(u, "ebdca")
    from lexichoice import build_rotating

    t = materialize(CapacityWise(build_rotating(w, o, 5)), u)
    recovered = extract_lex_profile(t)
    alternating = PriorityProfile((w, o, w, o, w))
    assert materialize(Lexicographic(alternating), u) == t
    assert profiles_equivalent(t, alternating, recovered)
