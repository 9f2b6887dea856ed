import random

import pytest

from lexichoice import (
    ExtractionError,
    FeasibilityFamily,
    Problem,
    agent_partition_family,
    check_csarp,
    check_f_capacity_filling,
    check_monotonicity,
    extract_flex_profile,
    f_revealed_pref,
    flex_choose,
    flex_materialize,
    make_family,
    make_universe,
    replay_f_witness,
)
from lexichoice.feasibility import FChoiceTable

from conftest import (
    mask_of,
    members_of,
    naive_flex_choice,
    random_profile,
    universe,
)


def random_family(rng: random.Random, n: int) -> FeasibilityFamily:
    u = universe(n)
    count = rng.randrange(1, 4)
    maximal = []
    for _ in range(count):
        mask = 0
        for a in range(n):
            if rng.random() < 0.6:
                mask |= 1 << a
        maximal.append(mask or 1)
    return make_family(u, maximal)


def explicit_sets(f: FeasibilityFamily) -> set[frozenset[int]]:
    return {
        frozenset(members_of(mask))
        for mask in range(1 << f.n)
        if mask in f
    }


def test_make_family_prunes_and_closes():
    u = universe(4)
    f = make_family(u, ["abc", "ab", "d"])
    assert f.maximal == (u.mask_of("abc"), u.mask_of("d"))
    assert u.mask_of("ab") in f
    assert u.mask_of("abc") in f
    assert u.mask_of("abd") not in f
    # singletons always feasible, even outside every maximal set
    f2 = make_family(u, ["ab"])
    assert u.mask_of("c") in f2
    assert u.mask_of("cd") not in f2
    assert 0 in f2
    with pytest.raises(ValueError):
        make_family(universe(2), [0b100])


def test_membership_array_matches_contains(rng):
    for n in (2, 3, 4):
        for _ in range(10):
            f = random_family(rng, n)
            arr = f.membership_array()
            for mask in range(1 << n):
                assert bool(arr[mask]) == (mask in f)


def test_agent_partition_family():
    u = make_universe(["a1", "a2", "b1", "c1", "c2"])
    f = agent_partition_family(u, [["a1", "a2"], ["b1"], ["c1", "c2"]])
    assert u.mask_of(["a1", "b1", "c2"]) in f
    assert u.mask_of(["a1", "a2"]) not in f
    with pytest.raises(ValueError):
        agent_partition_family(u, [["a1"], ["b1"], ["c1", "c2"]])  # no cover
    with pytest.raises(ValueError):
        agent_partition_family(
            u, [["a1", "a2"], ["a2", "b1"], ["c1", "c2"]]
        )  # overlap


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_flex_choose_matches_naive_oracle(rng, n):
    u = universe(n)
    for _ in range(10):
        f = random_family(rng, n)
        sets = explicit_sets(f)
        profile = random_profile(rng, n)
        t = flex_materialize(profile, f, u)
        t.validate()
        for s in range(1, 1 << n):
            for q in range(1, n + 1):
                want = mask_of(
                    naive_flex_choice(profile, sets, members_of(s), q)
                )
                assert flex_choose(profile, f, Problem(s, q)) == want
                assert t.choose(Problem(s, q)) == want


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_flex_tables_pass_characterizing_axioms(rng, n):
    u = universe(n)
    for _ in range(10):
        f = random_family(rng, n)
        t = flex_materialize(random_profile(rng, n), f, u)
        assert check_f_capacity_filling(t).ok
        assert check_monotonicity(t).ok
        assert check_csarp(t).ok


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_flex_extraction_round_trip(rng, n):
    u = universe(n)
    for _ in range(10):
        f = random_family(rng, n)
        t = flex_materialize(random_profile(rng, n), f, u)
        recovered = extract_flex_profile(t)
        assert flex_materialize(recovered, f, u) == t


def _patched_table(t: FChoiceTable, edits) -> FChoiceTable:
    import numpy as np

    entries = np.array(t.entries)
    for (s, q), v in edits.items():
        entries[s, q] = v
    return FChoiceTable(t.universe, t.family, entries)


def test_f_capacity_filling_failure_and_replay(rng):
    n = 3
    u = universe(n)
    f = make_family(u, ["ab", "bc", "ac"])  # pairs feasible, triple not
    t = flex_materialize(random_profile(rng, n), f, u)
    # make one entry under-filled although a feasible augmentation exists
    s = u.mask_of("abc")
    first = t.choose(Problem(s, 1))
    bad = _patched_table(t, {(s, 2): first})
    rep = check_f_capacity_filling(bad)
    assert not rep.ok
    assert replay_f_witness(bad, "f_capacity_filling", rep.witness)
    assert not replay_f_witness(t, "f_capacity_filling", rep.witness)


def test_csarp_failure_and_replay():
    n = 3
    u = universe(n)
    f = make_family(u, [u.full_mask])
    # hand-built cyclic behavior at capacity 1: from {a,b} pick a, from
    # {b,c} pick b, from {a,c} pick c
    import numpy as np

    entries = np.zeros((1 << n, n + 1), dtype=np.int64)
    pick1 = {0b011: 0b001, 0b110: 0b010, 0b101: 0b100, 0b111: 0b001}
    for s in range(1, 1 << n):
        for q in range(1, n + 1):
            if q == 1:
                entries[s, q] = pick1.get(s, s & -s)
            else:
                prev = entries[s, q - 1]
                rest = s & ~prev
                add = rest & -rest if rest else 0
                entries[s, q] = prev | add
    t = FChoiceTable(u, f, entries)
    rep = check_csarp(t)
    assert not rep.ok and rep.witness["q"] == 1
    cyc = rep.witness["cycle"]
    assert cyc[0] == cyc[-1] and len(set(cyc)) == len(cyc) - 1
    assert replay_f_witness(t, "csarp", rep.witness)
    with pytest.raises(ExtractionError):
        extract_flex_profile(t)


def test_f_revealed_pref_uses_feasibility_gate(rng):
    n = 3
    u = universe(n)
    f = make_family(u, ["ab", "c"])
    t = flex_materialize(random_profile(rng, n), f, u)
    for q in range(1, n + 1):
        rp = f_revealed_pref(t, q)
        for (a, b), s in rp.witnesses.items():
            prev = t.choose(Problem(s, q - 1)) if q > 1 else 0
            assert (prev | (1 << b)) in f
    with pytest.raises(ValueError):
        f_revealed_pref(t, 0)


def test_unconstrained_family_reduces_to_plain_lexicographic(rng):
    n = 4
    u = universe(n)
    f = make_family(u, [u.full_mask])
    profile = random_profile(rng, n)
    from lexichoice import Lexicographic, materialize

    flex = flex_materialize(profile, f, u)
    plain = materialize(Lexicographic(profile), u)
    assert (flex.entries == plain.entries).all()
