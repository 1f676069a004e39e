"""Property tests that run against the bundled (genuine) newform snapshots."""

from __future__ import annotations

import math

import pytest

from lebnag.newforms import fetch_space, t_value_charpoly, validate_table2
from lebnag.quadfield import primes_above
from lebnag.sieve import (
    B_fp,
    default_prime_set,
    run_elimination,
    trace_set,
    trace_set_for,
)


@pytest.fixture(scope="module")
def space17():
    return fetch_space(17, offline=True)


@pytest.fixture(scope="module")
def space41():
    return fetch_space(41, offline=True)


def test_bundled_summaries(space17, space41):
    assert validate_table2(space17).ok
    rep41 = validate_table2(space41)
    assert rep41.ok and rep41.size_reading == "transposed_8_4"


def test_ramanujan_bound_on_real_data(space17, space41):
    # every root of every stored a_p charpoly has |a| <= 2 sqrt(p) (weight 2);
    # checked via the coefficient bound |c_k| <= binom(d, k) (2 sqrt p)^(d-k)
    for space in (space17, space41):
        for c in space.classes:
            for p, cd in c.ap_data.items():
                if p > 31:
                    continue
                d = c.dim
                for k, coeff in enumerate(cd.charpoly):
                    bound = math.comb(d, k) * (2 * math.sqrt(p)) ** (d - k) + 1e-6
                    assert abs(coeff) <= bound, (c.label, p, k)


def test_monotonicity_adding_primes_divides(space41):
    # B_f over a superset of primes divides B_f over a subset
    primes = default_prime_set(41)
    small = run_elimination(space41, primes[:4])
    full = run_elimination(space41, primes)
    bs = {r.label: r.b_f for r in small}
    bf = {r.label: r.b_f for r in full}
    for label, b_full in bf.items():
        b_small = bs[label]
        if b_small == 0:
            continue  # gcd with 0 can only stay or shrink; nothing to divide
        assert b_small % math.gcd(b_small, b_full) == 0
        assert b_small % b_full == 0 if b_full else True


def test_elimination_stable_under_more_primes(space41):
    # eliminated classes stay eliminated when extending the prime set to 31
    base = {r.label: r.status for r in run_elimination(space41)}
    wider = {r.label: r.status for r in run_elimination(space41, default_prime_set(41, 3, 31))}
    for label, status in base.items():
        if status == "eliminated":
            assert wider[label] == "eliminated"
    # and the two survivors stay survivors (their B values remain 0)
    assert sum(1 for s in wider.values() if s != "eliminated") == 2


def test_conjugate_prime_same_elimination_status(space41):
    # split p = 5: both primes above it give the same B_{f,P}
    p5a, p5b = primes_above(41, 5)
    ta, tb = trace_set(p5a, 41), trace_set(p5b, 41)
    assert ta.values == tb.values
    for f in space41.classes:
        assert B_fp(f, p5a, ta) == B_fp(f, p5b, tb)


def test_t_value_charpolys_integrality(space17):
    for f in space17.classes:
        for p in (3, 5, 7, 11, 13):
            tp = t_value_charpoly(f, p, 17)
            assert len(tp) == f.dim + 1 and tp[-1] == 1


def test_obstructing_class_has_zero_inert_ap(space17):
    # the inner twist forces a_p = c sqrt(-2) at inert p: charpoly x^2 + 2c^2
    from lebnag.newforms import epsilon
    from lebnag.sieve import obstruction_scan

    rep = obstruction_scan(space17, char_bound=100)
    f = next(c for c in space17.classes if c.label == rep.obstructing_label)
    for p, cd in f.ap_data.items():
        c0, c1, _ = cd.charpoly
        if epsilon(p, 17) == -1:
            assert c1 == 0 and c0 >= 0 and c0 % 2 == 0
        else:
            # split p: rational a_p, charpoly (x - a)^2
            assert c1 * c1 == 4 * c0


def test_trace_sets_cached_consistent(space41):
    pr = default_prime_set(41)[0]
    assert trace_set_for(41, pr).values == trace_set(pr, 41).values


def test_obstruction_scan_configurable_bound(space17):
    # the q=17 snapshot stores primes to 199, so the trace match extends
    # well past the default bound of 100
    from lebnag.sieve import obstruction_scan

    rep = obstruction_scan(space17, char_bound=200)
    assert rep.all_traces_match and len(rep.trace_matches) == 62


def test_bundled_snapshots_roundtrip(space17, space41, tmp_path):
    from lebnag.newforms import load_snapshot, write_snapshot

    for i, space in enumerate((space17, space41)):
        path = tmp_path / f"rt{i}.json"
        write_snapshot(str(path), space)
        assert load_snapshot(str(path)) == space


def test_q41_survivors_have_sqrt_minus2_field(space41):
    # both surviving classes carry the Q(sqrt(-2)) inner-twist structure the
    # restriction-of-scalars endomorphism algebra predicts: rational a_p at
    # split p (charpoly (x-a)^2), a_p = c*sqrt(-2) at inert p (x^2 + 2c^2)
    from lebnag.newforms import epsilon
    from lebnag.sieve import _coefficient_field_disc, run_elimination

    records = run_elimination(space41)
    survivors = [r.label for r in records if r.status != "eliminated"]
    assert len(survivors) == 2
    for label in survivors:
        f = next(c for c in space41.classes if c.label == label)
        assert _coefficient_field_disc(f) == -2
        for p, cd in f.ap_data.items():
            c0, c1, _ = cd.charpoly
            if epsilon(p, 41) == -1:
                assert c1 == 0 and c0 >= 0 and c0 % 2 == 0
            else:
                assert c1 * c1 == 4 * c0
