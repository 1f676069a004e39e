"""The small-exponent exceptional solutions, including the odd-k one.

(q, x, y, k, n) = (17, -71, 2, 1, 7) is the only known solution with odd k,
so it is the only end-to-end exercise of the odd-parity w construction and
of the ord_sqrtq(delta) = 3 branch of the valuation suite.
"""

from __future__ import annotations

import pytest

from lebnag.frey import (
    EXCEPTIONAL_SOLUTIONS,
    EXPONENT_BOUND,
    Solution,
    check_decomposition_identity,
    decompose_solution,
    isogeny_check,
    verify_valuations,
)


def test_exceptional_list_arithmetic():
    assert EXPONENT_BOUND == 1000
    for (q, x, y, k, n) in EXCEPTIONAL_SOLUTIONS:
        assert x * x - q ** (2 * k + 1) == y**n


@pytest.fixture(scope="module")
def odd_k_solution():
    return Solution.from_raw(17, 71, 1, 2, 7)


def test_odd_k_decomposition(odd_k_solution):
    dec = decompose_solution(odd_k_solution)
    assert dec.alpha.is_unit()
    assert check_decomposition_identity(odd_k_solution, dec)


def test_odd_k_valuations(odd_k_solution):
    rep = verify_valuations(odd_k_solution)
    assert rep.ok, rep.failures
    d = dict((n, a) for n, _, a in rep.checks)
    assert d["ord_sqrtq(delta)"] == 3  # odd k
    assert d["ord_gamma(c4)"] == 8 and d["ord_gammabar(c6)"] == 6


def test_odd_k_isogeny(odd_k_solution):
    assert isogeny_check(odd_k_solution)


def test_odd_k_mod7_compatible_with_some_class(odd_k_solution):
    # the mod-7 representation of this solution's curve must be compatible
    # with at least one class at level 578 (every per-prime divisibility
    # integer divisible by 7)
    from lebnag.newforms import fetch_space
    from lebnag.sieve import soundness_check

    space = fetch_space(17, offline=True)
    rep = soundness_check(space, sol=odd_k_solution)
    assert rep.ok and rep.realised_label is not None
