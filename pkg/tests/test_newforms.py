"""Tests for the newform class store: character, t-values, norms, snapshots."""

from __future__ import annotations

import json
import math
import random

import pytest

from lebnag.newforms import (
    CoeffData,
    DataUnavailableError,
    NewformClass,
    NewformSpace,
    PrecisionError,
    SnapshotFormatError,
    SpaceSummary,
    TABLE2_EXPECTED,
    content_hash,
    epsilon,
    fetch_space,
    load_snapshot,
    poly_eval,
    product_norm,
    space_from_dict,
    space_to_dict,
    t_value_charpoly,
    validate_table2,
    write_snapshot,
)

# -- helpers -------------------------------------------------------------------


def make_class(label: str, q: int, dim: int, ap: dict) -> NewformClass:
    data = {}
    for p, entry in ap.items():
        if isinstance(entry, CoeffData):
            data[p] = entry
        else:
            data[p] = CoeffData(charpoly=tuple(entry))
    return NewformClass(label=label, level=2 * q * q, char_conductor=q, dim=dim, ap_data=data)


def make_space(q: int, classes) -> NewformSpace:
    return NewformSpace(
        q=q,
        level=2 * q * q,
        weight=2,
        char_conductor=q,
        total_dim=sum(c.dim for c in classes),
        classes=tuple(classes),
    )


# -- epsilon -----------------------------------------------------------------------


def test_epsilon_examples():
    assert epsilon(7, 41) == -1  # 7 inert
    assert epsilon(2, 41) == 1  # 2 splits
    assert epsilon(2, 17) == 1


def test_epsilon_square_residues():
    for q in (17, 41, 89, 97):
        for p in (3, 5, 7, 11, 13, 19, 23, 29, 31):
            has_root = any(x * x % p == q % p for x in range(1, p))
            assert epsilon(p, q) == (1 if has_root else -1)


def test_epsilon_at_q_rejected():
    with pytest.raises(ValueError):
        epsilon(41, 41)


# -- t-value polynomials --------------------------------------------------------------


def test_t_split_is_identity():
    f = make_class("a", 17, 2, {13: (3, -1, 1)})
    assert epsilon(13, 17) == 1  # 17 = 4 (mod 13) is a square
    assert t_value_charpoly(f, 13, 17) == (3, -1, 1)


def test_t_inert_square_plus_2p():
    # charpoly y^2 + 18 at inert p = 7: roots t = -18 + 14 = -4, so (x + 4)^2
    f = make_class("g1", 41, 2, {7: (18, 0, 1)})
    assert t_value_charpoly(f, 7, 41) == (16, 8, 1)


def test_t_inert_zero_ap():
    # charpoly y^2 (a_p = 0): t = 0 + 14 = 14, so (x - 14)^2
    f = make_class("g2", 41, 2, {7: (0, 0, 1)})
    assert t_value_charpoly(f, 7, 41) == (196, -28, 1)


def test_t_inert_integer_points_identity():
    # D(2p + s^2) = (-1)^d C(s) C(-s) for every integer s
    rng = random.Random(2)
    for _ in range(50):
        d = rng.choice((1, 2, 3, 4))
        coeffs = tuple(rng.randrange(-9, 10) for _ in range(d)) + (1,)
        q, p = 41, 7
        f = make_class("x", q, d, {p: coeffs})
        dpoly = t_value_charpoly(f, p, q)
        for s in range(-4, 5):
            lhs = poly_eval(dpoly, 2 * p + s * s)
            rhs = (-1) ** d * poly_eval(coeffs, s) * poly_eval(coeffs, -s)
            assert lhs == rhs


def test_t_requires_exact_data():
    f = make_class("n", 41, 1, {7: CoeffData(embeddings=((0.0, 0.0),), err=0.1)})
    with pytest.raises(DataUnavailableError):
        t_value_charpoly(f, 7, 41)


def test_missing_prime_signalled():
    f = make_class("a", 41, 2, {7: (0, 0, 1)})
    with pytest.raises(DataUnavailableError):
        t_value_charpoly(f, 11, 41)


# -- product_norm ------------------------------------------------------------------------


def test_product_norm_empty():
    f = make_class("a", 41, 2, {7: (18, 0, 1)})
    assert product_norm(f, 7, 41, set()) == 1


def test_product_norm_example_100():
    f = make_class("g1", 41, 2, {7: (18, 0, 1)})
    assert product_norm(f, 7, 41, {6}) == 100  # (6 + 4)^2


def test_product_norm_multiset_is_set():
    f = make_class("g1", 41, 2, {7: (18, 0, 1)})
    assert product_norm(f, 7, 41, [6, 6, 6]) == 100


def test_product_norm_numeric_matches_exact():
    # dim-2 class with charpoly y^2 + c: embeddings +-i*sqrt(c).  Kept in the
    # regime where the accumulated error bound stays below 1/2, which is the
    # only regime the numeric path is allowed to round in.
    rng = random.Random(5)
    for _ in range(30):
        c = rng.randrange(1, 7)
        root = math.sqrt(c)
        exact = make_class("e", 41, 2, {7: (c, 0, 1)})
        numeric = make_class(
            "n", 41, 2,
            {7: CoeffData(embeddings=((0.0, root), (0.0, -root)), err=1e-12)},
        )
        vals = {rng.randrange(-2, 3) for _ in range(3)}
        assert product_norm(numeric, 7, 41, vals) == product_norm(exact, 7, 41, vals)


def test_product_norm_numeric_refuses_coarse_error():
    numeric = make_class(
        "n", 41, 2, {7: CoeffData(embeddings=((0.0, 4.2426), (0.0, -4.2426)), err=0.4)}
    )
    with pytest.raises(PrecisionError):
        product_norm(numeric, 7, 41, {6, 2, -2})


# -- snapshot io ----------------------------------------------------------------------------


def synthetic_space_17() -> NewformSpace:
    # structurally valid, deliberately NOT matching the published summary
    c1 = make_class("t17-a", 17, 2, {3: (1, -1, 1), 7: (2, 0, 1)})
    c2 = make_class("t17-b", 17, 4, {3: (1, 0, 0, 0, 1)})
    return make_space(17, [c1, c2])


def test_snapshot_roundtrip(tmp_path):
    space = synthetic_space_17()
    path = tmp_path / "snap.json"
    write_snapshot(str(path), space)
    again = load_snapshot(str(path))
    assert again == space
    assert content_hash(again) == content_hash(space)


def test_snapshot_big_integers(tmp_path):
    big = 3**80
    c = make_class("big", 17, 1, {3: (big, 1)})
    space = make_space(17, [c])
    path = tmp_path / "big.json"
    write_snapshot(str(path), space)
    raw = json.loads(path.read_text())
    stored = raw["classes"][0]["ap"]["3"]["charpoly"][0]
    assert isinstance(stored, str) and int(stored) == big
    assert load_snapshot(str(path)).classes[0].ap_data[3].charpoly[0] == big


def test_snapshot_dim_sum_violation():
    doc = space_to_dict(synthetic_space_17())
    doc["total_dim"] = 99
    with pytest.raises(SnapshotFormatError):
        space_from_dict(doc)


def test_snapshot_level_violation():
    doc = space_to_dict(synthetic_space_17())
    doc["level"] = 579
    with pytest.raises(SnapshotFormatError):
        space_from_dict(doc)


def test_snapshot_non_monic_rejected():
    doc = space_to_dict(synthetic_space_17())
    doc["classes"][0]["ap"]["3"]["charpoly"] = [1, 2]
    with pytest.raises(SnapshotFormatError):
        space_from_dict(doc)


def test_snapshot_hash_tamper(tmp_path):
    space = synthetic_space_17()
    path = tmp_path / "snap.json"
    write_snapshot(str(path), space)
    doc = json.loads(path.read_text())
    doc["classes"][0]["dim"] = 2  # keep schema valid for c1 but change... no-op value
    doc["classes"][0]["label"] = "tampered"
    path.write_text(json.dumps(doc))
    with pytest.raises(SnapshotFormatError):
        load_snapshot(str(path))


# -- summary validation ------------------------------------------------------------------------


def test_summary_sums():
    s = SpaceSummary(q=17, total_dim=22, class_count=6, sizes=((2, 3), (4, 1), (6, 2)))
    assert s.total_dim == 22
    with pytest.raises(SnapshotFormatError):
        SpaceSummary(q=17, total_dim=23, class_count=6, sizes=((2, 3), (4, 1), (6, 2)))


def test_validate_table2_mismatch_warns():
    rep = validate_table2(synthetic_space_17())
    assert not rep.ok
    assert any("dimension" in w for w in rep.warnings)


def test_table2_expected_consistency():
    for q, exp in TABLE2_EXPECTED.items():
        if exp.get("sizes") is not None:
            assert sum(s * m for s, m in exp["sizes"].items()) == exp["dim"]
            assert sum(exp["sizes"].values()) == exp["classes"]
    # both printed readings of the q=41 row sum to the dimension; only the
    # transposed one matches the stated class count
    r = TABLE2_EXPECTED[41]["size_readings"]
    assert sum(s * m for s, m in r["as_printed"].items()) == 136
    assert sum(s * m for s, m in r["transposed_8_4"].items()) == 136
    assert sum(r["as_printed"].values()) == 22
    assert sum(r["transposed_8_4"].values()) == 18


# -- fetch orchestration -------------------------------------------------------------------------


def test_fetch_space_89_needs_snapshot(tmp_path):
    with pytest.raises(DataUnavailableError, match="snapshot"):
        fetch_space(89, cache_dir=str(tmp_path))


def test_fetch_space_97_needs_snapshot(tmp_path):
    with pytest.raises(DataUnavailableError, match="coverage unavailable"):
        fetch_space(97, cache_dir=str(tmp_path), offline=True)


def test_fetch_space_unsupported_q(tmp_path):
    with pytest.raises(DataUnavailableError):
        fetch_space(13, cache_dir=str(tmp_path))


def test_fetch_space_snapshot_path(tmp_path):
    space = synthetic_space_17()
    path = tmp_path / "s.json"
    write_snapshot(str(path), space)
    with pytest.warns(UserWarning):  # summary mismatch: synthetic data
        got = fetch_space(17, snapshot_path=str(path), cache_dir=str(tmp_path / "cache"))
    assert got == space


def test_fetch_space_snapshot_wrong_q(tmp_path):
    space = synthetic_space_17()
    path = tmp_path / "s.json"
    write_snapshot(str(path), space)
    with pytest.raises(SnapshotFormatError):
        fetch_space(41, snapshot_path=str(path))


def test_fetch_space_cache_roundtrip(tmp_path):
    # seed the cache by hand, then fetch offline
    import os

    space = synthetic_space_17()
    cdir = tmp_path / "cache"
    os.makedirs(cdir)
    write_snapshot(str(cdir / "space_q17_level578.json"), space)
    with pytest.warns(UserWarning):
        got = fetch_space(17, cache_dir=str(cdir), offline=True)
    assert got == space


def test_fetch_space_strict_summary(tmp_path):
    space = synthetic_space_17()
    path = tmp_path / "s.json"
    write_snapshot(str(path), space)
    with pytest.raises(SnapshotFormatError):
        fetch_space(17, snapshot_path=str(path), strict_summary=True)


def test_fetch_space_extended_q_via_snapshot(tmp_path):
    # q outside the packaged four is accepted through an explicit snapshot
    # (structural validation only; no reference summary exists)
    c = make_class("x233-a", 233, 2, {3: (1, -1, 1)})
    space = NewformSpace(
        q=233, level=2 * 233 * 233, weight=2, char_conductor=233,
        total_dim=2, classes=(c,),
    )
    path = tmp_path / "q233.json"
    write_snapshot(str(path), space)
    got = fetch_space(233, snapshot_path=str(path))
    assert got == space


def test_fetch_space_extended_q_without_snapshot():
    with pytest.raises(DataUnavailableError, match="snapshot"):
        fetch_space(233)
