"""Newform Galois-conjugacy-class data at level 2q^2 with the quadratic character.

A *space* is the list of conjugacy classes of weight-2 newforms at level
2q^2 whose nebentypus is the quadratic character of conductor q.  Each class
carries, per small prime p, either the exact monic integer characteristic
polynomial of a_p over Q or a list of complex embedding values with an error
bound.  Spaces are ingested (bundled snapshot, user snapshot file, disk
cache, or the public database over HTTP); they are never computed here.
"""

from __future__ import annotations

import hashlib
import json
import os
import warnings
from dataclasses import dataclass, field

_JSON_INT_LIMIT = 2**53


class DataUnavailableError(Exception):
    """Coefficient data for the requested space cannot be obtained."""


class SnapshotFormatError(ValueError):
    """A snapshot file violates the documented schema."""


class PrecisionError(ArithmeticError):
    """Numeric coefficient data is too coarse to round rigorously."""


# -- splitting character ------------------------------------------------------


def epsilon(p: int, q: int) -> int:
    """The quadratic character of conductor q at p: -1 exactly when p is inert.

    Computed as the Legendre symbol (p|q); since q = 1 (mod 4) this equals
    (q|p) by reciprocity, so the value is -1 iff x^2 = q (mod p) is insoluble.
    """
    if p == q:
        raise ValueError("character undefined at p = q")
    t = pow(p % q, (q - 1) // 2, q)
    return 1 if t == 1 else -1


# -- data containers ----------------------------------------------------------


@dataclass(frozen=True)
class CoeffData:
    """a_p data for one class: exact charpoly coefficients and/or embeddings."""

    charpoly: tuple[int, ...] | None = None  # c0, ..., c_{dim-1}, 1 (monic)
    embeddings: tuple[tuple[float, float], ...] | None = None
    err: float = 0.0

    def __post_init__(self) -> None:
        if self.charpoly is None and self.embeddings is None:
            raise SnapshotFormatError("coefficient entry carries no data")
        if self.charpoly is not None and self.charpoly[-1] != 1:
            raise SnapshotFormatError("charpoly must be monic")

    @property
    def exact(self) -> bool:
        return self.charpoly is not None


@dataclass(frozen=True)
class NewformClass:
    """One Galois conjugacy class of newforms."""

    label: str
    level: int
    char_conductor: int
    dim: int
    ap_data: dict[int, CoeffData] = field(hash=False)

    def coeff(self, p: int) -> CoeffData:
        try:
            return self.ap_data[p]
        except KeyError:
            raise DataUnavailableError(f"{self.label}: no a_p data at p={p}") from None

    def primes(self) -> list[int]:
        return sorted(self.ap_data)


@dataclass(frozen=True)
class SpaceSummary:
    q: int
    total_dim: int
    class_count: int
    sizes: tuple[tuple[int, int], ...]  # (class size, multiplicity), sorted

    def __post_init__(self) -> None:
        if sum(s * m for s, m in self.sizes) != self.total_dim:
            raise SnapshotFormatError("size multiset does not sum to total_dim")


@dataclass(frozen=True)
class NewformSpace:
    q: int
    level: int
    weight: int
    char_conductor: int
    total_dim: int
    classes: tuple[NewformClass, ...]

    def summary(self) -> SpaceSummary:
        counts: dict[int, int] = {}
        for c in self.classes:
            counts[c.dim] = counts.get(c.dim, 0) + 1
        return SpaceSummary(
            q=self.q,
            total_dim=sum(c.dim for c in self.classes),
            class_count=len(self.classes),
            sizes=tuple(sorted(counts.items())),
        )


# Published reference summaries for the four spaces (dim, class count, size
# multiset).  The q = 41 row is printed ambiguously in the reference: the
# size list "(2,4),(4,5),(6,2),(4,8),(16,1),(24,2)" sums to dimension 136
# either as printed (22 classes) or with "(4,8)" read as "(8,4)" (18
# classes, matching the stated count).  Both readings are kept; validation
# reports which one the data matches instead of assuming.
TABLE2_EXPECTED: dict[int, dict] = {
    17: {"dim": 22, "classes": 6, "sizes": {2: 3, 4: 1, 6: 2}},
    41: {
        "dim": 136,
        "classes": 18,
        "sizes": None,
        "size_readings": {
            "as_printed": {2: 4, 4: 13, 6: 2, 16: 1, 24: 2},
            "transposed_8_4": {2: 4, 4: 5, 6: 2, 8: 4, 16: 1, 24: 2},
        },
    },
    89: {
        "dim": 652,
        "classes": 26,
        "sizes": {2: 4, 4: 2, 6: 4, 8: 3, 12: 2, 24: 3, 30: 1, 40: 2, 50: 1, 60: 1, 80: 1, 96: 2},
    },
    97: {
        "dim": 774,
        "classes": 29,
        "sizes": {2: 4, 4: 3, 6: 3, 8: 4, 12: 3, 20: 3, 24: 1, 32: 3, 40: 1, 48: 1, 64: 1, 168: 2},
    },
}

# Public-database coverage: classical modular form levels present for our q.
PUBLIC_LEVELS = {17: 578, 41: 3362}


@dataclass(frozen=True)
class SummaryReport:
    q: int
    ok: bool
    warnings: tuple[str, ...]
    size_reading: str | None = None  # which q=41 reading matched, if any


def validate_table2(space: NewformSpace) -> SummaryReport:
    """Compare a space against the published reference summary."""
    exp = TABLE2_EXPECTED.get(space.q)
    if exp is None:
        return SummaryReport(space.q, True, ("no reference summary for this q",))
    got = space.summary()
    warns: list[str] = []
    if got.total_dim != exp["dim"]:
        warns.append(f"total dimension {got.total_dim} != expected {exp['dim']}")
    if got.class_count != exp["classes"]:
        warns.append(f"class count {got.class_count} != expected {exp['classes']}")
    sizes = dict(got.sizes)
    reading = None
    if exp.get("sizes") is not None:
        if sizes != exp["sizes"]:
            warns.append(f"size multiset {sizes} != expected {exp['sizes']}")
    else:
        for name, mult in exp["size_readings"].items():
            if sizes == mult:
                reading = name
                break
        if reading is None:
            warns.append(f"size multiset {sizes} matches neither printed reading")
    return SummaryReport(space.q, not warns, tuple(warns), reading)


# -- exact interrogation --------------------------------------------------------


def t_value_charpoly(f: NewformClass, p: int, q: int) -> tuple[int, ...]:
    """Monic integer polynomial whose roots are the conjugates of t_{f,p}.

    Split p: the stored charpoly of a_p itself.  Inert p: the roots become
    a_p^2 + 2p; the polynomial with roots r_i^2 is extracted from
    C(y)*C(-y) = (-1)^d * G(y^2), then shifted by 2p.
    """
    data = f.coeff(p)
    if not data.exact:
        raise DataUnavailableError(f"{f.label}: only numeric data at p={p}")
    cp = data.charpoly
    if epsilon(p, q) == 1:
        return cp
    d = len(cp) - 1
    squared = _even_part(_poly_mul(cp, _poly_flip(cp)), d)
    return _poly_shift(squared, 2 * p)


def _poly_mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return tuple(out)


def _poly_flip(a: tuple[int, ...]) -> tuple[int, ...]:
    """a(-y)."""
    return tuple(c if i % 2 == 0 else -c for i, c in enumerate(a))


def _even_part(a: tuple[int, ...], d: int) -> tuple[int, ...]:
    """G with G(y^2) = (-1)^d a(y); a must have only even-degree terms."""
    sign = -1 if d % 2 else 1
    assert all(c == 0 for c in a[1::2]), "odd coefficients survived C(y)C(-y)"
    return tuple(sign * c for c in a[0::2])


def _poly_shift(a: tuple[int, ...], s: int) -> tuple[int, ...]:
    """a(x - s): roots move from r to r + s."""
    # Horner-style synthetic shift
    out = list(a)
    n = len(out)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] += -s * out[j + 1]
    return tuple(out)


def poly_eval(a: tuple[int, ...], x: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def product_norm(f: NewformClass, p: int, q: int, values) -> int:
    """Exact integer Norm of prod_{a in values} (a - t_{f,p}) over the coefficient field.

    Prefers the exact charpoly route; numeric embeddings are used only when
    that is all the data offers, with rigorous rounding (refuse unless the
    accumulated error bound stays below 1/2).
    """
    vals = sorted(set(values))
    if not vals:
        return 1
    data = f.coeff(p)
    if data.exact:
        tpoly = t_value_charpoly(f, p, q)
        out = 1
        for a in vals:
            out *= poly_eval(tpoly, a)
        return out
    return _product_norm_numeric(data, p, q, vals, f.dim, f.label)


def _product_norm_numeric(
    data: CoeffData, p: int, q: int, vals: list[int], dim: int, label: str
) -> int:
    if len(data.embeddings) != dim:
        raise SnapshotFormatError(f"{label}: embedding count != dim")
    inert = epsilon(p, q) == -1
    acc_re, acc_im, acc_rad = 1.0, 0.0, 0.0
    for re, im in data.embeddings:
        rad = data.err
        if inert:
            # t = a^2 + 2p with error |2a|*err + err^2
            mag = (re * re + im * im) ** 0.5
            re, im = re * re - im * im + 2 * p, 2 * re * im
            rad = 2 * mag * data.err + data.err**2
        for a in vals:
            # multiply (acc) by (a - t)
            tre, tim = a - re, -im
            tmag = (tre * tre + tim * tim) ** 0.5
            amag = (acc_re * acc_re + acc_im * acc_im) ** 0.5
            acc_re, acc_im = acc_re * tre - acc_im * tim, acc_re * tim + acc_im * tre
            acc_rad = acc_rad * tmag + amag * rad + acc_rad * rad
    if acc_rad >= 0.5 or abs(acc_im) > acc_rad:
        import math as _math

        need = max(0.0, _math.log10(max(acc_rad, abs(acc_im)) / 0.5))
        raise PrecisionError(
            f"{label}: cannot round norm at p={p}: error bound {acc_rad:.3g}, "
            f"imaginary part {acc_im:.3g}; need ~{need:.0f} more decimal digits"
        )
    nearest = round(acc_re)
    if abs(acc_re - nearest) > acc_rad:
        raise PrecisionError(f"{label}: norm at p={p} not within {acc_rad:.3g} of an integer")
    return nearest


# -- snapshot file format ---------------------------------------------------------


def _encode_int(n: int):
    return n if abs(n) < _JSON_INT_LIMIT else str(n)


def _decode_int(x) -> int:
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        return int(x)
    raise SnapshotFormatError(f"expected integer, got {type(x).__name__}")


def space_to_dict(space: NewformSpace) -> dict:
    return {
        "q": space.q,
        "level": space.level,
        "weight": space.weight,
        "char_conductor": space.char_conductor,
        "total_dim": space.total_dim,
        "classes": [
            {
                "label": c.label,
                "dim": c.dim,
                "ap": {
                    str(p): (
                        {"charpoly": [_encode_int(x) for x in cd.charpoly]}
                        if cd.exact
                        else {"embeddings": [list(e) for e in cd.embeddings], "err": cd.err}
                    )
                    for p, cd in sorted(c.ap_data.items())
                },
            }
            for c in space.classes
        ],
    }


def space_from_dict(doc: dict) -> NewformSpace:
    try:
        q = int(doc["q"])
        level = int(doc["level"])
        weight = int(doc["weight"])
        char_conductor = int(doc["char_conductor"])
        total_dim = int(doc["total_dim"])
        raw_classes = doc["classes"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotFormatError(f"malformed snapshot: {exc}") from exc
    if level != 2 * q * q:
        raise SnapshotFormatError(f"level {level} != 2*q^2 = {2 * q * q}")
    if weight != 2:
        raise SnapshotFormatError(f"weight {weight} != 2")
    if char_conductor != q:
        raise SnapshotFormatError(f"char_conductor {char_conductor} != q = {q}")
    classes = []
    for rc in raw_classes:
        ap: dict[int, CoeffData] = {}
        for key, entry in rc.get("ap", {}).items():
            p = int(key)
            if "charpoly" in entry:
                coeffs = tuple(_decode_int(x) for x in entry["charpoly"])
                if len(coeffs) != rc["dim"] + 1:
                    raise SnapshotFormatError(
                        f"{rc.get('label')}: charpoly degree {len(coeffs)-1} != dim {rc['dim']}"
                    )
                ap[p] = CoeffData(charpoly=coeffs)
            elif "embeddings" in entry:
                embs = tuple((float(a), float(b)) for a, b in entry["embeddings"])
                ap[p] = CoeffData(embeddings=embs, err=float(entry.get("err", 0.0)))
            else:
                raise SnapshotFormatError(f"{rc.get('label')}: entry at p={key} has no data")
        classes.append(
            NewformClass(
                label=str(rc["label"]),
                level=level,
                char_conductor=char_conductor,
                dim=int(rc["dim"]),
                ap_data=ap,
            )
        )
    space = NewformSpace(
        q=q,
        level=level,
        weight=weight,
        char_conductor=char_conductor,
        total_dim=total_dim,
        classes=tuple(classes),
    )
    if sum(c.dim for c in classes) != total_dim:
        raise SnapshotFormatError(
            f"sum of class dims {sum(c.dim for c in classes)} != total_dim {total_dim}"
        )
    return space


def write_snapshot(path: str, space: NewformSpace) -> None:
    doc = space_to_dict(space)
    doc["_meta"] = {"sha256": content_hash(space)}
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def load_snapshot(path: str) -> NewformSpace:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    meta = doc.pop("_meta", None)
    space = space_from_dict(doc)
    if meta and "sha256" in meta and meta["sha256"] != content_hash(space):
        raise SnapshotFormatError(f"{path}: content hash mismatch")
    return space


def content_hash(space: NewformSpace) -> str:
    blob = json.dumps(space_to_dict(space), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# -- acquisition orchestration ------------------------------------------------------


def default_cache_dir() -> str:
    env = os.environ.get("LEBNAG_CACHE_DIR")
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "lebnag")


def _cache_path(cache_dir: str, q: int) -> str:
    return os.path.join(cache_dir, f"space_q{q}_level{2 * q * q}.json")


def bundled_snapshot_path(q: int) -> str | None:
    """Path of the snapshot shipped with the package, if any."""
    here = os.path.dirname(__file__)
    path = os.path.join(here, "data", f"snapshot_q{q}.json")
    return path if os.path.exists(path) else None


def fetch_space(
    q: int,
    *,
    snapshot_path: str | None = None,
    cache_dir: str | None = None,
    offline: bool = False,
    client=None,
    strict_summary: bool = False,
) -> NewformSpace:
    """Obtain the newform space for q: snapshot > cache > bundled data > network.

    For q in {89, 97} the public database does not carry the level, so
    without a snapshot (or previously cached data) this fails with
    DataUnavailableError telling the caller to supply one.  Larger q are
    accepted only through an explicit snapshot (no reference summary is
    known for them, so validation degrades to a structural check).
    """
    space = None
    if snapshot_path:
        space = load_snapshot(snapshot_path)
        if space.q != q:
            raise SnapshotFormatError(f"snapshot is for q={space.q}, requested q={q}")
    elif q not in TABLE2_EXPECTED:
        raise DataUnavailableError(
            f"q={q} is outside the packaged set; supply a snapshot file to use it"
        )
    if space is None:
        cdir = cache_dir or default_cache_dir()
        cpath = _cache_path(cdir, q)
        if os.path.exists(cpath):
            space = load_snapshot(cpath)
    if space is None:
        bundled = bundled_snapshot_path(q)
        if bundled:
            space = load_snapshot(bundled)
    if space is None:
        if q not in PUBLIC_LEVELS:
            raise DataUnavailableError(
                f"coverage unavailable: the public database does not carry level "
                f"{2 * q * q} (q={q}); provide a snapshot file (--snapshot)"
            )
        if offline:
            raise DataUnavailableError(
                f"offline mode and no cached/bundled data for q={q}"
            )
        from .lmfdb_client import LmfdbClient

        space = (client or LmfdbClient()).fetch_space(q)
        cdir = cache_dir or default_cache_dir()
        os.makedirs(cdir, exist_ok=True)
        write_snapshot(_cache_path(cdir, q), space)
    report = validate_table2(space)
    if not report.ok:
        msg = f"q={q} summary mismatch: " + "; ".join(report.warnings)
        if strict_summary:
            raise SnapshotFormatError(msg)
        warnings.warn(msg, stacklevel=2)
    return space
