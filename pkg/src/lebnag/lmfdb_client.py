"""HTTP client for the public LMFDB REST API (classical modular forms).

Wire format assumed (the generic table API):

    GET {base}/api/mf_newforms/?level=i{level}&weight=i2&char_conductor=i{q}
        &char_order=i2&_format=json&_fields=label,dim,hecke_orbit_code
    GET {base}/api/mf_hecke_charpolys/?hecke_orbit_code=i{code}&p=i{p}
        &_format=json&_fields=p,charpoly_factorization

Responses carry {"data": [...]}.  `charpoly_factorization` is a list of
[coefficient_list, exponent] pairs (coefficients little-endian); the charpoly
of a_p is the expanded product.  The base URL and table names are
overridable, both for tests (a local stub) and for upstream schema drift.

The character is matched semantically: quadratic (order 2) of conductor q.
Requests are rate limited and retried; cache writes happen in the caller
(`newforms.fetch_space`) via atomic replace, so an interrupted fetch never
leaves a partial cache entry.
"""

from __future__ import annotations

import time

import requests

from .newforms import (
    CoeffData,
    DataUnavailableError,
    NewformClass,
    NewformSpace,
    PUBLIC_LEVELS,
)

DEFAULT_BASE = "https://www.lmfdb.org"
DEFAULT_PRIMES = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


class LmfdbClient:
    def __init__(
        self,
        base_url: str = DEFAULT_BASE,
        *,
        min_interval: float = 0.5,
        retries: int = 3,
        timeout: float = 30.0,
        session: requests.Session | None = None,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.min_interval = min_interval
        self.retries = retries
        self.timeout = timeout
        self.session = session or requests.Session()
        self._last_request = 0.0

    # -- low level ---------------------------------------------------------

    def _get(self, table: str, **query) -> list[dict]:
        url = f"{self.base_url}/api/{table}/"
        params = {"_format": "json"}
        for key, val in query.items():
            if key.startswith("_"):
                params[key] = val
            else:
                params[key] = f"i{val}" if isinstance(val, int) else val
        out: list[dict] = []
        offset = 0
        while True:
            page = dict(params)
            if offset:
                page["_offset"] = offset
            data = self._request_json(url, page)
            rows = data.get("data", [])
            out.extend(rows)
            if len(rows) < 100:  # API page size
                return out
            offset += len(rows)

    def _request_json(self, url: str, params: dict) -> dict:
        last_exc: Exception | None = None
        for attempt in range(self.retries):
            wait = self._last_request + self.min_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()
            try:
                resp = self.session.get(url, params=params, timeout=self.timeout)
                resp.raise_for_status()
                return resp.json()
            except (requests.RequestException, ValueError) as exc:
                last_exc = exc
                time.sleep(self.min_interval * (attempt + 1))
        raise DataUnavailableError(f"request failed after {self.retries} tries: {last_exc}")

    # -- assembly ------------------------------------------------------------

    def fetch_space(self, q: int, primes: tuple[int, ...] = DEFAULT_PRIMES) -> NewformSpace:
        level = PUBLIC_LEVELS.get(q, 2 * q * q)
        rows = self._get(
            "mf_newforms",
            level=level,
            weight=2,
            char_conductor=q,
            char_order=2,
            _fields="label,dim,hecke_orbit_code",
        )
        if not rows:
            raise DataUnavailableError(f"no newform classes returned for level {level}")
        classes = []
        for row in sorted(rows, key=lambda r: str(r.get("label"))):
            code = row["hecke_orbit_code"]
            dim = int(row["dim"])
            ap: dict[int, CoeffData] = {}
            cps = self._get(
                "mf_hecke_charpolys",
                hecke_orbit_code=code,
                _fields="p,charpoly_factorization",
            )
            for entry in cps:
                p = int(entry["p"])
                if p not in primes:
                    continue
                coeffs = _expand_factorization(entry["charpoly_factorization"])
                if len(coeffs) - 1 != dim:
                    raise DataUnavailableError(
                        f"{row['label']}: charpoly degree {len(coeffs) - 1} != dim {dim} at p={p}"
                    )
                ap[p] = CoeffData(charpoly=coeffs)
            classes.append(
                NewformClass(
                    label=str(row["label"]),
                    level=level,
                    char_conductor=q,
                    dim=dim,
                    ap_data=ap,
                )
            )
        return NewformSpace(
            q=q,
            level=level,
            weight=2,
            char_conductor=q,
            total_dim=sum(c.dim for c in classes),
            classes=tuple(classes),
        )


def _expand_factorization(fact) -> tuple[int, ...]:
    """[[coeffs, exponent], ...] -> expanded monic coefficient tuple."""
    poly = (1,)
    for coeffs, exponent in fact:
        base = tuple(int(c) for c in coeffs)
        for _ in range(int(exponent)):
            poly = _mul(poly, base)
    return poly


def _mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return tuple(out)
