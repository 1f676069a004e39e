"""Exact arithmetic in the ring of integers O of M = Q(sqrt(q)), q in {17, 41, 89, 97}.

Elements are stored as (u + v*sqrt(q))/2 with integer u, v of equal parity,
which is all of O since q = 1 (mod 4).  All four supported q are 1 (mod 8),
so the rational prime 2 splits; a distinguished generator `gamma` of one of
the two primes above 2 is provided, normalised so that

    gamma * conj(gamma) = -2,
    conj(gamma) = -1  (mod gamma^2),
    sqrt(q)     = -1  (mod gamma^2).

Everything here is pure integer arithmetic; no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .local_arith import ResidueElt

SUPPORTED_Q = (17, 41, 89, 97)


def _check_q(q: int) -> None:
    if q not in SUPPORTED_Q:
        raise ValueError(f"unsupported field: q={q} (supported: {SUPPORTED_Q})")


@dataclass(frozen=True)
class QuadInt:
    """The element (u + v*sqrt(q))/2 of O, with u = v (mod 2)."""

    q: int
    u: int
    v: int

    def __post_init__(self) -> None:
        _check_q(self.q)
        if (self.u - self.v) % 2 != 0:
            raise ValueError(f"parity violation: ({self.u} + {self.v}*sqrt(q))/2 is not integral")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_int(q: int, n: int) -> QuadInt:
        return QuadInt(q, 2 * n, 0)

    @staticmethod
    def sqrt_q(q: int) -> QuadInt:
        return QuadInt(q, 0, 2)

    # -- ring operations ---------------------------------------------------

    def _coerce(self, other: QuadInt | int) -> QuadInt:
        if isinstance(other, int):
            return QuadInt.from_int(self.q, other)
        if other.q != self.q:
            raise ValueError(f"mixed fields: q={self.q} vs q={other.q}")
        return other

    def __add__(self, other: QuadInt | int) -> QuadInt:
        o = self._coerce(other)
        return QuadInt(self.q, self.u + o.u, self.v + o.v)

    __radd__ = __add__

    def __sub__(self, other: QuadInt | int) -> QuadInt:
        o = self._coerce(other)
        return QuadInt(self.q, self.u - o.u, self.v - o.v)

    def __rsub__(self, other: QuadInt | int) -> QuadInt:
        return self._coerce(other) - self

    def __neg__(self) -> QuadInt:
        return QuadInt(self.q, -self.u, -self.v)

    def __mul__(self, other: QuadInt | int) -> QuadInt:
        if isinstance(other, int):
            return QuadInt(self.q, self.u * other, self.v * other)
        o = self._coerce(other)
        # ((u1+v1 s)/2)((u2+v2 s)/2) = ((u1u2+q v1v2) + (u1v2+u2v1) s)/4, s = sqrt(q)
        return QuadInt(
            self.q,
            (self.u * o.u + self.q * self.v * o.v) // 2,
            (self.u * o.v + self.v * o.u) // 2,
        )

    __rmul__ = __mul__

    def __pow__(self, n: int) -> QuadInt:
        if n < 0:
            return self.unit_inverse() ** (-n)
        result = QuadInt.from_int(self.q, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self) -> QuadInt:
        return QuadInt(self.q, self.u, -self.v)

    def norm(self) -> int:
        return (self.u * self.u - self.q * self.v * self.v) // 4

    def trace(self) -> int:
        return self.u

    def is_zero(self) -> bool:
        return self.u == 0 and self.v == 0

    def is_unit(self) -> bool:
        return abs(self.norm()) == 1

    def unit_inverse(self) -> QuadInt:
        """Inverse of a unit: conj(a)/norm(a) with norm(a) = +-1."""
        n = self.norm()
        if abs(n) != 1:
            raise ValueError(f"not a unit (norm {n})")
        c = self.conj()
        return c if n == 1 else -c

    def __repr__(self) -> str:
        return f"({self.u}{self.v:+}*sqrt{self.q})/2"


# -- divisibility ----------------------------------------------------------


def exact_div(a: QuadInt, b: QuadInt) -> QuadInt:
    """a/b in O; raises ValueError if b does not divide a."""
    if b.is_zero():
        raise ValueError("division by zero")
    n = b.norm()
    t = a * b.conj()  # a/b = t/n
    if t.u % n or t.v % n:
        raise ValueError(f"{b!r} does not divide {a!r}")
    u, v = t.u // n, t.v // n
    if (u - v) % 2 != 0:
        raise ValueError(f"{b!r} does not divide {a!r}")
    return QuadInt(a.q, u, v)


def divides(b: QuadInt, a: QuadInt) -> bool:
    """True iff b | a in O (b nonzero)."""
    if b.is_zero():
        raise ValueError("zero divisor test")
    n = b.norm()
    t = a * b.conj()
    return t.u % n == 0 and t.v % n == 0 and ((t.u // n) - (t.v // n)) % 2 == 0


def congruent_mod(a: QuadInt, b: QuadInt | int, m: QuadInt) -> bool:
    """True iff m | (a - b) in O."""
    if m.is_zero():
        raise ValueError("zero modulus")
    return divides(m, a - (b if isinstance(b, QuadInt) else QuadInt.from_int(a.q, b)))


# -- distinguished constants ----------------------------------------------

# Fundamental unit of Z[sqrt(q)] from the continued-fraction expansion of
# sqrt(q).  For q = 1 (mod 8) no unit of O has odd half-coordinates
# (u^2 - q v^2 = +-4 with u, v odd is impossible mod 8), so this is the
# fundamental unit of O itself.  Verified against a continued-fraction
# oracle in the test suite.
_FUNDAMENTAL_UNITS = {
    17: (4, 1),
    41: (32, 5),
    89: (500, 53),
    97: (5604, 569),
}

# Generator of one of the two primes above 2, normalised as in the module
# docstring (norm -2 and the two congruences mod gamma^2).
_GAMMAS = {
    17: (-3, 1),
    41: (-19, -3),
    89: (9, 1),
    97: (325, 33),
}


@dataclass(frozen=True)
class FieldConstants:
    """Distinguished constants of M: fundamental unit and the prime-above-2 generator."""

    q: int
    delta: QuadInt
    gamma: QuadInt
    gamma_bar: QuadInt


@lru_cache(maxsize=None)
def fundamental_unit(q: int) -> QuadInt:
    _check_q(q)
    a, b = _FUNDAMENTAL_UNITS[q]
    return QuadInt(q, 2 * a, 2 * b)


@lru_cache(maxsize=None)
def constants(q: int) -> FieldConstants:
    _check_q(q)
    gu, gv = _GAMMAS[q]
    gamma = QuadInt(q, gu, gv)
    return FieldConstants(q=q, delta=fundamental_unit(q), gamma=gamma, gamma_bar=gamma.conj())


# -- prime ideals ----------------------------------------------------------


def _legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p) for odd prime p."""
    a %= p
    if a == 0:
        return 0
    t = pow(a, (p - 1) // 2, p)
    return 1 if t == 1 else -1


@dataclass(frozen=True)
class PrimeIdealM:
    """A prime of M above the rational prime p.

    kind is one of "split", "inert", "ramified".  For an odd split p, `root`
    is the chosen r in [0, p) with r^2 = q (mod p); the two primes above p
    correspond to the two roots, and the canonical prime takes the smaller.
    For p = 2 (always split here) the prime is pinned by its generator
    (gamma or its conjugate) and `root` holds the matching 2-adic root of q
    mod 4, which is what the residue map needs.
    """

    q: int
    p: int
    kind: str
    root: int | None = None
    generator: QuadInt | None = None

    @property
    def degree(self) -> int:
        return 2 if self.kind == "inert" else 1

    def norm(self) -> int:
        return self.p ** self.degree

    def residue_one(self) -> ResidueElt:
        return ResidueElt.one(self.p, self.degree, self.q % self.p)

    def residue(self, a: int, b: int = 0) -> ResidueElt:
        return ResidueElt(self.p, self.degree, a % self.p, b % self.p, self.q % self.p)

    def __repr__(self) -> str:
        if self.kind == "inert":
            return f"({self.p})"
        if self.kind == "ramified":
            return f"(sqrt{self.q})"
        if self.p == 2:
            side = "gamma" if divides(self.generator, constants(self.q).gamma) else "gamma_bar"
            return f"(2,{side})"
        return f"({self.p},r={self.root})"


def primes_above(q: int, p: int) -> tuple[PrimeIdealM, ...]:
    """The primes of M above p; for split p the smaller-root prime comes first."""
    _check_q(q)
    if p == q:
        return (PrimeIdealM(q, p, "ramified", root=0),)
    if p == 2:
        # q = 1 (mod 8): 2 splits as (gamma)(gamma_bar).  The 2-adic root
        # r of q matching (gamma) satisfies u + v*r = 0 (mod 4) for
        # gamma = (u + v*sqrt(q))/2; v is odd for all four stored gammas.
        c = constants(q)
        out = []
        for gen in (c.gamma, c.gamma_bar):
            vinv = pow(gen.v % 4, -1, 4)
            r4 = (-gen.u * vinv) % 4
            out.append(PrimeIdealM(q, 2, "split", root=r4, generator=gen))
        return tuple(out)
    if _legendre(q, p) == 1:
        r = min(_sqrt_mod(q, p), p - _sqrt_mod(q, p))
        return (
            PrimeIdealM(q, p, "split", root=r),
            PrimeIdealM(q, p, "split", root=p - r),
        )
    return (PrimeIdealM(q, p, "inert"),)


def _sqrt_mod(a: int, p: int) -> int:
    """A square root of a mod odd prime p (Tonelli-Shanks; p is small here)."""
    a %= p
    if a == 0:
        return 0
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    s, e = p - 1, 0
    while s % 2 == 0:
        s //= 2
        e += 1
    n = 2
    while _legendre(n, p) != -1:
        n += 1
    x = pow(a, (s + 1) // 2, p)
    b = pow(a, s, p)
    g = pow(n, s, p)
    r = e
    while True:
        t, m = b, 0
        while t != 1:
            t = t * t % p
            m += 1
        if m == 0:
            return x
        gs = pow(g, 1 << (r - m - 1), p)
        g = gs * gs % p
        x = x * gs % p
        b = b * g % p
        r = m


def val_at(a: QuadInt, prime: PrimeIdealM) -> int:
    """The prime-adic valuation of a nonzero a at `prime`.  Exact."""
    if a.is_zero():
        raise ValueError("valuation of zero is infinite")
    if a.q != prime.q:
        raise ValueError("element and prime belong to different fields")
    p = prime.p
    if prime.kind == "inert":
        # O tensor Z_p is the unramified quadratic extension: the valuation
        # is the p-content of the coordinates.
        return min(
            _int_val(a.u, p) if a.u else 10**9,
            _int_val(a.v, p) if a.v else 10**9,
        )
    if prime.kind == "ramified":
        # uniformiser sqrt(q); ord(u) = 2*ord_q(u), ord(v*sqrt(q)) is odd,
        # so the minimum is never ambiguous.
        vals = []
        if a.u:
            vals.append(2 * _int_val(a.u, p))
        if a.v:
            vals.append(1 + 2 * _int_val(a.v, p))
        return min(vals)
    if p == 2:
        # Divide out the explicit generator.
        gen = prime.generator
        count = 0
        x = a
        while divides(gen, x):
            x = exact_div(x, gen)
            count += 1
        return count
    # odd split prime: strip rational p-content, then at most one of the two
    # conjugate primes can divide what is left.
    c = min(_int_val(a.u, p) if a.u else 10**9, _int_val(a.v, p) if a.v else 10**9)
    u, v = a.u // p**c, a.v // p**c
    inv2 = pow(2, -1, p)
    if (u + v * prime.root) * inv2 % p != 0:
        return c
    rest = QuadInt(a.q, u, v)
    return c + _int_val(rest.norm(), p)


def _int_val(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def reduce_mod(a: QuadInt, prime: PrimeIdealM) -> ResidueElt:
    """Image of a in the residue field of `prime`.

    Split/ramified primes reduce into F_p (sqrt(q) maps to the chosen root,
    or to 0 at the ramified prime); inert primes reduce into F_{p^2} with
    sqrt(q) mapping to the adjoined square root.
    """
    if a.q != prime.q:
        raise ValueError("element and prime belong to different fields")
    p = prime.p
    if prime.kind == "inert":
        inv2 = pow(2, -1, p)
        return prime.residue(a.u * inv2, a.v * inv2)
    if p == 2:
        t = (a.u + a.v * prime.root) % 4
        return prime.residue(t // 2)
    inv2 = pow(2, -1, p)
    return prime.residue((a.u + a.v * prime.root) * inv2)
