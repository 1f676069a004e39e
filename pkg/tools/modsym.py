"""Weight-2 modular symbols over Q with a real (quadratic or trivial) character.

Dev-side generator for the packaged newform snapshots.  Not part of the
installable package: the library only ingests coefficient data.

Pipeline per level N and character chi (values +-1):

  P^1(Z/N) Manin symbols -> 2-term (S) and 3-term (T) relations ->
  quotient presentation of the modular symbol space M ->
  +1 eigenspace M+ of the star involution (sparse kernel with a
  distinguished-coordinate basis, so coordinates are plain readoffs) ->
  Hecke operators T_ell (ell coprime to N) via the Merel family ->
  charpoly of a splitting operator (exact Hessenberg for small spaces,
  multimodular Hessenberg + CRT for large ones; eigenvalues are bounded by
  Hasse plus the two Eisenstein values, so the coefficient bound is a
  priori) -> drop the Eisenstein factors and the factors matching
  lower-level (old) classes -> kernels of the kept factors (exact for small
  spaces, multimodular + rational reconstruction + exact verification for
  large ones) -> refine until Hecke-irreducible -> per-class exact
  charpolys of a_ell.

numpy only ever does mod-p arithmetic whose consequences are verified
exactly afterwards (subspace invariance and restriction identities are
checked over Q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy

Vec = dict[int, Fraction]


# ---------------------------------------------------------------------------
# P^1(Z/N)
# ---------------------------------------------------------------------------


def p1_normalize(N: int, u: int, v: int) -> tuple[int, int, int]:
    """Canonical representative (u', v') of (u:v) and a unit s with s*(u,v) = (u',v')."""
    u %= N
    v %= N
    if N == 1:
        return 0, 0, 1
    if math.gcd(math.gcd(u, v), N) != 1:
        raise ValueError(f"({u}:{v}) is not a point of P^1(Z/{N})")
    if u == 0:
        return 0, 1, pow(v, -1, N)
    g = math.gcd(u, N)
    u1 = u // g
    M = N // g
    s = pow(u1 % M, -1, M) if M > 1 else 1
    for k in range(g):
        cand = s + k * M
        if math.gcd(cand, N) == 1:
            s = cand
            break
    v2 = v * s % N
    if g > 1:
        best, best_t = v2, 1
        for k in range(1, g):
            t = 1 + k * M
            if math.gcd(t, N) != 1:
                continue
            cand = v2 * t % N
            if cand < best:
                best, best_t = cand, t
        v2 = best
        s = s * best_t % N
    return g, v2, s


class P1List:
    def __init__(self, N: int):
        self.N = N
        seen: dict[tuple[int, int], int] = {}
        items: list[tuple[int, int]] = []

        def add(u, v):
            if math.gcd(math.gcd(u, v), N) != 1:
                return
            key = p1_normalize(N, u, v)[:2]
            if key not in seen:
                seen[key] = len(items)
                items.append(key)

        add(0, 1)
        for v in range(N):
            add(1, v)
        for g in _divisors(N):
            if g > 1:
                for v in range(N):
                    add(g, v)
        self.items = items
        self.index = seen
        psi = N
        for p in _prime_divisors(N):
            psi = psi // p * (p + 1)
        assert len(items) == psi, f"|P1({N})| = {len(items)} != psi(N) = {psi}"

    def lookup(self, u: int, v: int) -> tuple[int, int]:
        uc, vc, s = p1_normalize(self.N, u, v)
        return self.index[(uc, vc)], s


def _divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def _prime_divisors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------


def quadratic_character(q: int):
    def chi(x: int) -> int:
        x %= q
        if x == 0:
            return 0
        return 1 if pow(x, (q - 1) // 2, q) == 1 else -1

    chi.conductor = q
    return chi


def trivial_character():
    def chi(x: int) -> int:
        return 1

    chi.conductor = 1
    return chi


# ---------------------------------------------------------------------------
# sparse elimination (shared by the presentation and the star kernel)
# ---------------------------------------------------------------------------


def sparse_eliminate(rows: list[Vec], ncols: int):
    """Return (resolved, free): resolved maps an eliminated column to its
    expression over *positions in the free list*."""
    import heapq

    rows = [dict(r) for r in rows]
    col_rows: dict[int, set[int]] = {}
    for i, r in enumerate(rows):
        for c in r:
            col_rows.setdefault(c, set()).add(i)
    solved: dict[int, Vec] = {}
    active = set(range(len(rows)))
    heap = [(len(r), i) for i, r in enumerate(rows)]
    heapq.heapify(heap)
    while heap:
        _, i = heapq.heappop(heap)
        if i not in active:
            continue
        row = rows[i]
        active.discard(i)
        if not row:
            continue
        pivot = min(row, key=lambda c: (abs(row[c]) != 1, len(col_rows.get(c, ())), c))
        pval = row[pivot]
        expr = {c: -v / pval for c, v in row.items() if c != pivot}
        solved[pivot] = expr
        for j in list(col_rows.get(pivot, ())):
            if j == i or j not in active:
                continue
            rj = rows[j]
            coeff = rj.pop(pivot, None)
            if coeff is None:
                continue
            for c, v in expr.items():
                nv = rj.get(c, Fraction(0)) + coeff * v
                if nv:
                    rj[c] = nv
                    col_rows.setdefault(c, set()).add(j)
                else:
                    rj.pop(c, None)
            heapq.heappush(heap, (len(rj), j))
        col_rows.pop(pivot, None)

    free = [c for c in range(ncols) if c not in solved]
    free_pos = {c: k for k, c in enumerate(free)}
    resolved: dict[int, Vec] = {}
    import sys

    sys.setrecursionlimit(max(10**4, 4 * ncols))

    def resolve(c: int) -> Vec:
        if c in free_pos:
            return {free_pos[c]: Fraction(1)}
        got = resolved.get(c)
        if got is not None:
            return got
        out: Vec = {}
        for c2, v in solved[c].items():
            for k, w in resolve(c2).items():
                nv = out.get(k, Fraction(0)) + v * w
                if nv:
                    out[k] = nv
                else:
                    out.pop(k, None)
        resolved[c] = out
        return out

    for c in list(solved):
        resolve(c)
    return resolved, free


# ---------------------------------------------------------------------------
# the Manin symbol quotient space
# ---------------------------------------------------------------------------


@dataclass
class ManinSpace:
    N: int
    chi: object
    p1: P1List
    reps: list[int]
    dim: int
    expr_table: list[Vec]

    def expr(self, u: int, v: int) -> Vec:
        idx, s = self.p1.lookup(u, v)
        sign = self.chi(s)
        base = self.expr_table[idx]
        if sign == 1:
            return base
        return {k: sign * val for k, val in base.items()}


def build_space(N: int, chi) -> ManinSpace:
    p1 = P1List(N)
    n = len(p1.items)

    parent = list(range(n))
    psign = [1] * n
    dead = [False] * n

    def find(i):
        s = 1
        while parent[i] != i:
            s *= psign[i]
            i = parent[i]
        return i, s

    # 2-term relations x + chi(s) x_S = 0
    for i, (u, v) in enumerate(p1.items):
        j, s = p1.lookup(v, -u)
        sgn = chi(s)
        ri, si = find(i)
        rj, sj = find(j)
        if ri == rj:
            if si + sgn * sj != 0:
                dead[ri] = True
            continue
        parent[rj] = ri
        psign[rj] = -si * sgn * sj
        if dead[rj]:
            dead[ri] = True

    roots = sorted(i for i in range(n) if parent[i] == i)
    root_col = {r: k for k, r in enumerate(roots)}

    def sym_vec(u, v) -> Vec:
        idx, s = p1.lookup(u, v)
        sgn = chi(s)
        r, s2 = find(idx)
        if dead[r]:
            return {}
        return {root_col[r]: Fraction(sgn * s2)}

    # 3-term relations x + x_T + x_{T^2} = 0
    rows: list[Vec] = []
    seen = set()
    for i, (u, v) in enumerate(p1.items):
        j1 = p1.lookup(v, -u - v)[0]
        j2 = p1.lookup(-u - v, u)[0]
        key = tuple(sorted((i, j1, j2)))
        if key in seen:
            continue
        seen.add(key)
        row: Vec = {}
        for (uu, vv) in ((u, v), (v, -u - v), (-u - v, u)):
            for c, val in sym_vec(uu, vv).items():
                nv = row.get(c, Fraction(0)) + val
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
        if row:
            rows.append(row)
    for r in roots:
        if dead[r]:
            rows.append({root_col[r]: Fraction(1)})

    resolved, free = sparse_eliminate(rows, len(roots))
    free_pos = {c: k for k, c in enumerate(free)}

    def root_expr(col: int) -> Vec:
        if col in free_pos:
            return {free_pos[col]: Fraction(1)}
        return resolved.get(col, {})

    expr_table: list[Vec] = []
    for i in range(n):
        r, s2 = find(i)
        if dead[r]:
            expr_table.append({})
            continue
        base = root_expr(root_col[r])
        expr_table.append(base if s2 == 1 else {k: s2 * v for k, v in base.items()})

    return ManinSpace(
        N=N, chi=chi, p1=p1, reps=[roots[c] for c in free], dim=len(free),
        expr_table=expr_table,
    )


# ---------------------------------------------------------------------------
# operators as sparse columns over the quotient basis
# ---------------------------------------------------------------------------


def star_columns(space: ManinSpace) -> list[Vec]:
    cols = []
    for rep in space.reps:
        u, v = space.p1.items[rep]
        cols.append(dict(space.expr(-u, v)))
    return cols


@lru_cache(maxsize=None)
def merel_family(ell: int) -> tuple[tuple[int, int, int, int], ...]:
    """Integral [a,b;c,d] with det = ell, a > b >= 0, d > c >= 0."""
    out = []
    for a in range(1, ell + 1):
        for b in range(a):
            cmax = (ell - 1) // (a - b)
            for c in range(cmax + 1):
                num = ell + b * c
                if num % a:
                    continue
                d = num // a
                if d > c:
                    out.append((a, b, c, d))
    return tuple(out)


def hecke_columns(space: ManinSpace, ell: int) -> list[Vec]:
    if math.gcd(ell, space.N) != 1:
        raise ValueError("only primes away from the level are used")
    fam = merel_family(ell)
    cols = []
    for rep in space.reps:
        u, v = space.p1.items[rep]
        acc: Vec = {}
        for (a, b, c, d) in fam:
            uu = (u * a + v * c) % space.N
            vv = (u * b + v * d) % space.N
            if math.gcd(math.gcd(uu, vv), space.N) != 1:
                continue
            for k, val in space.expr(uu, vv).items():
                nv = acc.get(k, Fraction(0)) + val
                if nv:
                    acc[k] = nv
                else:
                    acc.pop(k, None)
        cols.append(acc)
    return cols


# ---------------------------------------------------------------------------
# M+ with a readoff basis
# ---------------------------------------------------------------------------


@dataclass
class PlusSpace:
    N: int
    chi: object
    dim: int
    ops: dict[int, list[list[Fraction]]]

    def eisenstein_values(self, ell: int) -> tuple[int, int]:
        c = self.chi(ell)
        return (1 + ell * c, c + ell)

    def hasse_eis_bound(self, ell: int) -> float:
        return max(2 * math.sqrt(ell), float(ell + 1)) + 1


def build_plus_space(N: int, chi, ells, verbose: bool = False) -> PlusSpace:
    space = build_space(N, chi)
    if verbose:
        print(f"  level {N}: |P1| = {len(space.p1.items)}, dim M = {space.dim}")
    d = space.dim
    scols = star_columns(space)
    # equations for ker(star - 1): for each row i: sum_j star[i][j] x_j - x_i = 0
    eq_rows: dict[int, Vec] = {}
    for j, col in enumerate(scols):
        for i, v in col.items():
            eq_rows.setdefault(i, {})[j] = eq_rows.get(i, {}).get(j, Fraction(0)) + v
    rows = []
    for i in range(d):
        row = dict(eq_rows.get(i, {}))
        row[i] = row.get(i, Fraction(0)) - 1
        if not row[i]:
            del row[i]
        if row:
            rows.append(row)
    resolved, free = sparse_eliminate(rows, d)
    K = len(free)
    if verbose:
        print(f"  dim M+ = {K}")
    free_list = list(free)

    # basis column k: unit at free_list[k], resolved elsewhere; coordinates of
    # any vector in the span are its entries at the free rows (readoff).
    def basis_entry(row: int, k: int) -> Fraction:
        if row in resolved:
            return resolved[row].get(k, Fraction(0))
        return Fraction(int(row == free_list[k]))

    basis_dense = [[basis_entry(i, k) for k in range(K)] for i in range(d)]

    ops: dict[int, list[list[Fraction]]] = {}
    for ell in ells:
        cols = hecke_columns(space, ell)
        mat = [[Fraction(0)] * K for _ in range(K)]
        for k in range(K):
            # image of basis vector k under T_ell
            img: Vec = {}
            for i in range(d):
                x = basis_dense[i][k]
                if x:
                    for r, v in cols[i].items():
                        nv = img.get(r, Fraction(0)) + x * v
                        if nv:
                            img[r] = nv
                        else:
                            img.pop(r, None)
            # coordinates = readoff at free rows
            for kk, fr in enumerate(free_list):
                val = img.get(fr)
                if val:
                    mat[kk][k] = val
            # exact spot-verification on a few non-free rows:
            # img must equal sum_c mat[c][k] * basis_col_c
            for i in list(resolved)[:3]:
                s = Fraction(0)
                for c in range(K):
                    if mat[c][k]:
                        b = basis_entry(i, c)
                        if b:
                            s += mat[c][k] * b
                if s != img.get(i, Fraction(0)):
                    raise ArithmeticError("M+ is not invariant: star/Hecke bug")
        ops[ell] = mat
        if verbose:
            print(f"  T_{ell} on M+ built")
    ps = PlusSpace(N=N, chi=chi, dim=K, ops=ops)
    ells = list(ells)
    if len(ells) >= 2 and K:
        a, b = ells[0], ells[1]
        if _mat_mul(ps.ops[a], ps.ops[b]) != _mat_mul(ps.ops[b], ps.ops[a]):
            raise ArithmeticError("Hecke operators do not commute on M+")
    return ps


def _mat_mul(A, B):
    n = len(A)
    k = len(B)
    m = len(B[0]) if B else 0
    out = [[Fraction(0)] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        oi = out[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(m):
                    if Bt[j]:
                        oi[j] += a * Bt[j]
    return out


# ---------------------------------------------------------------------------
# exact dense helpers
# ---------------------------------------------------------------------------


def nullspace_dense(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    if not mat:
        return []
    rows = [list(r) for r in mat]
    n, m = len(rows), len(rows[0])
    pivots: dict[int, int] = {}
    r = 0
    for c in range(m):
        sel = next((i for i in range(r, n) if rows[i][c]), None)
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [xi - f * xr for xi, xr in zip(rows[i], rows[r])]
        pivots[c] = r
        r += 1
        if r == n:
            break
    out = []
    for fc in (c for c in range(m) if c not in pivots):
        vec = [Fraction(0)] * m
        vec[fc] = Fraction(1)
        for c, ri in pivots.items():
            vec[c] = -rows[ri][fc]
        out.append(vec)
    return out


def _solve_square(A, B):
    n = len(A)
    m = len(B[0])
    aug = [list(map(Fraction, A[i])) + list(map(Fraction, B[i])) for i in range(n)]
    for c in range(n):
        sel = next(i for i in range(c, n) if aug[i][c])
        aug[c], aug[sel] = aug[sel], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [xi - f * xc for xi, xc in zip(aug[i], aug[c])]
    return [row[n : n + m] for row in aug]


def _int_op(op: list[list[Fraction]]) -> tuple[list[list[int]], int]:
    den = 1
    for row in op:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    return [[int(x * den) for x in row] for row in op], den


def _apply_int(mat_num: list[list[int]], den: int, vec_num: list[int], vden: int):
    n = len(mat_num)
    out = [sum(mat_num[i][t] * vec_num[t] for t in range(n) if vec_num[t]) for i in range(n)]
    return out, den * vden


# ---------------------------------------------------------------------------
# charpoly
# ---------------------------------------------------------------------------


def charpoly_exact(M: list[list[Fraction]]) -> list[int]:
    n = len(M)
    if n == 0:
        return [1]
    H = [[Fraction(x) for x in row] for row in M]
    for c in range(n - 2):
        piv = next((r for r in range(c + 1, n) if H[r][c]), None)
        if piv is None:
            continue
        if piv != c + 1:
            H[piv], H[c + 1] = H[c + 1], H[piv]
            for r in range(n):
                H[r][piv], H[r][c + 1] = H[r][c + 1], H[r][piv]
        inv = 1 / H[c + 1][c]
        for r in range(c + 2, n):
            if H[r][c]:
                f = H[r][c] * inv
                H[r] = [x - f * y for x, y in zip(H[r], H[c + 1])]
                for t in range(n):
                    H[t][c + 1] += f * H[t][r]
    polys: list[list[Fraction]] = [[Fraction(1)]]
    for k in range(1, n + 1):
        pk = [Fraction(0)] + list(polys[k - 1])
        hk = H[k - 1][k - 1]
        for i in range(k):
            pk[i] -= hk * polys[k - 1][i]
        prod = Fraction(1)
        for i in range(k - 1, 0, -1):
            prod *= H[i][i - 1]
            if not prod:
                break
            term = prod * H[i - 1][k - 1]
            if term:
                for t in range(i):
                    pk[t] -= term * polys[i - 1][t]
        polys.append(pk)
    out = polys[n]
    assert all(x.denominator == 1 for x in out), "charpoly not integral"
    return [int(x) for x in out]


def _charpoly_mod(A: np.ndarray, p: int) -> list[int]:
    n = A.shape[0]
    H = A.astype(np.int64) % p
    for c in range(n - 2):
        col = H[c + 1 :, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        piv = c + 1 + int(nz[0])
        if piv != c + 1:
            H[[piv, c + 1]] = H[[c + 1, piv]]
            H[:, [piv, c + 1]] = H[:, [c + 1, piv]]
        inv = pow(int(H[c + 1, c]), -1, p)
        factors = (H[c + 2 :, c] * inv) % p
        if np.any(factors):
            H[c + 2 :, :] = (H[c + 2 :, :] - np.outer(factors, H[c + 1, :])) % p
            H[:, c + 1] = (H[:, c + 1] + H[:, c + 2 :] @ factors) % p
    # p < 2^24 keeps every product below 2^48 and row sums below 2^63
    polys = np.zeros((n + 1, n + 1), dtype=np.int64)
    polys[0, 0] = 1
    for k in range(1, n + 1):
        pk = np.zeros(n + 1, dtype=np.int64)
        pk[1 : k + 1] = polys[k - 1, :k]
        hk = int(H[k - 1, k - 1])
        if hk:
            pk[:k] = (pk[:k] - hk * polys[k - 1, :k]) % p
        prod = 1
        for i in range(k - 1, 0, -1):
            prod = prod * int(H[i, i - 1]) % p
            if prod == 0:
                break
            term = prod * int(H[i - 1, k - 1]) % p
            if term:
                pk[:i] = (pk[:i] - term * polys[i - 1, :i]) % p
        polys[k] = pk % p
    return [int(x) for x in polys[n]]


def _prime_stream(avoid_denominators: set[int]):
    cand = (1 << 24) - 3
    while True:
        while not sympy.isprime(cand):
            cand -= 2
        if all(d % cand for d in avoid_denominators):
            yield cand
        cand -= 2


def charpoly_multimodular(M: list[list[Fraction]], eig_bound: float) -> list[int]:
    """Exact integer charpoly via CRT over 24-bit primes.

    The operator preserves an integral lattice, so the charpoly is in Z[x];
    with all complex eigenvalues bounded by eig_bound, coefficient k is at
    most binom(n, k) eig_bound^(n-k)."""
    n = len(M)
    if n == 0:
        return [1]
    eb = max(2.0, float(eig_bound))
    need_bits = int(n * (math.log2(eb) + 1)) + 16
    dens = {x.denominator for row in M for x in row if x.denominator != 1}
    primes = []
    bits = 0
    for p in _prime_stream(dens):
        primes.append(p)
        bits += 24
        if bits >= need_bits:
            break
    residues = []
    for p in primes:
        A = np.zeros((n, n), dtype=np.int64)
        for i, row in enumerate(M):
            for j, x in enumerate(row):
                if x:
                    if x.denominator == 1:
                        A[i, j] = x.numerator % p
                    else:
                        A[i, j] = x.numerator % p * pow(x.denominator % p, -1, p) % p
        residues.append(_charpoly_mod(A, p))
    out = []
    for k in range(n + 1):
        x, mod = 0, 1
        for p, res in zip(primes, residues):
            t = (res[k] - x) * pow(mod % p, -1, p) % p
            x += mod * t
            mod *= p
        if x > mod // 2:
            x -= mod
        out.append(x)
    assert out[-1] == 1, "charpoly not monic: eigenvalue bound too small?"
    return out


def poly_div_exact(num: list[int], den) -> list[int]:
    """Exact division in Z[x] (monic divisor); raises if not divisible."""
    num = list(num)
    den = list(den)
    assert den[-1] == 1, "divisor must be monic"
    dn, dd = len(num) - 1, len(den) - 1
    if dn < dd:
        raise ArithmeticError("degree too small for exact division")
    out = [0] * (dn - dd + 1)
    for k in range(dn - dd, -1, -1):
        c = num[k + dd]
        out[k] = c
        if c:
            for j in range(dd + 1):
                num[k + j] -= c * den[j]
    if any(num[: dd]) or any(num[dd:]):
        raise ArithmeticError("not exactly divisible")
    return out


def poly_strip_root(coeffs: list[int], root: int) -> tuple[list[int], int]:
    """Divide out (x - root) as often as possible; return (quotient, count)."""
    out = list(coeffs)
    count = 0
    while len(out) > 1:
        acc = 0
        for c in reversed(out):
            acc = acc * root + c
        if acc != 0:
            break
        out = poly_div_exact(out, [-root, 1])
        count += 1
    return out, count


def factor_int_poly(coeffs) -> list[tuple[tuple[int, ...], int]]:
    x = sympy.symbols("x")
    poly = sympy.Poly(list(reversed(list(coeffs))), x)
    out = []
    for fac, mult in poly.factor_list()[1]:
        fc = [int(c) for c in reversed(fac.all_coeffs())]
        if fc[-1] != 1:
            fc = [-c for c in fc]
        out.append((tuple(fc), int(mult)))
    out.sort(key=lambda t: (len(t[0]), t[0]))
    return out


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def _poly_power(p, e: int) -> list[int]:
    out = [1]
    for _ in range(e):
        res = [0] * (len(out) + len(p) - 1)
        for i, a in enumerate(out):
            if a:
                for j, b in enumerate(p):
                    res[i + j] += a * b
        out = res
    return out


def kernel_small(op: list[list[Fraction]], poly, mult: int) -> list[list[Fraction]]:
    """ker(poly(op)^mult) by exact Horner + dense nullspace (small dims)."""
    n = len(op)
    coeffs = [Fraction(c) for c in _poly_power(poly, mult)]
    mat = [[coeffs[-1] if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    for c in reversed(coeffs[:-1]):
        mat = _mat_mul(mat, op)
        for i in range(n):
            mat[i][i] += c
    return nullspace_dense(mat)


def _rat_recon(r: int, m: int) -> Fraction | None:
    """Rational reconstruction of r mod m with |num|, den <= sqrt(m/2)."""
    bound = math.isqrt(m // 2)
    a, b = m, r % m
    pa, pb = 0, 1
    while b > bound:
        qv = a // b
        a, b = b, a - qv * b
        pa, pb = pb, pa - qv * pb
    if abs(pb) > bound or b > bound or pb == 0:
        return None
    if math.gcd(b, abs(pb)) != 1:
        return None
    return Fraction(b, pb) if pb > 0 else Fraction(-b, -pb)


def kernel_multimodular(
    op: list[list[Fraction]], poly, mult: int, expected_dim: int | None = None,
    max_primes: int = 80,
) -> list[list[Fraction]]:
    """ker(poly(op)^mult) via numpy mod-p kernels, CRT, rational reconstruction.

    The reconstructed basis is verified exactly by the caller (restriction
    solve checks op-stability over Q), so a bad prime or insufficient
    precision cannot corrupt the output silently.
    """
    n = len(op)
    coeffs = _poly_power(poly, mult)
    dens = {x.denominator for row in op for x in row if x.denominator != 1}
    pivots_ref: list[int] | None = None
    free_ref: list[int] | None = None
    crt_val: list[list[int]] | None = None
    crt_mod = 1
    result: list[list[Fraction]] | None = None
    stable = 0
    for p in _prime_stream(dens):
        A = np.zeros((n, n), dtype=np.int64)
        for i, row in enumerate(op):
            for j, x in enumerate(row):
                if x:
                    if x.denominator == 1:
                        A[i, j] = x.numerator % p
                    else:
                        A[i, j] = x.numerator % p * pow(x.denominator % p, -1, p) % p
        # Horner: poly(A) mod p
        B = (np.eye(n, dtype=np.int64) * (coeffs[-1] % p)) % p
        for c in reversed(coeffs[:-1]):
            B = _matmul_mod(B, A, p)
            B[np.diag_indices(n)] = (B.diagonal() + c) % p
        piv, free, R = _rref_mod(B, p)
        if expected_dim is not None and len(free) != expected_dim:
            continue  # bad prime
        if pivots_ref is None:
            pivots_ref, free_ref = piv, free
            crt_val = [[0] * len(free) for _ in range(n)]
            crt_mod = 1
        elif piv != pivots_ref:
            continue  # bad prime (different pivot structure)
        # kernel basis mod p in the canonical RREF form
        kb = np.zeros((n, len(free)), dtype=np.int64)
        for k, fc in enumerate(free):
            kb[fc, k] = 1
            for r_i, pc in enumerate(pivots_ref):
                kb[pc, k] = (-int(R[r_i, fc])) % p
        # CRT update
        inv = pow(crt_mod % p, -1, p)
        for i in range(n):
            for k in range(len(free)):
                cur = crt_val[i][k]
                t = (int(kb[i, k]) - cur) * inv % p
                crt_val[i][k] = cur + crt_mod * t
        crt_mod *= p
        # attempt reconstruction
        cand = []
        okall = True
        for k in range(len(free_ref)):
            col = []
            for i in range(n):
                f = _rat_recon(crt_val[i][k], crt_mod)
                if f is None:
                    okall = False
                    break
                col.append(f)
            if not okall:
                break
            cand.append(col)
        if okall:
            if result is not None and cand == result:
                stable += 1
                if stable >= 1:
                    return result
            else:
                result = cand
                stable = 0
        if crt_mod.bit_length() > max_primes * 24:
            raise ArithmeticError("kernel reconstruction did not stabilise")
    raise ArithmeticError("prime stream exhausted")


def _matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    # split to avoid int64 overflow: entries < 2^24, n < 2^13 -> fits
    return (A @ B) % p


def _rref_mod(B: np.ndarray, p: int):
    n = B.shape[0]
    R = B % p
    pivots = []
    r = 0
    for c in range(n):
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        sel = r + int(nz[0])
        if sel != r:
            R[[r, sel]] = R[[sel, r]]
        inv = pow(int(R[r, c]), -1, p)
        R[r] = R[r] * inv % p
        other = np.nonzero(R[:, c])[0]
        for i in other:
            if i != r:
                R[i] = (R[i] - R[i, c] * R[r]) % p
        pivots.append(c)
        r += 1
        if r == n:
            break
    free = [c for c in range(n) if c not in pivots]
    return pivots, free, R


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------


@dataclass
class Piece:
    dim: int
    restrictions: dict[int, list[list[Fraction]]]

    def ap_charpoly(self, ell: int) -> tuple[int, ...]:
        return tuple(charpoly_exact(self.restrictions[ell]))


def restrict_ops(
    ops: dict[int, list[list[Fraction]]], vecs: list[list[Fraction]]
) -> dict[int, list[list[Fraction]]]:
    """Restrict each operator to span(vecs); invariance verified exactly."""
    k = len(vecs)
    n = len(vecs[0])
    # pivot rows of the basis for solving
    piv_rows = _basis_pivot_rows(vecs)
    A = [[vecs[j][i] for j in range(k)] for i in piv_rows]
    out = {}
    for ell, op in ops.items():
        mat_num, den = _int_op(op)
        images = []
        for v in vecs:
            vden = 1
            for x in v:
                vden = vden * x.denominator // math.gcd(vden, x.denominator)
            vnum = [int(x * vden) for x in v]
            inum, iden = _apply_int(mat_num, den, vnum, vden)
            images.append([Fraction(x, iden) for x in inum])
        Bm = [[images[j][i] for j in range(k)] for i in piv_rows]
        X = _solve_square(A, Bm)
        # exact verification on all rows
        for j in range(k):
            for i in range(n):
                s = sum(vecs[t][i] * X[t][j] for t in range(k) if X[t][j])
                if s != images[j][i]:
                    raise ArithmeticError("subspace not invariant under T_%d" % ell)
        out[ell] = [[X[i][j] for j in range(k)] for i in range(k)]
    return out


def _basis_pivot_rows(vecs: list[list[Fraction]]) -> list[int]:
    k = len(vecs)
    n = len(vecs[0])
    work = [[vecs[j][i] for j in range(k)] for i in range(n)]
    order = list(range(n))
    chosen, used = [], set()
    for c in range(k):
        sel = next((i for i in range(n) if i not in used and work[i][c]), None)
        if sel is None:
            raise ArithmeticError("dependent basis vectors")
        chosen.append(sel)
        used.add(sel)
        prow = work[sel]
        for i in range(n):
            if i in used or not work[i][c]:
                continue
            f = work[i][c] / prow[c]
            work[i] = [x - f * y for x, y in zip(work[i], prow)]
    return chosen


def decompose_plus_space(
    ps: PlusSpace,
    split_ells: list[int],
    keep_ells: list[int],
    drop_polys_first: set[tuple[int, ...]] | None = None,
    verbose: bool = False,
) -> list[Piece]:
    """Split M+ along charpoly factors of T_{split_ells[0]}, refine with the
    rest, dropping drop_polys_first factors (Eisenstein + oldforms) wholesale."""
    if ps.dim == 0:
        return []
    all_ells = sorted(set(split_ells) | set(keep_ells))
    ell0 = split_ells[0]
    op0 = ps.ops[ell0]
    if ps.dim > 60:
        cp = charpoly_multimodular(op0, ps.hasse_eis_bound(ell0))
    else:
        cp = charpoly_exact(op0)
    facs = factor_int_poly(cp)
    drops = drop_polys_first or set()
    if verbose:
        kept = [(f, m) for f, m in facs if f not in drops]
        print(f"  T_{ell0} charpoly: {len(facs)} factors, kept {len(kept)} "
              f"(dims {sorted((len(f) - 1) * m for f, m in kept)})")
    pieces: list[dict[int, list[list[Fraction]]]] = []
    for fac, mult in facs:
        if fac in drops:
            continue
        dim_f = (len(fac) - 1) * mult
        if ps.dim > 60:
            vecs_cols = kernel_multimodular(op0, fac, mult, expected_dim=dim_f)
        else:
            vecs_cols = kernel_small(op0, fac, mult)
            vecs_cols = [list(v) for v in vecs_cols]
        if len(vecs_cols) != dim_f:
            raise ArithmeticError(f"kernel dim {len(vecs_cols)} != {dim_f}")
        pieces.append(restrict_ops({e: ps.ops[e] for e in all_ells}, vecs_cols))
        if verbose:
            print(f"    piece of dim {dim_f} extracted")
    # refinement: split further with the remaining operators (small dims now)
    for ell in split_ells[1:]:
        nxt = []
        for ops in pieces:
            op = ops[ell]
            cpf = factor_int_poly(charpoly_exact(op))
            if len(cpf) == 1:
                nxt.append(ops)
                continue
            for fac, mult in cpf:
                vecs = kernel_small(op, fac, mult)
                nxt.append(restrict_ops(ops, [list(v) for v in vecs]))
        pieces = nxt
    return [
        Piece(dim=len(ops[keep_ells[0]]), restrictions={e: ops[e] for e in keep_ells})
        for ops in pieces
    ]
