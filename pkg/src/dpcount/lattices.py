"""O_K-lattices in K^n: determinants, reduction, exact successive minima.

Everything is exact.  Over Z the workhorse is LLL (Fraction Gram-Schmidt)
followed by a certified bounded enumeration; over Fq[t] a weak Popov form is
computed, whose row-degree profile gives the successive minima exactly and
whose predictable-degree property makes box counting a closed formula.

Bases are stored as rows.  Rectangular bases (rank r <= n) are allowed for
internal uses such as orthogonal lattices; the determinant is defined for
square bases only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .globalfield import FieldContext, FqPoly


def sup_norm(ctx: FieldContext, vec) -> int:
    return max(ctx.absval(c) for c in vec)


# ---------------------------------------------------------------------------
# generic exact matrix helpers (any Euclidean domain)
# ---------------------------------------------------------------------------

def mat_det(ctx: FieldContext, M):
    """Fraction-free (Bareiss) determinant over the ring; exact."""
    n = len(M)
    if n == 0:
        return ctx.one
    A = [list(row) for row in M]
    sign = 1
    prev = ctx.one
    for k in range(n - 1):
        if ctx.is_zero(A[k][k]):
            for i in range(k + 1, n):
                if not ctx.is_zero(A[i][k]):
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return ctx.zero
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = ctx.exact_div(A[k][k] * A[i][j] - A[i][k] * A[k][j],
                                        prev)
            A[i][k] = ctx.zero
        prev = A[k][k]
    d = A[n - 1][n - 1]
    return -d if sign < 0 else d


def mat_adjugate(ctx: FieldContext, M):
    """Adjugate matrix (so M @ adj = det * I); exact, n <= 6."""
    n = len(M)
    adj = [[ctx.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[M[r][c] for c in range(n) if c != j]
                     for r in range(n) if r != i]
            d = mat_det(ctx, minor) if minor else ctx.one
            adj[j][i] = -d if (i + j) % 2 else d
    return adj


def mat_mul(A, B):
    n, m, k = len(A), len(B[0]), len(B)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = A[i][0] * B[0][j]
            for t in range(1, k):
                acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(row)
    return out


def hnf(ctx: FieldContext, rows, ncols: int | None = None):
    """Row-style Hermite normal form over the Euclidean domain O_K.

    Returns the nonzero rows of a triangular basis of the row span.
    """
    rows = [list(r) for r in rows if not all(ctx.is_zero(c) for c in r)]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    out = []
    col = 0
    while col < ncols and rows:
        live = [r for r in rows if not ctx.is_zero(r[col])]
        rest = [r for r in rows if ctx.is_zero(r[col])]
        if not live:
            rows = rest
            col += 1
            continue
        while len(live) > 1:
            live.sort(key=lambda r: ctx.absval(r[col]))
            piv = live[0]
            new_live = [piv]
            for r in live[1:]:
                q = r[col] // piv[col]
                rr = [a - q * b for a, b in zip(r, piv)]
                if ctx.is_zero(rr[col]):
                    if not all(ctx.is_zero(c) for c in rr):
                        rest.append(rr)
                else:
                    new_live.append(rr)
            if len(new_live) == 1:
                live = new_live
                break
            live = new_live
        piv = live[0]
        u = ctx.normalize_unit_scalar(piv[col])
        piv = [u * c for c in piv]
        # reduce earlier pivots' entries in this column
        for r in out:
            if not ctx.is_zero(r[col]):
                q = r[col] // piv[col]
                for j in range(ncols):
                    r[j] = r[j] - q * piv[j]
        out.append(piv)
        rows = rest
        col += 1
    return [tuple(r) for r in out]


def solve_coordinates(ctx: FieldContext, basis, x):
    """y with x = sum y_i b_i for a square basis, via Cramer; None if not
    in the lattice (or not in the span)."""
    n = len(basis)
    d = mat_det(ctx, basis)
    if ctx.is_zero(d):
        raise ValueError("singular basis")
    ys = []
    for i in range(n):
        rows = [x if r == i else basis[r] for r in range(n)]
        di = mat_det(ctx, rows)
        q, rem = divmod(di, d)
        if not ctx.is_zero(rem):
            return None
        ys.append(q)
    return tuple(ys)


# ---------------------------------------------------------------------------
# OKLattice
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OKLattice:
    """Free O_K-lattice given by basis rows (rank = len(basis))."""

    ctx: FieldContext
    basis: tuple

    def __post_init__(self):
        basis = tuple(tuple(r) for r in self.basis)
        object.__setattr__(self, "basis", basis)
        if not basis:
            raise ValueError("empty basis")
        n = len(basis[0])
        if any(len(r) != n for r in basis) or len(basis) > n:
            raise ValueError("basis must be r x n with r <= n")
        if len(basis) > 6:
            raise ValueError("ranks above 6 are not supported")

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def ncols(self) -> int:
        return len(self.basis[0])

    def det_elem(self):
        if self.rank != self.ncols:
            raise ValueError("determinant needs a square basis")
        return mat_det(self.ctx, self.basis)

    def contains(self, v) -> bool:
        if self.rank == self.ncols:
            return solve_coordinates(self.ctx, self.basis, tuple(v)) is not None
        rows = hnf(self.ctx, list(self.basis) + [tuple(v)], self.ncols)
        return len(rows) == self.rank and \
            hnf(self.ctx, self.basis, self.ncols) == rows


def determinant(L: OKLattice) -> int:
    """N(det basis); raises on singular input."""
    d = L.det_elem()
    if L.ctx.is_zero(d):
        raise ValueError("singular basis")
    return L.ctx.norm(d)


# ---------------------------------------------------------------------------
# reduction: LLL over Z, weak Popov over Fq[t]
# ---------------------------------------------------------------------------

def lll_reduce(rows):
    """Integer LLL (delta = 0.99) on the given basis rows; exact."""
    b = [list(map(int, r)) for r in rows]
    n = len(b)

    def gs():
        mu = [[Fraction(0)] * n for _ in range(n)]
        B = [Fraction(0)] * n
        star = [[Fraction(0)] * len(b[0]) for _ in range(n)]
        for i in range(n):
            star[i] = [Fraction(x) for x in b[i]]
            for j in range(i):
                if B[j] == 0:
                    mu[i][j] = Fraction(0)
                    continue
                mu[i][j] = sum(Fraction(b[i][k]) * star[j][k]
                               for k in range(len(b[0]))) / B[j]
                star[i] = [s - mu[i][j] * t for s, t in zip(star[i], star[j])]
            B[i] = sum(x * x for x in star[i])
        return mu, B

    delta = Fraction(99, 100)
    mu, B = gs()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [a - q * c for a, c in zip(b[k], b[j])]
                mu, B = gs()
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            mu, B = gs()
            k = max(k - 1, 1)
    return [tuple(r) for r in b]


def weak_popov(ctx: FieldContext, rows):
    """Weak Popov form over Fq[t]: distinct pivot (rightmost max-degree)
    positions; the result is row-reduced, so row degrees are the minima."""
    b = [list(r) for r in rows]

    def pivot(r):
        deg = max((c.deg for c in r), default=-1)
        if deg < 0:
            return None, -1
        for j in range(len(r) - 1, -1, -1):
            if r[j].deg == deg:
                return j, deg
        return None, -1

    changed = True
    while changed:
        changed = False
        info = [pivot(r) for r in b]
        bypiv: dict[int, int] = {}
        for i, (pj, pd) in enumerate(info):
            if pj is None:
                continue
            if pj in bypiv:
                i2 = bypiv[pj]
                hi, lo = (i, i2) if pd >= info[i2][1] else (i2, i)
                _, pd_lo = info[lo]
                c = ctx.field.div(b[hi][pj].lc(), b[lo][pj].lc())
                shift = info[hi][1] - pd_lo
                f = FqPoly(ctx.field, [0] * shift + [c])
                b[hi] = [a - f * bb for a, bb in zip(b[hi], b[lo])]
                changed = True
                break
            bypiv[pj] = i
    return [tuple(r) for r in b]


def reduced_basis(L: OKLattice):
    """A good basis: rows sorted by sup norm, with recorded constants.

    Returns (OKLattice, info) where info carries per-vector norms, the exact
    minima, the per-vector ratios |b_i|/lambda_i, and a certified
    coordinate-extraction constant C with |y_i| <= C * |x| / lambda_i.
    """
    ctx = L.ctx
    if ctx.kind == "Q":
        rows = lll_reduce(L.basis)
    else:
        rows = weak_popov(ctx, L.basis)
    rows.sort(key=lambda r: (sup_norm(ctx, r),
                             tuple(ctx.element_key(c) for c in r)))
    red = OKLattice(ctx, tuple(rows))
    mins = successive_minima(red, _pre_reduced=True)
    norms = [sup_norm(ctx, r) for r in rows]
    ratios = [n / l for n, l in zip(norms, mins.values)]
    C = _coordinate_constant(red, mins.values)
    info = {
        "norms": norms,
        "minima": list(mins.values),
        "ratios": ratios,
        "coord_constant": C,
        "exact_lattice": True,  # over a PID reduction never relaxes the lattice
    }
    return red, info


def _coordinate_constant(L: OKLattice, minima) -> float:
    """Certified C: any x in L has coordinates |y_i| <= C|x|/lambda_i."""
    ctx = L.ctx
    if ctx.kind != "Q":
        return 1.0  # predictable degree property of row-reduced bases
    bounds = _coefficient_bounds(L)  # |y_i| <= bounds_i * |x|
    return max(float(b) * l for b, l in zip(bounds, minima))


def _coefficient_bounds(L: OKLattice):
    """Rational c_i with |y_i| <= c_i * |x|_sup for every x = sum y_i b_i.

    Computed from the pseudo-inverse B^T (B B^T)^{-1} in exact rational
    arithmetic (for a square basis this is just the inverse).
    """
    B = [[Fraction(int(c)) for c in row] for row in L.basis]
    r, n = len(B), len(B[0])
    # y = x * P with P = B^T (B B^T)^{-1}; columns of P index y_i
    G = [[sum(B[i][k] * B[j][k] for k in range(n)) for j in range(r)]
         for i in range(r)]
    detG = _frac_det(G)
    if detG == 0:
        raise ValueError("basis rows are dependent")
    adjG = _frac_adj(G)
    # P[k][i] = sum_j B[j][k] * adjG[j][i] / detG
    bounds = []
    for i in range(r):
        s = Fraction(0)
        for k in range(n):
            s += abs(sum(B[j][k] * adjG[j][i] for j in range(r)))
        bounds.append(s / abs(detG))
    return bounds


def _frac_det(M):
    n = len(M)
    A = [row[:] for row in M]
    det = Fraction(1)
    for k in range(n):
        piv = None
        for i in range(k, n):
            if A[i][k] != 0:
                piv = i
                break
        if piv is None:
            return Fraction(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            det = -det
        det *= A[k][k]
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            A[i] = [a - f * c for a, c in zip(A[i], A[k])]
    return det


def _frac_adj(M):
    n = len(M)
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[M[r][c] for c in range(n) if c != j]
                     for r in range(n) if r != i]
            d = _frac_det(minor) if minor else Fraction(1)
            out[j][i] = -d if (i + j) % 2 else d
    return out


# ---------------------------------------------------------------------------
# successive minima
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuccessiveMinima:
    values: tuple          # lambda_1 <= ... <= lambda_r (ints; powers of q)
    witnesses: tuple       # linearly independent lattice vectors

    def __iter__(self):
        return iter(self.values)


def successive_minima(L: OKLattice, _pre_reduced: bool = False) -> SuccessiveMinima:
    ctx = L.ctx
    if ctx.kind == "Fq(t)":
        rows = list(L.basis) if _pre_reduced else weak_popov(ctx, L.basis)
        rows.sort(key=lambda r: (sup_norm(ctx, r),
                                 tuple(ctx.element_key(c) for c in r)))
        vals = tuple(sup_norm(ctx, r) for r in rows)
        return SuccessiveMinima(vals, tuple(rows))
    rows = list(L.basis) if _pre_reduced else lll_reduce(L.basis)
    bound = max(sup_norm(ctx, r) for r in rows)
    red = OKLattice(ctx, tuple(rows))
    vecs = _enumerate_sup_ball(red, bound)
    # canonical unit-orbit representatives, deterministic order
    seen = set()
    canon = []
    for v in vecs:
        lead = next(c for c in v if not ctx.is_zero(c))
        u = ctx.normalize_unit_scalar(lead)
        w = tuple(u * c for c in v)
        if w not in seen:
            seen.add(w)
            canon.append(w)
    vecs = canon
    vecs.sort(key=lambda v: (sup_norm(ctx, v),
                             tuple(ctx.element_key(c) for c in v)))
    vals, wits = [], []
    picked: list[tuple] = []
    for v in vecs:
        if _int_rank(picked + [v]) > len(picked):
            picked.append(v)
            vals.append(sup_norm(ctx, v))
            wits.append(v)
            if len(picked) == L.rank:
                break
    assert len(picked) == L.rank, "enumeration radius certified by reduction"
    return SuccessiveMinima(tuple(vals), tuple(wits))


def _enumerate_sup_ball(L: OKLattice, R: int):
    """All nonzero lattice vectors with sup norm <= R (exact, certified)."""
    ctx = L.ctx
    out = []
    if ctx.kind == "Q":
        bounds = _coefficient_bounds(L)
        ranges = [range(-int(b * R), int(b * R) + 1) for b in bounds]
        basis = [list(map(int, r)) for r in L.basis]
        n = L.ncols
        for ys in itertools.product(*ranges):
            if all(y == 0 for y in ys):
                continue
            x = tuple(sum(ys[i] * basis[i][k] for i in range(len(basis)))
                      for k in range(n))
            if max(abs(c) for c in x) <= R:
                out.append(x)
        return out
    # Fq[t]: row-reduced basis has the predictable degree property
    rows = weak_popov(ctx, L.basis)
    rdeg = [max(c.deg for c in r) for r in rows]
    rmax = -1
    while ctx.q ** (rmax + 1) <= R:
        rmax += 1
    coeff_space = []
    for d in rdeg:
        lim = rmax - d
        opts = [ctx.zero]
        if lim >= 0:
            opts = list(ctx.elements(ctx.q ** lim))
        coeff_space.append(opts)
    for ys in itertools.product(*coeff_space):
        if all(y.is_zero() for y in ys):
            continue
        x = [ctx.zero] * L.ncols
        for yi, row in zip(ys, rows):
            if not yi.is_zero():
                x = [a + yi * b for a, b in zip(x, row)]
        if sup_norm(ctx, x) <= R:
            out.append(tuple(x))
    return out


def _int_rank(vectors) -> int:
    rows = [[Fraction(int(c)) for c in v] for v in vectors]
    rank = 0
    ncols = len(rows[0])
    col = 0
    r = 0
    while r < len(rows) and col < ncols:
        piv = None
        for i in range(r, len(rows)):
            if rows[i][col] != 0:
                piv = i
                break
        if piv is None:
            col += 1
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(r + 1, len(rows)):
            if rows[i][col] != 0:
                f = rows[i][col] / rows[r][col]
                rows[i] = [a - f * c for a, c in zip(rows[i], rows[r])]
        rank += 1
        r += 1
        col += 1
    return rank


def shortest_vector(L: OKLattice):
    """Nonzero lattice vector of minimal sup norm (deterministic tie-break)."""
    return successive_minima(L).witnesses[0]


# ---------------------------------------------------------------------------
# box counting
# ---------------------------------------------------------------------------

def count_in_box(L: OKLattice, R) -> int:
    """#{x in L : sup|x| <= R}, exactly (the zero vector included)."""
    ctx = L.ctx
    R = int(R)
    if ctx.kind == "Fq(t)":
        rows = weak_popov(ctx, L.basis)
        rdeg = [max(c.deg for c in r) for r in rows]
        rmax = -1
        while ctx.q ** (rmax + 1) <= R:
            rmax += 1
        total = 1
        for d in rdeg:
            if rmax - d >= 0:
                total *= ctx.q ** (rmax - d + 1)
        return total
    red, _ = reduced_basis(L)
    return 1 + len(_enumerate_sup_ball(red, R))


def count_in_box_naive(L: OKLattice, R) -> int:
    """Independent oracle: enumerate the coefficient space of the *original*
    basis with bounds from the exact (pseudo-)inverse, no reduction step."""
    ctx = L.ctx
    R = int(R)
    if ctx.kind == "Q":
        bounds = _coefficient_bounds(L)
        ranges = [range(-int(b * R), int(b * R) + 1) for b in bounds]
        basis = [list(map(int, r)) for r in L.basis]
        cnt = 0
        for ys in itertools.product(*ranges):
            x = [sum(ys[i] * basis[i][k] for i in range(len(basis)))
                 for k in range(L.ncols)]
            if max(abs(c) for c in x) <= R:
                cnt += 1
        return cnt
    # Fq[t]: |y_i| = |sum_j x_j adj[j][i] / det| <= R * max_j|adj[j][i]| / |det|
    if L.rank != L.ncols:
        raise ValueError("Fq[t] naive oracle needs a square basis")
    rmax = -1
    while ctx.q ** (rmax + 1) <= R:
        rmax += 1
    det = mat_det(ctx, L.basis)
    if ctx.is_zero(det):
        raise ValueError("singular basis")
    adj = mat_adjugate(ctx, L.basis)
    n = L.rank
    spaces = []
    for i in range(n):
        amax = max(adj[j][i].deg for j in range(n))
        lim = rmax + amax - det.deg
        spaces.append([ctx.zero] if lim < 0
                      else list(ctx.elements(ctx.q ** lim)))
    cnt = 0
    for ys in itertools.product(*spaces):
        x = [ctx.zero] * n
        for yi, row in zip(ys, L.basis):
            if not yi.is_zero():
                x = [a + yi * b for a, b in zip(x, row)]
        if all(ctx.is_zero(c) for c in x) or sup_norm(ctx, x) <= R:
            cnt += 1
    return cnt


def box_envelope(L: OKLattice, R, minima=None) -> float:
    """prod max{1, (2R+1)/lambda_i} over Q; prod max{1, q^(r+1)/lambda_i}
    over Fq(t) -- the two-sided envelope the count is compared against."""
    ctx = L.ctx
    if minima is None:
        minima = successive_minima(L).values
    if ctx.kind == "Q":
        num = 2 * int(R) + 1
    else:
        rmax = -1
        while ctx.q ** (rmax + 1) <= int(R):
            rmax += 1
        num = ctx.q ** (rmax + 1)
    prod = 1.0
    for lam in minima:
        prod *= max(1.0, num / lam)
    return prod


# ---------------------------------------------------------------------------
# special lattices
# ---------------------------------------------------------------------------

def orthogonal_lattice(ctx: FieldContext, x) -> OKLattice:
    """{c in O_K^n : c . x = 0} for a primitive vector x; rank n-1."""
    x = list(x)
    n = len(x)
    vecs = [[ctx.one if j == i else ctx.zero for j in range(n)]
            for i in range(n)]
    vals = list(x)
    while True:
        live = [i for i in range(n) if not ctx.is_zero(vals[i])]
        if len(live) <= 1:
            break
        live.sort(key=lambda i: ctx.absval(vals[i]))
        i0 = live[0]
        progress = False
        for i in live[1:]:
            q, r = divmod(vals[i], vals[i0])
            if not ctx.is_zero(q):
                vals[i] = r
                vecs[i] = [a - q * b for a, b in zip(vecs[i], vecs[i0])]
                progress = True
        if not progress:
            break
    kernel = [tuple(vecs[i]) for i in range(n) if ctx.is_zero(vals[i])]
    assert len(kernel) == n - 1
    return OKLattice(ctx, tuple(kernel))


def congruence_lattice(ctx: FieldContext, y, d, relaxed: bool = False) -> OKLattice:
    """Lambda_d(y) = {z in O_K^3 : z = lambda*y mod d} = O_K y + d O_K^3.

    With gcd(y, d) a unit its determinant norm is exactly N(d)^2; that
    precondition is enforced unless relaxed=True (where only one-sided
    bounds apply and no determinant identity is asserted).
    """
    y = tuple(y)
    if len(y) != 3:
        raise ValueError("congruence lattices are rank 3 here")
    if ctx.is_zero(d) or ctx.is_unit(d):
        if ctx.is_zero(d):
            raise ValueError("modulus must be nonzero")
        return OKLattice(ctx, tuple(
            tuple(ctx.one if j == i else ctx.zero for j in range(3))
            for i in range(3)))
    g = ctx.content(list(y) + [d])
    if not ctx.is_unit(g) and not relaxed:
        raise ValueError("gcd(y, d) must be a unit (pass relaxed=True to "
                         "construct the lattice anyway)")
    rows = [y]
    for i in range(3):
        rows.append(tuple(d if j == i else ctx.zero for j in range(3)))
    basis = hnf(ctx, rows, 3)
    assert len(basis) == 3
    return OKLattice(ctx, tuple(basis))
