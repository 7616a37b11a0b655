"""Ternary quadratic forms over O_K: discriminants, conic counting,
solution lattices, parameterization, and a small point solver.

Convention: the stored gram matrix is the matrix of 2F (integral since
char != 2), so Delta here is 8x and Delta_0 is 4x the half-integral
convention; all envelope constants are fitted under this convention.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .globalfield import FieldContext, make_primitive, is_primitive
from .lattices import OKLattice, mat_det, hnf
from .binforms import (BinaryForm, MultiPoly, binform_gcd,
                       _form_from_parts)


def _common_factor_degree(forms) -> int:
    """Degree of the gcd of the nonzero forms (0 = coprime)."""
    nz = [g for g in forms if not g.is_zero()]
    if not nz:
        raise ValueError("all forms zero")
    common = nz[0]
    for g in nz[1:]:
        tm, u = binform_gcd(common, g)
        common = _form_from_parts(common.ctx, tm, u if u else [common.ctx.one])
        if common.degree == 0:
            return 0
    return common.degree


@dataclass(frozen=True)
class QuadraticForm:
    """F = a11 x^2 + a22 y^2 + a33 z^2 + a12 xy + a13 xz + a23 yz."""

    ctx: FieldContext
    coeffs: tuple  # (a11, a22, a33, a12, a13, a23)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if len(self.coeffs) != 6:
            raise ValueError("need 6 coefficients")

    @classmethod
    def from_coeffs(cls, ctx, coeffs):
        coeffs = [ctx.from_int(c) if isinstance(c, int) and ctx.kind != "Q"
                  else c for c in coeffs]
        return cls(ctx, tuple(coeffs))

    @property
    def gram(self):
        """Matrix of 2F."""
        a11, a22, a33, a12, a13, a23 = self.coeffs
        two = self.ctx.from_int(2)
        return ((two * a11, a12, a13),
                (a12, two * a22, a23),
                (a13, a23, two * a33))

    def evaluate(self, x):
        a11, a22, a33, a12, a13, a23 = self.coeffs
        x0, x1, x2 = x
        return (a11 * x0 * x0 + a22 * x1 * x1 + a33 * x2 * x2
                + a12 * x0 * x1 + a13 * x0 * x2 + a23 * x1 * x2)

    def polar(self, x, y):
        """Bilinear form x . gram . y, so F(x+y) = F(x) + F(y) + polar."""
        g = self.gram
        ctx = self.ctx
        acc = ctx.zero
        for i in range(3):
            for j in range(3):
                acc = acc + x[i] * g[i][j] * y[j]
        return acc

    def det_gram(self):
        return mat_det(self.ctx, self.gram)

    def is_nonsingular(self) -> bool:
        return not self.ctx.is_zero(self.det_gram())

    def to_json(self):
        return [self.ctx.elem_to_json(c) for c in self.coeffs]


def discriminants(F: QuadraticForm) -> tuple[int, int]:
    """(N(Delta), N(Delta_0)) under the 2F convention; 0 marks vanishing."""
    ctx = F.ctx
    g = F.gram
    d = mat_det(ctx, g)
    delta = 0 if ctx.is_zero(d) else ctx.norm(d)
    minors = []
    for i0, i1 in itertools.combinations(range(3), 2):
        for j0, j1 in itertools.combinations(range(3), 2):
            minors.append(g[i0][j0] * g[i1][j1] - g[i0][j1] * g[i1][j0])
    gc = ctx.content(minors)
    delta0 = 0 if ctx.is_zero(gc) else ctx.norm(gc)
    if delta and delta0:
        assert (delta ** 2) % (delta0 ** 3) == 0
    return delta, delta0


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------

def count_conic_box(F: QuadraticForm, R1, R2, R3) -> int:
    """Primitive projective solutions of F = 0 with per-coordinate bounds."""
    if not F.is_nonsingular():
        raise ValueError("count_conic_box needs a nonsingular form")
    ctx = F.ctx
    seen = set()
    e1 = list(ctx.elements(R1))
    e2 = list(ctx.elements(R2))
    e3 = list(ctx.elements(R3))
    for x0 in e1:
        for x1 in e2:
            for x2 in e3:
                x = (x0, x1, x2)
                if all(ctx.is_zero(c) for c in x):
                    continue
                if not ctx.is_zero(F.evaluate(x)):
                    continue
                if not ctx.is_unit(ctx.content(x)):
                    continue
                seen.add(ctx.vec_key(make_primitive(ctx, x)))
    return len(seen)


def zeros_in_box(F: QuadraticForm, R) -> list:
    """All integral zeros (including non-primitive and 0) with sup <= R."""
    ctx = F.ctx
    out = []
    e = list(ctx.elements(R))
    for x in itertools.product(e, repeat=3):
        if ctx.is_zero(F.evaluate(x)):
            out.append(x)
    return out


def find_point(F: QuadraticForm, H_max=None):
    """A primitive zero with height <= H_max, or None.

    Plain shell search (no descent); None means "not found up to H_max",
    never "insoluble".
    """
    if not F.is_nonsingular():
        raise ValueError("find_point needs a nonsingular form")
    ctx = F.ctx
    if H_max is None:
        H_max = 10 ** 4 if ctx.kind == "Q" else ctx.q ** 4
    best = None
    for a, b, c in _position_splits():
        pt = _find_point_role(F, int(H_max), a, b, c)
        if pt is not None and (best is None or
                               max(ctx.absval(v) for v in pt) <
                               max(ctx.absval(v) for v in best)):
            best = pt
    return best


def _position_splits():
    # (i, j, solve-position k)
    return [(0, 1, 2), (0, 2, 1), (1, 2, 0)]


def _find_point_role(F, H_max, i, j, k):
    """Scan coordinates i, j in growing shells; solve the quadratic in k."""
    ctx = F.ctx
    if ctx.kind == "Q":
        shells = []
        b = 1
        while b <= H_max:
            shells.append(b)
            b *= 2
        if shells[-1] != H_max:
            shells.append(H_max)
    else:
        shells = []
        b = 1
        while b <= H_max:
            shells.append(b)
            b *= ctx.q
    prev = -1
    for bound in shells:
        elems = list(ctx.elements(bound))
        for xi in elems:
            for xj in elems:
                if max(ctx.absval(xi), ctx.absval(xj)) <= prev:
                    continue
                xk = _solve_coordinate(F, xi, xj, i, j, k, bound)
                if xk is not None:
                    x = [None, None, None]
                    x[i], x[j], x[k] = xi, xj, xk
                    if all(ctx.is_zero(c) for c in x):
                        continue
                    return make_primitive(ctx, x)
        prev = bound
    return None


def _solve_coordinate(F, xi, xj, i, j, k, bound):
    """Solve F = 0 for coordinate k given the other two; exact roots only."""
    ctx = F.ctx
    # F as a quadratic a*xk^2 + b*xk + c
    x = [ctx.zero] * 3
    x[i], x[j] = xi, xj
    c0 = F.evaluate(x)
    x[k] = ctx.one
    c1 = F.evaluate(x)
    x[k] = ctx.from_int(2)
    c2 = F.evaluate(x)
    two = ctx.from_int(2)
    # c0 = c; c1 = a + b + c; c2 = 4a + 2b + c
    a2 = c2 - two * c1 + c0          # = 2a
    a = ctx.exact_div(a2, two)
    b = c1 - c0 - a
    if ctx.is_zero(a):
        if ctx.is_zero(b):
            return None
        q, r = divmod(ctx.zero - c0, b)
        if not ctx.is_zero(r):
            return None
        return q if ctx.absval(q) <= bound else None
    disc = b * b - ctx.from_int(4) * a * c0
    rt = ctx.sqrt(disc)
    if rt is None:
        return None
    for sgn_rt in (rt, ctx.zero - rt):
        num = sgn_rt - b
        den = two * a
        q, r = divmod(num, den)
        if ctx.is_zero(r) and ctx.absval(q) <= bound:
            return q
    return None


# ---------------------------------------------------------------------------
# parameterization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConicParam:
    """g_i binary quadratics with F(g1,g2,g3) = 0 identically."""

    form: QuadraticForm
    base_point: tuple
    g: tuple  # three BinaryForm of degree 2

    def evaluate(self, s, t) -> tuple:
        """Canonical primitive point on the conic at parameter [s:t]."""
        vals = [gi.evaluate(s, t) for gi in self.g]
        return make_primitive(self.form.ctx, vals)


def parameterize(F: QuadraticForm, p0) -> ConicParam:
    """Chord construction through p0: the line p0 + lambda*d(s,t) meets the
    conic again at F(d) p0 - polar(p0, d) d, quadratic in (s, t)."""
    ctx = F.ctx
    if not F.is_nonsingular():
        raise ValueError("parameterize needs a nonsingular form")
    p0 = tuple(p0)
    if not ctx.is_zero(F.evaluate(p0)):
        raise ValueError("base point must lie on the conic")
    basis_pairs = [(u, v) for u, v in itertools.combinations(range(3), 2)]
    for iu, iv in basis_pairs:
        e_u = tuple(ctx.one if m == iu else ctx.zero for m in range(3))
        e_v = tuple(ctx.one if m == iv else ctx.zero for m in range(3))
        if ctx.is_zero(mat_det(ctx, [list(p0), list(e_u), list(e_v)])):
            continue
        gs = _chord_forms(F, p0, e_u, e_v)
        if gs is None:
            continue
        g1, g2, g3 = gs
        # verification: F(g) == 0 identically
        sub = _form_multipoly(F).substitute(
            [gi.to_multipoly() for gi in gs])
        if not sub.is_zero():
            continue
        if _common_factor_degree(gs) > 0:
            continue  # common factor: try another basis pair
        return ConicParam(F, p0, gs)
    raise ValueError("no valid chord basis found (should not happen for a "
                     "nonsingular conic with a rational point)")


def _form_multipoly(F: QuadraticForm) -> MultiPoly:
    ctx = F.ctx
    a11, a22, a33, a12, a13, a23 = F.coeffs
    return MultiPoly(ctx, 3, {
        (2, 0, 0): a11, (0, 2, 0): a22, (0, 0, 2): a33,
        (1, 1, 0): a12, (1, 0, 1): a13, (0, 1, 1): a23})


def _chord_forms(F, p0, e_u, e_v):
    """g(s,t) = F(d) p0 - polar(p0, d) d with d = s e_u + t e_v, content
    removed; returns three binary quadratics or None if degenerate."""
    ctx = F.ctx
    # F(d) = F(e_u) s^2 + polar(e_u, e_v) s t + F(e_v) t^2
    fu, fv = F.evaluate(e_u), F.evaluate(e_v)
    fuv = F.polar(e_u, e_v)
    # polar(p0, d) = polar(p0, e_u) s + polar(p0, e_v) t
    pu, pv = F.polar(p0, e_u), F.polar(p0, e_v)
    coeffs = []
    for m in range(3):
        # coefficient of s^2, st, t^2 in g_m (stored lowest-s first later)
        c_s2 = fu * p0[m] - pu * e_u[m]
        c_st = fuv * p0[m] - pu * e_v[m] - pv * e_u[m]
        c_t2 = fv * p0[m] - pv * e_v[m]
        coeffs.append((c_t2, c_st, c_s2))  # coeffs[i] ~ s^i t^(2-i)
    flat = [c for tri in coeffs for c in tri]
    if all(ctx.is_zero(c) for c in flat):
        return None
    g = ctx.content(flat)
    if not ctx.is_unit(g):
        flat = [ctx.exact_div(c, g) for c in flat]
    lead = next(c for c in flat if not ctx.is_zero(c))
    u = ctx.normalize_unit_scalar(lead)
    flat = [u * c for c in flat]
    forms = [BinaryForm(ctx, 2, tuple(flat[3 * m: 3 * m + 3]))
             for m in range(3)]
    return tuple(forms)


# ---------------------------------------------------------------------------
# solution lattices
# ---------------------------------------------------------------------------

def solution_lattices(F: QuadraticForm) -> list[OKLattice]:
    """A covering family: every integral zero of F lies in one of the
    returned lattices; built prime-by-prime from a local congruent
    diagonalization of the gram matrix, then combined by CRT intersection.
    """
    ctx = F.ctx
    det = F.det_gram()
    if ctx.is_zero(det):
        raise ValueError("solution_lattices needs a nonsingular form")
    identity = tuple(tuple(ctx.one if j == i else ctx.zero for j in range(3))
                     for i in range(3))
    families = []
    for pi, e in ctx.factor(det).items():
        if ctx.kind == "Q" and pi == 2:
            continue  # even prime: trivial contribution under our convention
        fam = _prime_family(ctx, F.gram, pi, e)
        if fam and any(rows != identity for rows in fam):
            families.append((pi, e, fam))
    combined = [identity]
    for pi, e, fam in families:
        new = []
        for rows_old in combined:
            for rows_new in fam:
                new.append(_crt_join(ctx, rows_old, rows_new))
        combined = new
    return [OKLattice(ctx, rows) for rows in combined]


def _crt_join(ctx, rows1, rows2):
    """Intersection of two lattices containing coprime-det multiples of
    O^3: Gamma1 ^ Gamma2 = m2 Gamma1 + m1 Gamma2 with mi = det(Gamma_i)."""
    d1 = mat_det(ctx, rows1)
    d2 = mat_det(ctx, rows2)
    if ctx.is_unit(d1):
        return tuple(tuple(r) for r in rows2)
    if ctx.is_unit(d2):
        return tuple(tuple(r) for r in rows1)
    stacked = [tuple(d2 * c for c in r) for r in rows1] + \
              [tuple(d1 * c for c in r) for r in rows2]
    out = hnf(ctx, stacked, 3)
    assert len(out) == 3
    return tuple(out)


def _valuation(ctx, x, pi) -> int:
    if ctx.is_zero(x):
        return 10 ** 9  # effectively +infinity at desk scale
    v = 0
    while True:
        q, r = divmod(x, pi)
        if not ctx.is_zero(r):
            return v
        x = q
        v += 1


def _prime_family(ctx, gram, pi, e):
    """Lattice family at the odd prime pi (v_pi(det gram) = e), in original
    coordinates; each is a 3x3 row tuple."""
    A = [list(r) for r in gram]
    E = [[ctx.one if j == i else ctx.zero for j in range(3)]
         for i in range(3)]
    L = 2 * e + 2  # working precision exponent
    piL = pi ** L

    def val(x):
        v = _valuation(ctx, x, pi)
        return min(v, L)

    for k in range(2):
        # locate minimal-valuation entry of the trailing block
        best = None
        for i in range(k, 3):
            for j in range(k, 3):
                v = val(A[i][j])
                if best is None or v < best[0]:
                    best = (v, i, j)
        m, bi, bj = best
        if m >= L:
            break  # block vanishes to working precision (cannot happen: det != 0)
        if bi != bj:
            # make a diagonal entry attain the minimum: row/col bi +/- bj
            for sgn in (ctx.one, ctx.zero - ctx.one):
                cand = A[bi][bi] + sgn * A[bi][bj] + sgn * A[bj][bi] \
                    + A[bj][bj]
                if val(cand) == m:
                    _sym_addrow(ctx, A, E, bi, bj, sgn)
                    break
            else:
                raise AssertionError("diagonalization step failed (odd pi)")
        else:
            pass
        # now some diagonal entry at index bi has valuation m
        di = bi if val(A[bi][bi]) == m else None
        if di is None:
            for i in range(k, 3):
                if val(A[i][i]) == m:
                    di = i
                    break
        assert di is not None
        if di != k:
            _sym_swap(A, E, k, di)
        # clear the k-th row/column below k
        piv_unit = ctx.exact_div(A[k][k], pi ** m)
        inv_u = ctx.inverse_mod(ctx.mod(piv_unit, piL), piL)
        for j in range(k + 1, 3):
            if val(A[j][k]) >= L:
                continue
            c = ctx.mod(ctx.exact_div(A[j][k], pi ** m) * inv_u, piL)
            _sym_addrow(ctx, A, E, j, k, ctx.zero - c)
    alphas = [_valuation(ctx, A[i][i], pi) for i in range(3)]
    assert alphas[0] <= alphas[1] <= alphas[2], alphas
    assert sum(alphas) == e, (alphas, e)
    # sanity: off-diagonals vanish beyond the needed precision
    for i in range(3):
        for j in range(3):
            if i != j:
                assert _valuation(ctx, A[i][j], pi) > alphas[2]
    a = alphas[1] - alphas[0]
    b = alphas[2] - alphas[0]
    if b == 0:
        return [tuple(tuple(r) for r in
                      [[ctx.one if j == i else ctx.zero for j in range(3)]
                       for i in range(3)])]
    fam_y = []
    # case A: pi^ceil(b/2) | y0, pi^ceil((b-a)/2) | y1
    fam_y.append([
        [pi ** ((b + 1) // 2), ctx.zero, ctx.zero],
        [ctx.zero, pi ** ((b - a + 1) // 2), ctx.zero],
        [ctx.zero, ctx.zero, ctx.one]])
    # case B: shared minimal valuation eta of the first two terms
    if a % 2 == 0:
        eps0 = ctx.exact_div(A[0][0], pi ** _valuation(ctx, A[0][0], pi))
        eps1 = ctx.exact_div(A[1][1], pi ** _valuation(ctx, A[1][1], pi))
        for eta in range(a, b, 2):
            prec = b - eta
            w = ctx.mod((ctx.zero - eps1) *
                        ctx.inverse_mod(ctx.mod(eps0, pi ** prec), pi ** prec),
                        pi ** prec)
            r = _sqrt_mod_prime_power(ctx, w, pi, prec)
            if r is None:
                continue
            xi0 = eta // 2
            xi1 = (eta - a) // 2
            for root in (r, ctx.mod(ctx.zero - r, pi ** prec)):
                fam_y.append([
                    [pi ** (xi0 + prec), ctx.zero, ctx.zero],
                    [root * (pi ** xi0), pi ** xi1, ctx.zero],
                    [ctx.zero, ctx.zero, ctx.one]])
    # pull back to x coordinates: x = y E, lattice rows -> rows . E
    out = []
    seen = set()
    for rows in fam_y:
        xrows = tuple(tuple(sum((rows[i][m] * E[m][j] for m in range(1, 3)),
                                rows[i][0] * E[0][j])
                            for j in range(3)) for i in range(3))
        key = tuple(tuple(ctx.element_key(c) for c in r)
                    for r in hnf(ctx, xrows, 3))
        if key not in seen:
            seen.add(key)
            out.append(tuple(hnf(ctx, xrows, 3)))
    return out


def _sym_addrow(ctx, A, E, i, j, c):
    """Row_i += c * Row_j and Col_i += c * Col_j on A; track E."""
    for m in range(3):
        A[i][m] = A[i][m] + c * A[j][m]
    for m in range(3):
        A[m][i] = A[m][i] + c * A[m][j]
    for m in range(3):
        E[i][m] = E[i][m] + c * E[j][m]


def _sym_swap(A, E, i, j):
    A[i], A[j] = A[j], A[i]
    for m in range(3):
        A[m][i], A[m][j] = A[m][j], A[m][i]
    E[i], E[j] = E[j], E[i]


def _sqrt_mod_prime_power(ctx, w, pi, k):
    """Square root of the unit w modulo pi^k (pi odd), or None."""
    if k <= 0:
        return ctx.zero
    r0 = _sqrt_residue_field(ctx, ctx.mod(w, pi), pi)
    if r0 is None:
        return None
    # Hensel / Newton lifting
    r = r0
    prec = 1
    while prec < k:
        prec = min(2 * prec, k)
        mod = pi ** prec
        two_r_inv = ctx.inverse_mod(ctx.mod(ctx.from_int(2) * r, mod), mod)
        r = ctx.mod(r - (r * r - w) * two_r_inv, mod)
    assert ctx.is_zero(ctx.mod(r * r - w, pi ** k))
    return r


def _sqrt_residue_field(ctx, a, pi):
    """Tonelli-Shanks in O_K/(pi), generic over both residue field kinds."""
    if ctx.is_zero(ctx.mod(a, pi)):
        return ctx.zero
    N = ctx.residue_field_size(pi)

    def fmul(x, y):
        return ctx.mod(x * y, pi)

    def fpow(x, ee):
        r = ctx.mod(ctx.one, pi)
        x = ctx.mod(x, pi)
        while ee:
            if ee & 1:
                r = fmul(r, x)
            x = fmul(x, x)
            ee >>= 1
        return r

    one = ctx.mod(ctx.one, pi)
    if fpow(a, (N - 1) // 2) != one:
        return None
    # write N - 1 = Q * 2^S
    Qexp = N - 1
    S = 0
    while Qexp % 2 == 0:
        Qexp //= 2
        S += 1
    # find a non-residue z
    z = None
    for cand in ctx.elements(max(2, pi if isinstance(pi, int) else
                                 ctx.q ** pi.deg)):
        if ctx.is_zero(ctx.mod(cand, pi)):
            continue
        if fpow(cand, (N - 1) // 2) != one:
            z = cand
            break
    if z is None:
        raise AssertionError("no quadratic non-residue found")
    M = S
    c = fpow(z, Qexp)
    t = fpow(a, Qexp)
    R = fpow(a, (Qexp + 1) // 2)
    while t != one:
        # find least i with t^(2^i) = 1
        i = 0
        tt = t
        while tt != one:
            tt = fmul(tt, tt)
            i += 1
        bpow = fpow(c, 1 << (M - i - 1))
        M = i
        c = fmul(bpow, bpow)
        t = fmul(t, c)
        R = fmul(R, bpow)
    assert fmul(R, R) == ctx.mod(a, pi)
    return R


# ---------------------------------------------------------------------------
# asymmetric-box and lattice counts
# ---------------------------------------------------------------------------

def count_fiber_dp4(q: QuadraticForm, R1, R) -> int:
    """Primitive projective solutions with |x1| <= R1 and |x2|,|x3| <= R,
    for q with both q and q(0, x2, x3) nonsingular."""
    ctx = q.ctx
    if not q.is_nonsingular():
        raise ValueError("q must be nonsingular")
    # binary part q(0, x2, x3) nonsingular: disc of the restricted quadratic
    a22, a33, a23 = q.coeffs[1], q.coeffs[2], q.coeffs[5]
    disc = a23 * a23 - ctx.from_int(4) * a22 * a33
    if ctx.is_zero(disc):
        raise ValueError("q(0, x2, x3) must be nonsingular")
    return count_conic_box(q, R1, R, R)


def count_lattice_quadric(L: OKLattice, Q: QuadraticForm, alpha, R,
                          warn_regime: bool = True) -> int:
    """Primitive x in L with sup|x| < alpha and N(Q(x)) < R (strict)."""
    import warnings

    from .lattices import reduced_basis, _enumerate_sup_ball

    ctx = L.ctx
    if warn_regime and not (float(R) ** 0.5 <= 4 * float(alpha)
                            and float(alpha) <= 4 * float(R)):
        warnings.warn("count_lattice_quadric outside the lemma regime "
                      "R^(1/2) <= C*alpha <= C*R; result exact, bound "
                      "guarantees void", stacklevel=2)
    bound = int(alpha) - 1
    if bound < 1:
        return 0
    red, _ = reduced_basis(L)
    cnt = 0
    for x in _enumerate_sup_ball(red, bound):
        if not is_primitive(ctx, x):
            continue
        v = Q.evaluate(x)
        if ctx.is_zero(v) or ctx.absval(v) < R:
            cnt += 1
    return cnt


def count_lattice_quadric_naive(L: OKLattice, Q: QuadraticForm,
                                alpha, R) -> int:
    """Oracle: scan the ambient box and filter lattice membership."""
    ctx = L.ctx
    bound = int(alpha) - 1
    if bound < 1:
        return 0
    cnt = 0
    for x in itertools.product(list(ctx.elements(bound)), repeat=L.ncols):
        if all(ctx.is_zero(c) for c in x):
            continue
        if not is_primitive(ctx, x):
            continue
        if not L.contains(x):
            continue
        v = Q.evaluate(x)
        if ctx.is_zero(v) or ctx.absval(v) < R:
            cnt += 1
    return cnt
