"""Point counting N_U(B) on del Pezzo models: brute-force enumeration,
fiberwise conic-bundle counting, congruence-class counts and growth-exponent
fitting.

Height conventions (H <= B throughout):
  DP3 / DP4: standard projective height in P^3 / P^4.
  DP5CB:     H([s:t]) * H(x) over P^1 x P^2.
  DP2:       weighted height in P(2,1,1,1) for (y, u, v, w).
  DP1:       weighted height in P(3,2,1,1) for (y, x, u, v).

Exceptional exclusion (N_U):
  DP5CB: points in degenerate fibers (Delta(s,t) = 0) and points over the
         base locus Q1(x) = Q2(x) = 0 — together exactly the K-points of
         the 10 exceptional curves.
  DP4:   points in degenerate fibers of either conic fibration — exactly
         the K-points of the 16 lines.
  DP3:   points on the K-rational lines found at the recorded search bound.
  DP2:   points over the bitangents found at the recorded search bound.
  DP1:   no exceptional curves; the anticanonical base point is excluded
         from both counts.
"""

from __future__ import annotations

import bisect
import itertools
import math
import os
import time
from dataclasses import dataclass

from .globalfield import (make_primitive, height_proj, proj_points_in_box,
                          count_p1, is_weighted_normalized)
from .quadforms import QuadraticForm, find_point, parameterize
from .delpezzo import (DelPezzoModel, FiberDiscriminant, fiber_discriminant,
                       dp5_fiber_form, dp4_fiber_form, dp4_normal_form,
                       find_lines, find_bitangents)


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountRecord:
    model_id: str
    field: str
    B: int
    method: str            # "brute" | "fiber"
    n_x: int
    n_u: int
    seconds: float
    exc_bound: int
    workers: int = 1
    fallback_fibers: int = 0

    def __post_init__(self):
        assert self.n_u <= self.n_x

    def row(self) -> dict:
        return {"model_id": self.model_id, "field": self.field, "B": self.B,
                "method": self.method, "N_X": self.n_x, "N_U": self.n_u,
                "seconds": round(self.seconds, 3),
                "exc_bound": self.exc_bound}


@dataclass(frozen=True)
class CongruenceClassCount:
    modulus: object
    n_tilde: int
    n_orbits: int


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    residuals: tuple


# ---------------------------------------------------------------------------
# height helpers
# ---------------------------------------------------------------------------

def _height_floor(ctx, n: int) -> int:
    """Largest attainable height value <= n (q-powers over Fq(t))."""
    n = int(n)
    if n < 1:
        return 0
    if ctx.kind == "Q":
        return n
    h = 1
    while h * ctx.q <= n:
        h *= ctx.q
    return h


def _next_height(ctx, h: int) -> int:
    return h + 1 if ctx.kind == "Q" else max(1, h) * ctx.q


def _binform_eval(ctx, coeffs, s, t):
    """coeffs[i] multiplies s^i t^(deg - i)."""
    d = len(coeffs) - 1
    acc = ctx.zero
    for i, c in enumerate(coeffs):
        if ctx.is_zero(c):
            continue
        term = c
        for _ in range(i):
            term = term * s
        for _ in range(d - i):
            term = term * t
        acc = acc + term
    return acc


def _workers_from_env(workers) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("DPCOUNT_THREADS")
    return max(1, int(env)) if env else 1


def _nle(ctx, x, bound) -> bool:
    """True when x = 0 or |x| <= bound."""
    return ctx.is_zero(x) or ctx.norm(x) <= bound


def _p1_stream(ctx, bound: int):
    """Canonical primitive P^1 representatives of height <= bound."""
    if bound < 1:
        return
    if ctx.kind == "Q":
        yield (0, 1)
        for s in range(1, bound + 1):
            for t in range(-bound, bound + 1):
                if math.gcd(s, t) == 1:
                    yield (s, t)
        return
    elems = list(ctx.elements(bound))
    for s in elems:
        for t in elems:
            if ctx.is_zero(s) and ctx.is_zero(t):
                continue
            st = (s, t)
            if make_primitive(ctx, st) == st:
                yield st


def _pool_map(fn, args, workers):
    import multiprocessing as mp

    ctxm = mp.get_context("fork")
    with ctxm.Pool(processes=workers) as pool:
        return pool.map(fn, args)


# ---------------------------------------------------------------------------
# exact conic point enumeration in boxes
# ---------------------------------------------------------------------------

def _quadratic_roots(ctx, a, b, c, domain):
    """Roots in O_K of a x^2 + b x + c; the whole domain if identically
    zero; exact."""
    if ctx.is_zero(a):
        if ctx.is_zero(b):
            return list(domain) if ctx.is_zero(c) else []
        q, r = divmod(ctx.zero - c, b)
        return [q] if ctx.is_zero(r) else []
    disc = b * b - ctx.from_int(4) * a * c
    rt = ctx.sqrt(disc)
    if rt is None:
        return []
    roots = {}
    two_a = ctx.from_int(2) * a
    for s in (rt, ctx.zero - rt):
        q, r = divmod(s - b, two_a)
        if ctx.is_zero(r):
            roots[ctx.element_key(q)] = q
    return list(roots.values())


def conic_points_scan(F: QuadraticForm, R: int) -> set:
    """All primitive canonical zeros of the ternary form F with height
    <= R, by 2D scan with an exact quadratic solve in the third variable.
    Handles degenerate forms (identically-zero slices enumerate a line)."""
    ctx = F.ctx
    if ctx.kind == "Q" and R > 80:
        pts = _conic_scan_numpy(F, R)
        if pts is not None:
            return pts
    a11, a22, a33, a12, a13, a23 = F.coeffs
    out = set()
    elems = list(ctx.elements(R))
    for x0 in elems:
        for x1 in elems:
            b = a13 * x0 + a23 * x1
            c = a11 * x0 * x0 + a12 * x0 * x1 + a22 * x1 * x1
            for x2 in _quadratic_roots(ctx, a33, b, c, elems):
                if not _nle(ctx, x2, R):
                    continue
                v = (x0, x1, x2)
                if all(ctx.is_zero(z) for z in v):
                    continue
                out.add(make_primitive(ctx, v))
    return out


_PERM3 = {0: (2, 1, 0), 1: (0, 2, 1), 2: (0, 1, 2)}


def _permuted_coeffs(coeffs, perm):
    """Coefficient tuple of F(y_0, y_1, y_2) with y_i = x_{perm[i]}."""
    a11, a22, a33, a12, a13, a23 = coeffs
    diag = [a11, a22, a33]
    off = {(0, 1): a12, (0, 2): a13, (1, 2): a23}

    def o(i, j):
        return off[tuple(sorted((perm[i], perm[j])))]

    return (diag[perm[0]], diag[perm[1]], diag[perm[2]],
            o(0, 1), o(0, 2), o(1, 2))


def _conic_scan_numpy(F: QuadraticForm, R: int):
    import numpy as np

    base = tuple(int(c) for c in F.coeffs)
    # pick a variable with a nonzero squared coefficient to solve for
    for axis in (2, 1, 0):
        if base[axis] != 0:
            perm = _PERM3[axis]
            break
    else:
        return None
    a11, a22, a33, a12, a13, a23 = _permuted_coeffs(base, perm)
    out = set()
    x1 = np.arange(-R, R + 1, dtype=np.int64)
    for x0 in range(-R, R + 1):
        b = a13 * x0 + a23 * x1
        c = a11 * x0 * x0 + a12 * x0 * x1 + a22 * x1 * x1
        disc = b * b - 4 * a33 * c
        ok = disc >= 0
        root = np.zeros_like(disc)
        root[ok] = np.sqrt(disc[ok].astype(np.float64)).astype(np.int64)
        over = ok & (root * root > disc)
        root[over] -= 1
        under = ok & ((root + 1) * (root + 1) <= disc)
        root[under] += 1
        ok &= root * root == disc
        for sgn in (1, -1):
            num = sgn * root - b
            good = ok & (num % (2 * a33) == 0)
            x2 = num[good] // (2 * a33)
            inb = np.abs(x2) <= R
            for xx1, xx2 in zip(x1[good][inb], x2[inb]):
                w = (x0, int(xx1), int(xx2))
                v = [0, 0, 0]
                for i in range(3):
                    v[perm[i]] = w[i]
                v = tuple(v)
                if v != (0, 0, 0):
                    out.add(make_primitive(F.ctx, v))
    return out


def conic_count_scan(F: QuadraticForm, R: int) -> int:
    """Number of projective zeros of F with height <= R (exact); avoids
    materializing the point set when a vectorized count is possible."""
    ctx = F.ctx
    if ctx.kind == "Q" and R > 80:
        n = _conic_scan_numpy_count(F, R)
        if n is not None:
            return n
    return len(conic_points_scan(F, R))


def _conic_scan_numpy_count(F: QuadraticForm, R: int):
    """Primitive integer solutions in the box come in +/- pairs; half of
    their number is the projective count."""
    import numpy as np

    base = tuple(int(c) for c in F.coeffs)
    for axis in (2, 1, 0):
        if base[axis] != 0:
            perm = _PERM3[axis]
            break
    else:
        return None
    a11, a22, a33, a12, a13, a23 = _permuted_coeffs(base, perm)
    total = 0
    x1 = np.arange(-R, R + 1, dtype=np.int64)
    for x0 in range(-R, R + 1):
        b = a13 * x0 + a23 * x1
        c = a11 * x0 * x0 + a12 * x0 * x1 + a22 * x1 * x1
        disc = b * b - 4 * a33 * c
        ok = disc >= 0
        root = np.zeros_like(disc)
        root[ok] = np.sqrt(disc[ok].astype(np.float64)).astype(np.int64)
        over = ok & (root * root > disc)
        root[over] -= 1
        under = ok & ((root + 1) * (root + 1) <= disc)
        root[under] += 1
        ok &= root * root == disc
        g0 = np.int64(abs(x0))
        for sgn in (1, -1):
            if sgn == -1:
                sel = ok & (root != 0)   # avoid double-counting disc == 0
            else:
                sel = ok
            num = sgn * root - b
            good = sel & (num % (2 * a33) == 0)
            x2 = num // (2 * a33)
            good &= np.abs(x2) <= R
            good &= np.gcd(np.gcd(g0, np.abs(x1)), np.abs(x2)) == 1
            total += int(np.count_nonzero(good))
    assert total % 2 == 0
    return total // 2


# ---------------------------------------------------------------------------
# certified parameter bounds for conic parameterizations
# ---------------------------------------------------------------------------

def _pseudo_divmod(ctx, a, b):
    """lc(b)^k * a = q*b + r with deg r < deg b; exact over O_K."""
    a = list(a)
    q = [ctx.zero] * max(1, len(a) - len(b) + 1)
    lc = b[-1]
    k = 0
    while len(a) >= len(b):
        if ctx.is_zero(a[-1]):
            a.pop()
            continue
        k += 1
        a = [lc * c for c in a]
        q = [lc * c for c in q]
        f = a[-1]
        shift = len(a) - len(b)
        q[shift] = q[shift] + f
        for i, bc in enumerate(b):
            a[shift + i] = a[shift + i] - f * bc
        a.pop()
    while len(a) > 1 and ctx.is_zero(a[-1]):
        a.pop()
    if not a:
        a = [ctx.zero]
    return q, a, k


def _bezout_constant(ctx, f, g):
    """(u, v, e) with u*f + v*g = e, e nonzero in O_K, for coprime
    univariate f, g over O_K (fraction-free extended Euclid); raises
    ValueError when f and g share a nonconstant factor."""
    def trim(p):
        p = list(p)
        while len(p) > 1 and ctx.is_zero(p[-1]):
            p.pop()
        return p

    def pscale(p, c):
        return [c * a for a in p]

    def pmul(p, q):
        out = [ctx.zero] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            for j, b in enumerate(q):
                out[i + j] = out[i + j] + a * b
        return out

    def psub(p, q):
        n = max(len(p), len(q))
        p = p + [ctx.zero] * (n - len(p))
        q = q + [ctx.zero] * (n - len(q))
        return [a - b for a, b in zip(p, q)]

    r0, u0, v0 = trim(f), [ctx.one], [ctx.zero]
    r1, u1, v1 = trim(g), [ctx.zero], [ctx.one]
    if len(r0) == 1:
        if ctx.is_zero(r0[0]):
            raise ValueError("zero input")
        return u0, v0, r0[0]
    while True:
        if all(ctx.is_zero(c) for c in r1):
            raise ValueError("inputs share a nonconstant common factor")
        if len(r1) == 1:
            return u1, v1, r1[0]
        q, r, k = _pseudo_divmod(ctx, r0, r1)
        lck = ctx.one
        for _ in range(k):
            lck = lck * r1[-1]
        u = psub(pscale(u0, lck), pmul(q, u1))
        v = psub(pscale(v0, lck), pmul(q, v1))
        r, u, v = trim(r), trim(u), trim(v)
        allc = [c for c in r + u + v if not ctx.is_zero(c)]
        if allc:
            cont = ctx.content(allc)
            if not ctx.is_unit(cont):
                r = [ctx.exact_div(c, cont) for c in r]
                u = [ctx.exact_div(c, cont) for c in u]
                v = [ctx.exact_div(c, cont) for c in v]
        r0, u0, v0 = r1, u1, v1
        r1, u1, v1 = r, u, v


def _coeff_mass(ctx, polys) -> int:
    """S with |sum_i a_i x_i| <= S * max|x_i| over the listed coefficient
    vectors (sum of norms over Q, max of norms over Fq(t))."""
    norms = [ctx.norm(c) for p in polys for c in p
             if not ctx.is_zero(c)]
    if not norms:
        return 1
    return max(1, sum(norms) if ctx.kind == "Q" else max(norms))


def param_height_bound(param, R: int) -> int:
    """Certified parameter-box radius: every primitive (s, t) whose image
    point has height <= R satisfies max(|s|, |t|) <= the returned value.
    Bezout identities A*g_i + B*g' = e * t^M (and the reversed-variable
    analogue) bound both the content of the value vector and the raw
    coordinate growth, because the coordinate forms of a conic
    parameterization share no common factor."""
    ctx = param.form.ctx
    forms = [list(gi.coeffs) for gi in param.g]
    base = next(f for f in forms if any(not ctx.is_zero(c) for c in f))
    others = [f for f in forms if f is not base]
    for alpha, beta in ((1, 0), (0, 1), (1, 1), (1, 2), (2, 1), (1, 3),
                        (3, 1), (2, 3), (1, 4), (4, 1)):
        cand = [ctx.from_int(alpha) * a + ctx.from_int(beta) * b
                for a, b in zip(others[0], others[1])]
        if all(ctx.is_zero(c) for c in cand):
            continue
        try:
            ut, vt, et = _bezout_constant(ctx, base, cand)
            us, vs, es = _bezout_constant(ctx, list(reversed(base)),
                                          list(reversed(cand)))
        except ValueError:
            continue
        wmass = max(1, alpha + beta) if ctx.kind == "Q" else 1
        c_cont = ctx.norm(et) * ctx.norm(es)
        kt = _coeff_mass(ctx, [ut, vt]) * wmass * c_cont
        ks = _coeff_mass(ctx, [us, vs]) * wmass * c_cont
        K = max(kt // max(1, ctx.norm(et)) + 1,
                ks // max(1, ctx.norm(es)) + 1)
        return math.isqrt(max(1, K * R)) + 1
    raise ValueError("coordinate forms share a common factor")


def _definite_q(F: QuadraticForm) -> bool:
    """True when F is positive or negative definite over the reals (then
    the conic has no points at all); Q only."""
    a11, a22, a33, a12, a13, a23 = (int(c) for c in F.coeffs)
    m1 = 2 * a11
    m2 = 4 * a11 * a22 - a12 * a12
    m3 = (2 * a11 * (4 * a22 * a33 - a23 * a23)
          - a12 * (2 * a12 * a33 - a13 * a23)
          + a13 * (a12 * a23 - 2 * a22 * a13))
    if m1 > 0 and m2 > 0 and m3 > 0:
        return True
    return m1 < 0 and m2 > 0 and m3 < 0


def _small_zero_bound(F: QuadraticForm) -> int:
    """Height bound below which every soluble nonsingular ternary form
    over Z has a nontrivial zero (three times the largest entry of the
    integer symmetric matrix of 2F)."""
    a11, a22, a33, a12, a13, a23 = (abs(int(c)) for c in F.coeffs)
    return 3 * max(2 * a11, 2 * a22, 2 * a33, a12, a13, a23) + 1


def conic_points(F: QuadraticForm, R: int):
    """(set of primitive canonical points of height <= R, used_fallback).
    Parameterization with a certified parameter box when a point is found;
    exact solve-scan otherwise (both routes are exact)."""
    ctx = F.ctx
    if not F.is_nonsingular():
        return conic_points_scan(F, R), True
    if ctx.kind == "Q" and _definite_q(F):
        return set(), False
    p0 = find_point(F, H_max=32 if ctx.kind == "Q" else ctx.q ** 2)
    if p0 is None:
        if ctx.kind != "Q":
            return conic_points_scan(F, R), True
        cand = conic_points_scan(F, _small_zero_bound(F))
        if not cand:
            return set(), False   # provably insoluble
        p0 = min(cand, key=lambda x: height_proj(ctx, x))
    param = parameterize(F, p0)
    Hp = param_height_bound(param, R)
    # direct scan is cheaper when the certified box is too pessimistic
    if Hp * Hp > 3 * R * R + 10:
        return conic_points_scan(F, R), True
    pts = set()
    for st in _p1_stream(ctx, Hp):
        x = param.evaluate(*st)
        if height_proj(ctx, x) <= R:
            pts.add(x)
    return pts, False


# ---------------------------------------------------------------------------
# DP5CB counting
# ---------------------------------------------------------------------------

def _dp5_parts(X):
    return X.parts["Q1"], X.parts["Q2"], fiber_discriminant(X)


def _quad_coeffs6(poly):
    """(a11, a22, a33, a12, a13, a23) of a ternary quadric MultiPoly."""
    ctx = poly.ctx
    t = poly.terms
    z = ctx.zero
    return (t.get((2, 0, 0), z), t.get((0, 2, 0), z), t.get((0, 0, 2), z),
            t.get((1, 1, 0), z), t.get((1, 0, 1), z), t.get((0, 1, 1), z))


def _dp5_base_heights(X, B):
    """Sorted heights of the K-rational base-locus points (Q1 = Q2 = 0)
    with height <= B; these lie on every fiber of the bundle."""
    ctx = X.ctx
    Q1, Q2, delta = _dp5_parts(X)
    st0 = None
    for st in _p1_stream(ctx, max(4, ctx.char or 4)):
        if not ctx.is_zero(_binform_eval(ctx, delta.coeffs, st[0], st[1])):
            st0 = st
            break
    if st0 is None:
        raise ValueError("no nondegenerate fiber found (model not smooth?)")
    pts, _ = conic_points(dp5_fiber_form(X, st0[0], st0[1]), B)
    heights = [height_proj(ctx, x) for x in pts
               if ctx.is_zero(Q1.evaluate(x)) and ctx.is_zero(Q2.evaluate(x))]
    return sorted(heights)


def count_brute(X: DelPezzoModel, B: int, workers=None,
                exc_bound: int = 10) -> CountRecord:
    """Exact N_X(B), N_U(B) by model-specific exhaustive enumeration."""
    if B < 1:
        raise ValueError("B < 1")
    workers = _workers_from_env(workers)
    t0 = time.monotonic()
    if X.variant == "DP5CB":
        n_x, n_u = _dp5_brute(X, B, workers)
    elif X.variant == "DP4":
        n_x, n_u = _dp4_brute(X, B, workers)
    elif X.variant == "DP3":
        n_x, n_u = _dp3_brute(X, B, workers, exc_bound)
    elif X.variant == "DP2":
        n_x, n_u = _dp2_brute(X, B, exc_bound)
    elif X.variant == "DP1":
        n_x, n_u = _dp1_brute(X, B)
    else:
        raise AssertionError(X.variant)
    return CountRecord(X.model_id, X.ctx.kind, B, "brute", n_x, n_u,
                       time.monotonic() - t0, exc_bound, workers)


def _dp5_brute(X, B, workers):
    ctx = X.ctx
    if ctx.kind == "Q" and B <= 60 and workers == 1:
        return _dp5_brute_xscan(X, B)
    base_h = _dp5_base_heights(X, B)
    if workers == 1:
        return _dp5_brute_chunk((X.to_json(), B, 0, 1, base_h))
    args = [(X.to_json(), B, i, workers, base_h) for i in range(workers)]
    results = _pool_map(_dp5_brute_chunk, args, workers)
    return tuple(map(sum, zip(*results)))


def _dp5_brute_xscan(X, B):
    """Independent small-B route: scan x over the P^2 box; each non-base
    point determines its fiber as [s:t] = [Q2(x), -Q1(x)]."""
    ctx = X.ctx
    Q1, Q2, delta = _dp5_parts(X)
    n_x = n_u = 0
    for x in proj_points_in_box(ctx, 3, B):
        hx = height_proj(ctx, x)
        q1 = Q1.evaluate(x)
        q2 = Q2.evaluate(x)
        if ctx.is_zero(q1) and ctx.is_zero(q2):
            n_x += count_p1(ctx, B // hx)   # base locus: on every fiber
            continue
        st = make_primitive(ctx, (q2, ctx.zero - q1))
        if height_proj(ctx, st) * hx > B:
            continue
        n_x += 1
        if not ctx.is_zero(_binform_eval(ctx, delta.coeffs, st[0], st[1])):
            n_u += 1
    return n_x, n_u


def _dp5_brute_chunk(payload):
    """Box scan over P^1 x P^2: fibers whose stream index is congruent to
    `part` mod `nparts`; each fiber box is scanned exactly."""
    model_json, B, part, nparts, base_h = payload
    X = DelPezzoModel.from_json(model_json)
    ctx = X.ctx
    Q1, Q2, delta = _dp5_parts(X)
    n_x = n_u = 0
    for i, st in enumerate(_p1_stream(ctx, B)):
        if i % nparts != part:
            continue
        hst = height_proj(ctx, st)
        R = B // hst
        if R < 1:
            continue
        F = dp5_fiber_form(X, st[0], st[1])
        degenerate = ctx.is_zero(
            _binform_eval(ctx, delta.coeffs, st[0], st[1]))
        n = conic_count_scan(F, R)
        n_x += n
        if degenerate:
            continue
        n_u += n - bisect.bisect_right(base_h, R)
    return n_x, n_u


def count_fiber_dp5(X: DelPezzoModel, B: int, workers=None) -> CountRecord:
    """Exact N_X/N_U via the conic-bundle case split: fibers of height
    <= sqrt(B) are enumerated through parameterizations with certified
    parameter boxes (exact per-fiber scan as fallback); remaining points
    have small x and are read off from [s:t] = [Q2(x), -Q1(x)]."""
    if X.variant != "DP5CB":
        raise ValueError("count_fiber_dp5 needs a DP5CB model")
    if B < 1:
        raise ValueError("B < 1")
    workers = _workers_from_env(workers)
    t0 = time.monotonic()
    ctx = X.ctx
    Q1, Q2, delta = _dp5_parts(X)
    base_h = _dp5_base_heights(X, B)
    s0 = _height_floor(ctx, math.isqrt(B))
    n_x = n_u = 0
    fallbacks = 0
    # Case 1: fibers with H([s:t]) <= s0
    for st in _p1_stream(ctx, s0):
        hst = height_proj(ctx, st)
        R = B // hst
        F = dp5_fiber_form(X, st[0], st[1])
        degenerate = ctx.is_zero(
            _binform_eval(ctx, delta.coeffs, st[0], st[1]))
        if degenerate:
            n_x += conic_count_scan(F, R)
            continue
        pts, fb = conic_points(F, R)
        fallbacks += int(fb)
        n_x += len(pts)
        n_u += len(pts) - bisect.bisect_right(base_h, R)
    # Case 2: the remaining points satisfy H(x) <= B / (height above s0)
    hx_max = B // _next_height(ctx, s0)
    if hx_max >= 1:
        for x in proj_points_in_box(ctx, 3, hx_max):
            hx = height_proj(ctx, x)
            q1 = Q1.evaluate(x)
            q2 = Q2.evaluate(x)
            if ctx.is_zero(q1) and ctx.is_zero(q2):
                n_x += count_p1(ctx, B // hx) - count_p1(ctx, s0)
                continue
            st = make_primitive(ctx, (q2, ctx.zero - q1))
            hst = height_proj(ctx, st)
            if hst <= s0 or hst * hx > B:
                continue
            n_x += 1
            if not ctx.is_zero(
                    _binform_eval(ctx, delta.coeffs, st[0], st[1])):
                n_u += 1
    return CountRecord(X.model_id, ctx.kind, B, "fiber", n_x, n_u,
                       time.monotonic() - t0, 0, workers,
                       fallback_fibers=fallbacks)


# ---------------------------------------------------------------------------
# DP4 counting
# ---------------------------------------------------------------------------

def fiber_discriminant_dp4_pi2(X) -> FiberDiscriminant:
    """Discriminant of the second conic fibration [x0:x3] = [x2:x1]."""
    from .delpezzo import _binary_primitive_normalize, _binary_separable
    ctx = X.ctx
    agg, ahh, agh, a = _dp4_fiber_entries2(X)
    quart = (agg * ahh).scale(ctx.from_int(4)) - agh * agh
    quart = quart.scale(ctx.from_int(2) * a)
    coeffs = [ctx.zero] * 5
    for e, c in quart.terms.items():
        coeffs[e[0]] = c
    coeffs = tuple(_binary_primitive_normalize(ctx, coeffs))
    return FiberDiscriminant(coeffs, 4, _binary_separable(ctx, coeffs))


def _dp4_fiber_entries2(X):
    """Binary quadratics of the pi_2 fiber conic: fiber points are
    (u a, v b, u b, v a, z) with q(a, b, z) = Q(ua, vb, ub, va) + c z^2."""
    from .binforms import MultiPoly
    ctx = X.ctx
    Qp, a = dp4_normal_form(X)
    u = MultiPoly.variable(ctx, 2, 0)
    v = MultiPoly.variable(ctx, 2, 1)
    zero = MultiPoly(ctx, 2)
    agg = Qp.substitute([u, zero, zero, v])
    ahh = Qp.substitute([zero, v, u, zero])
    agh = Qp.substitute([u, v, u, v]) - agg - ahh
    return agg, ahh, agh, a


def dp4_fiber_form2(X, u, v) -> QuadraticForm:
    ctx = X.ctx
    agg, ahh, agh, a = _dp4_fiber_entries2(X)
    return QuadraticForm(ctx, (agg.evaluate((u, v)), ahh.evaluate((u, v)),
                               a, agh.evaluate((u, v)), ctx.zero, ctx.zero))


def _dp4_pi(ctx, x, which: int):
    """Primitive fiber coordinate of the point x under pi_1 or pi_2."""
    if which == 1:
        pair = (x[0], x[2])
        if ctx.is_zero(pair[0]) and ctx.is_zero(pair[1]):
            pair = (x[3], x[1])
    else:
        pair = (x[0], x[3])
        if ctx.is_zero(pair[0]) and ctx.is_zero(pair[1]):
            pair = (x[2], x[1])
    return make_primitive(ctx, pair)


def _dp4_excluded(ctx, x, d1, d2) -> bool:
    u1 = _dp4_pi(ctx, x, 1)
    u2 = _dp4_pi(ctx, x, 2)
    return (ctx.is_zero(_binform_eval(ctx, d1.coeffs, u1[0], u1[1]))
            or ctx.is_zero(_binform_eval(ctx, d2.coeffs, u2[0], u2[1])))


def _dp4_deltas(X):
    return fiber_discriminant(X), fiber_discriminant_dp4_pi2(X)


def _dp4_brute(X, B, workers):
    ctx = X.ctx
    pts = _dp4_brute_points(X, B, workers)
    try:
        d1, d2 = _dp4_deltas(X)
    except ValueError:
        # not in normal form: no fibration structure; nothing excluded
        return len(pts), len(pts)
    n_x = len(pts)
    n_u = sum(1 for x in pts if not _dp4_excluded(ctx, x, d1, d2))
    return n_x, n_u


def _dp4_brute_points(X, B, workers) -> set:
    ctx = X.ctx
    try:
        dp4_normal_form(X)
        normal = True
    except ValueError:
        normal = False
    if not normal:
        return _dp4_brute_generic(X, B)
    if ctx.kind == "Q" and B > 40:
        if workers == 1:
            return _dp4_brute_chunk((X.to_json(), B, 0, 1))
        args = [(X.to_json(), B, i, workers) for i in range(workers)]
        return set().union(*_pool_map(_dp4_brute_chunk, args, workers))
    return _dp4_brute_backsub(X, B)


def _dp4_brute_backsub(X, B) -> set:
    """Normal-form back-substitution over either field: enumerate
    (x0, x2, x3), force x1 = x2 x3 / x0, and solve a x4^2 = -Q exactly."""
    ctx = X.ctx
    Qp, a = dp4_normal_form(X)
    pts = set()
    elems = list(ctx.elements(B))

    def emit(x0, x1, x2, x3):
        qv = Qp.evaluate((x0, x1, x2, x3))
        for x4 in _quad_z_roots(ctx, a, qv):
            if not _nle(ctx, x4, B):
                continue
            v = (x0, x1, x2, x3, x4)
            if any(not ctx.is_zero(c) for c in v):
                pts.add(make_primitive(ctx, v))

    for x0 in elems:
        if ctx.is_zero(x0):
            for x1 in elems:
                for o in elems:
                    emit(ctx.zero, x1, o, ctx.zero)
                    emit(ctx.zero, x1, ctx.zero, o)
        else:
            for x2 in elems:
                for x3 in elems:
                    q, r = divmod(x2 * x3, x0)
                    if not ctx.is_zero(r) or not _nle(ctx, q, B):
                        continue
                    emit(x0, q, x2, x3)
    return pts


def _dp4_brute_generic(X, B) -> set:
    """Exhaustive scan for any DP4 model: enumerate x0..x3, solve both
    quadrics for x4 exactly and intersect the root sets."""
    ctx = X.ctx
    Q1, Q2 = X.parts["Q1"], X.parts["Q2"]
    pts = set()
    elems = list(ctx.elements(B))
    for x03 in itertools.product(elems, repeat=4):
        r1 = _last_var_roots(ctx, Q1, x03, elems)
        if not r1:
            continue
        r2 = _last_var_roots(ctx, Q2, x03, elems)
        if not r2:
            continue
        keys2 = {ctx.element_key(b) for b in r2}
        for x4 in r1:
            if ctx.element_key(x4) not in keys2 or not _nle(ctx, x4, B):
                continue
            v = x03 + (x4,)
            if any(not ctx.is_zero(c) for c in v):
                pts.add(make_primitive(ctx, v))
    return pts


def _last_var_roots(ctx, Qm, x03, dom):
    a = Qm.terms.get((0, 0, 0, 0, 2), ctx.zero)
    b = ctx.zero
    c = ctx.zero
    for e, co in Qm.terms.items():
        if e[4] == 2:
            continue
        term = co
        for xi, ei in zip(x03, e[:4]):
            for _ in range(ei):
                term = term * xi
        if e[4] == 1:
            b = b + term
        else:
            c = c + term
    return _quadratic_roots(ctx, a, b, c, dom)


def _quad_z_roots(ctx, a, c):
    """Roots of a z^2 + c = 0 with a nonzero and no linear term."""
    num = ctx.zero - c
    q, r = divmod(num, a)
    if not ctx.is_zero(r):
        return []
    rt = ctx.sqrt(q)
    if rt is None:
        return []
    if ctx.is_zero(rt):
        return [rt]
    return [rt, ctx.zero - rt]


def _dp4_brute_chunk(payload) -> set:
    """Normal-form numpy path over Q: x0 x1 = x2 x3 back-substitution and
    exact square solve for x4; x0 values split round-robin by part."""
    import numpy as np

    model_json, B, part, nparts = payload
    X = DelPezzoModel.from_json(model_json)
    ctx = X.ctx
    Qp, a = dp4_normal_form(X)
    qco = {e: int(c) for e, c in Qp.terms.items()}
    a = int(a)
    pts = set()
    rng = np.arange(-B, B + 1, dtype=np.int64)

    def emit(x0, x1, x2, x3, valid):
        acc = np.zeros(valid.shape, dtype=np.int64)
        for e, c in qco.items():
            v = np.full(valid.shape, c, dtype=np.int64)
            for base, ei in zip((x0, x1, x2, x3), e):
                for _ in range(ei):
                    v = v * base
            acc = acc + v
        num = -acc
        ok = valid & (num % a == 0)
        w = np.where(ok, num // a, -1)
        ok &= w >= 0
        r = np.zeros_like(w)
        r[ok] = np.sqrt(w[ok].astype(np.float64)).astype(np.int64)
        over = ok & (r * r > w)
        r[over] -= 1
        under = ok & ((r + 1) * (r + 1) <= w)
        r[under] += 1
        ok &= (r * r == w) & (r <= B)
        sh = ok.shape
        for i in zip(*np.nonzero(ok)):
            x4 = int(r[i])
            bpt = (int(np.broadcast_to(x0, sh)[i]),
                   int(np.broadcast_to(x1, sh)[i]),
                   int(np.broadcast_to(x2, sh)[i]),
                   int(np.broadcast_to(x3, sh)[i]))
            for s in ((x4, -x4) if x4 else (0,)):
                v = bpt + (s,)
                if any(v):
                    pts.add(make_primitive(ctx, v))

    x0_values = [v for i, v in enumerate(range(-B, B + 1))
                 if i % nparts == part]
    for x0 in x0_values:
        if x0 != 0:
            x2g, x3g = np.meshgrid(rng, rng, indexing="ij")
            prod = x2g * x3g
            div = prod % x0 == 0
            x1g = np.where(div, prod // np.int64(x0), 0)
            valid = div & (np.abs(x1g) <= B)
            emit(np.int64(x0), x1g, x2g, x3g, valid)
        else:
            x1g, og = np.meshgrid(rng, rng, indexing="ij")
            tr = np.ones_like(x1g, dtype=bool)
            emit(np.int64(0), x1g, og, np.zeros_like(og), tr)
            emit(np.int64(0), x1g, np.zeros_like(og), og, tr)
    # defensive exactness filter: drop anything off the first quadric
    Q1m = X.parts["Q1"]
    return {p for p in pts if ctx.is_zero(Q1m.evaluate(p))}


def count_fiber_dp4(X: DelPezzoModel, B: int, workers=None) -> CountRecord:
    """Exact N_X/N_U through the two conic fibrations: the two fiber
    heights multiply to at most H(x), so every point lies over a fiber
    coordinate of height <= sqrt(B) in at least one fibration; the passes
    are merged by set union on canonical points."""
    if X.variant != "DP4":
        raise ValueError("count_fiber_dp4 needs a DP4 model")
    if B < 1:
        raise ValueError("B < 1")
    workers = _workers_from_env(workers)
    t0 = time.monotonic()
    ctx = X.ctx
    dp4_normal_form(X)   # raises with guidance when not in normal form
    s0 = _height_floor(ctx, math.isqrt(B))
    pts = set()
    for which in (1, 2):
        for uv in _p1_stream(ctx, s0):
            m = height_proj(ctx, uv)
            pts |= _dp4_fiber_points(X, uv, which, B // m, B)
    d1, d2 = _dp4_deltas(X)
    n_x = len(pts)
    n_u = sum(1 for x in pts if not _dp4_excluded(ctx, x, d1, d2))
    return CountRecord(X.model_id, ctx.kind, B, "fiber", n_x, n_u,
                       time.monotonic() - t0, 0, workers)


def _dp4_fiber_points(X, uv, which, Rab, B) -> set:
    """Points of the pi_which fiber over primitive uv with H(x) <= B:
    x = (u a, v b, v a, u b, z) for pi_1, (u a, v b, u b, v a, z) for
    pi_2, where (a, b, z) runs over the fiber conic."""
    ctx = X.ctx
    u, v = uv
    F = dp4_fiber_form(X, u, v) if which == 1 else dp4_fiber_form2(X, u, v)
    a11, a22, a33, a12, _, _ = F.coeffs
    out = set()
    if ctx.kind == "Q" and Rab > 60:
        pairs = _dp4_fiber_pairs_numpy((int(a11), int(a22), int(a12),
                                        int(a33)), Rab, B)
    else:
        pairs = []
        elems = list(ctx.elements(Rab))
        for a in elems:
            for b in elems:
                c = a11 * a * a + a12 * a * b + a22 * b * b
                for z in _quad_z_roots(ctx, a33, c):
                    if _nle(ctx, z, B):
                        pairs.append((a, b, z))
    for a, b, z in pairs:
        if which == 1:
            x = (u * a, v * b, v * a, u * b, z)
        else:
            x = (u * a, v * b, u * b, v * a, z)
        if all(ctx.is_zero(cc) for cc in x):
            continue
        xp = make_primitive(ctx, x)
        if height_proj(ctx, xp) <= B:
            out.add(xp)
    return out


def _dp4_fiber_pairs_numpy(co, Rab, B):
    """(a, b, z) with a33 z^2 = -(a11 a^2 + a12 a b + a22 b^2), |a|, |b|
    <= Rab, |z| <= B; exact."""
    import numpy as np

    a11, a22, a12, a33 = co
    out = []
    bs = np.arange(-Rab, Rab + 1, dtype=np.int64)
    for a in range(-Rab, Rab + 1):
        c = a11 * a * a + a12 * a * bs + a22 * bs * bs
        num = -c
        ok = num % a33 == 0
        w = np.where(ok, num // a33, -1)
        ok &= w >= 0
        r = np.zeros_like(w)
        r[ok] = np.sqrt(w[ok].astype(np.float64)).astype(np.int64)
        over = ok & (r * r > w)
        r[over] -= 1
        under = ok & ((r + 1) * (r + 1) <= w)
        r[under] += 1
        ok &= (r * r == w) & (r <= B)
        for i in np.nonzero(ok)[0]:
            z = int(r[i])
            out.append((a, int(bs[i]), z))
            if z:
                out.append((a, int(bs[i]), -z))
    return out


# ---------------------------------------------------------------------------
# DP3 counting
# ---------------------------------------------------------------------------

def _dp3_brute(X, B, workers, exc_bound):
    ctx = X.ctx
    F = X.parts["F"]
    if ctx.kind == "Q" and B > 12:
        pts = _dp3_points_numpy(X, B, workers)
    else:
        pts = {x for x in proj_points_in_box(ctx, 4, B)
               if ctx.is_zero(F.evaluate(x))}
    lines = find_lines(X, exc_bound)
    n_x = len(pts)
    n_u = sum(1 for x in pts
              if not any(_on_line(ctx, rows, x) for rows in lines.curves))
    return n_x, n_u


def _on_line(ctx, rows, x) -> bool:
    """x in span(rows): all 3x3 minors of the stacked matrix vanish."""
    M = (list(rows[0]), list(rows[1]), list(x))
    n = len(x)
    for i, j, k in itertools.combinations(range(n), 3):
        d = (M[0][i] * (M[1][j] * M[2][k] - M[1][k] * M[2][j])
             - M[0][j] * (M[1][i] * M[2][k] - M[1][k] * M[2][i])
             + M[0][k] * (M[1][i] * M[2][j] - M[1][j] * M[2][i]))
        if not ctx.is_zero(d):
            return False
    return True


def _dp3_points_numpy(X, B, workers) -> set:
    if workers == 1:
        return _dp3_chunk((X.to_json(), B, 0, 1))
    args = [(X.to_json(), B, i, workers) for i in range(workers)]
    return set().union(*_pool_map(_dp3_chunk, args, workers))


def _dp3_chunk(payload) -> set:
    """Scan canonical (x0, x1, x2) slices; find the integer roots of the
    cubic in x3 by float root isolation plus exact verification."""
    import numpy as np

    model_json, B, part, nparts = payload
    X = DelPezzoModel.from_json(model_json)
    ctx = X.ctx
    F = X.parts["F"]
    groups = {0: {}, 1: {}, 2: {}, 3: {}}
    for e, c in F.terms.items():
        groups[e[3]][e[:3]] = int(c)
    pts = set()
    full = np.arange(-B, B + 1, dtype=np.int64)
    x0_values = [v for i, v in enumerate(range(0, B + 1))
                 if i % nparts == part]
    for x0 in x0_values:
        if x0 > 0:
            x1g, x2g = np.meshgrid(full, full, indexing="ij")
            _dp3_emit(ctx, pts, groups, x0, x1g, x2g, B)
        else:
            pos = np.arange(1, B + 1, dtype=np.int64)
            x1g, x2g = np.meshgrid(pos, full, indexing="ij")
            _dp3_emit(ctx, pts, groups, 0, x1g, x2g, B)
            x2g = np.arange(0, B + 1, dtype=np.int64).reshape(1, -1)
            x1g = np.zeros_like(x2g)
            _dp3_emit(ctx, pts, groups, 0, x1g, x2g, B)
    return {p for p in pts if ctx.is_zero(F.evaluate(p))}


def _dp3_emit(ctx, pts, groups, x0, x1g, x2g, B):
    import numpy as np

    def poly_eval(co):
        acc = np.zeros(x1g.shape, dtype=np.int64)
        for e, c in co.items():
            v = np.full(x1g.shape, c, dtype=np.int64)
            for base, ei in zip((np.int64(x0), x1g, x2g), e):
                for _ in range(ei):
                    v = v * base
            acc = acc + v
        return acc

    c3 = poly_eval(groups[3])
    c2 = poly_eval(groups[2])
    c1 = poly_eval(groups[1])
    c0 = poly_eval(groups[0])
    cands = []
    with np.errstate(all="ignore"):
        cubic = c3 != 0
        for root in _cubic_float_roots(c3.astype(np.float64),
                                       c2.astype(np.float64),
                                       c1.astype(np.float64),
                                       c0.astype(np.float64), cubic):
            r = np.where(np.isfinite(root), root, 0.0)
            cands.append(
                np.round(np.clip(r, -B - 1, B + 1)).astype(np.int64))
        quad = (c3 == 0) & (c2 != 0)
        disc = c1 * c1 - 4 * c2 * c0
        okq = quad & (disc >= 0)
        sq = np.zeros(x1g.shape, dtype=np.int64)
        sq[okq] = np.sqrt(disc[okq].astype(np.float64)).astype(np.int64)
        den = 2 * np.where(c2 == 0, 1, c2)
        for s in (1, -1):
            cands.append(np.where(okq, (s * sq - c1) // den, 0))
        lin = (c3 == 0) & (c2 == 0) & (c1 != 0)
        denl = np.where(c1 == 0, 1, c1)
        cands.append(np.where(lin, -c0 // denl, 0))
    seen = set()
    for cand in cands:
        for delta in (-2, -1, 0, 1, 2):
            w = cand + delta
            val = ((c3 * w + c2) * w + c1) * w + c0
            sel = (val == 0) & (np.abs(w) <= B)
            for i in zip(*np.nonzero(sel)):
                v = (int(x0), int(x1g[i]), int(x2g[i]), int(w[i]))
                if any(v) and v not in seen:
                    seen.add(v)
                    pts.add(make_primitive(ctx, v))
    zero_rows = (c3 == 0) & (c2 == 0) & (c1 == 0) & (c0 == 0)
    for i in zip(*np.nonzero(zero_rows)):
        base = (int(x0), int(x1g[i]), int(x2g[i]))
        if not any(base):
            pts.add((0, 0, 0, 1))
            continue
        for w in range(-B, B + 1):
            pts.add(make_primitive(ctx, base + (w,)))


def _cubic_float_roots(a, b, c, d, mask):
    """Float approximations of the real roots of a w^3 + b w^2 + c w + d
    (vectorized; only entries where mask holds are used downstream)."""
    import numpy as np

    a = np.where(mask, a, 1.0)
    p = (3 * a * c - b * b) / (3 * a * a)
    q = (2 * b ** 3 - 9 * a * b * c + 27 * a * a * d) / (27 * a ** 3)
    shift = -b / (3 * a)
    disc = (q / 2) ** 2 + (p / 3) ** 3
    roots = []
    sq = np.sqrt(np.maximum(disc, 0))
    roots.append(np.cbrt(-q / 2 + sq) + np.cbrt(-q / 2 - sq) + shift)
    pm = np.where(p < 0, p, -1.0)
    r = 2 * np.sqrt(-pm / 3)
    denom = np.where(pm * r == 0, -1.0, pm * r)
    arg = np.clip(3 * q / denom, -1, 1)
    theta = np.arccos(arg) / 3
    for k in range(3):
        roots.append(r * np.cos(theta - 2 * np.pi * k / 3) + shift)
    return roots


# ---------------------------------------------------------------------------
# DP2 / DP1 counting (weighted models)
# ---------------------------------------------------------------------------

def _dp2_brute(X, B, exc_bound):
    ctx = X.ctx
    g = X.parts["g"]
    bit = find_bitangents(X, exc_bound)
    n_x = n_u = 0
    B2 = B * B
    elems = list(ctx.elements(B))
    for uvw in itertools.product(elems, repeat=3):
        if all(ctx.is_zero(c) for c in uvw):
            continue
        val = g.evaluate(uvw)
        y = ctx.sqrt(val)
        if y is None:
            continue
        cands = {ctx.element_key(y): y}
        my = ctx.zero - y
        cands[ctx.element_key(my)] = my
        on_bit = any(ctx.is_zero(c[0] * uvw[0] + c[1] * uvw[1]
                                 + c[2] * uvw[2]) for c in bit.curves)
        for yy in cands.values():
            if not _nle(ctx, yy, B2):
                continue
            pt = (yy,) + tuple(uvw)
            if not is_weighted_normalized(ctx, pt, (2, 1, 1, 1)):
                continue
            n_x += 1
            if not on_bit:
                n_u += 1
    return n_x, n_u


def _dp1_brute(X, B):
    ctx = X.ctx
    g = X.parts["g"]
    h = X.parts["h"]
    n = 0
    B2, B3 = B * B, B * B * B
    elems = list(ctx.elements(B))
    for uv in itertools.product(elems, repeat=2):
        if all(ctx.is_zero(c) for c in uv):
            continue   # the anticanonical base point is excluded
        gv = g.evaluate(uv)
        hv = h.evaluate(uv)
        for x in ctx.elements(B2):
            val = x * x * x + gv * x + hv
            y = ctx.sqrt(val)
            if y is None:
                continue
            cands = {ctx.element_key(y): y}
            my = ctx.zero - y
            cands[ctx.element_key(my)] = my
            for yy in cands.values():
                if not _nle(ctx, yy, B3):
                    continue
                pt = (yy, x) + tuple(uv)
                if is_weighted_normalized(ctx, pt, (3, 2, 1, 1)):
                    n += 1
    return n, n


# ---------------------------------------------------------------------------
# congruence classes
# ---------------------------------------------------------------------------

def count_vclasses(X: DelPezzoModel, d) -> CongruenceClassCount:
    """Exact count of primitive residue triples mod d where both quadrics
    vanish, plus the orbit count under the unit action of (O_K/d)^x."""
    if X.variant != "DP5CB":
        raise ValueError("count_vclasses needs a DP5CB model")
    ctx = X.ctx
    N = ctx.norm(d)
    if N > 10 ** 4:
        raise ValueError("modulus too large (norm > 10^4)")
    if N <= 1:
        return CongruenceClassCount(d, 1, 1)
    if ctx.kind == "Q":
        mod = abs(int(d))
        tilde = _vclasses_z(X, mod)
        units = [u for u in range(1, mod) if math.gcd(u, mod) == 1]
        orbit_keys = {min(tuple((u * xi) % mod for xi in x) for u in units)
                      for x in tilde}
        return CongruenceClassCount(d, len(tilde), len(orbit_keys))
    Q1, Q2 = X.parts["Q1"], X.parts["Q2"]
    residues = list(ctx.residues(d))
    units = [r for r in residues if ctx.is_unit(ctx.gcd(r, d))]
    tilde = []
    for x in itertools.product(residues, repeat=3):
        gg = d
        for xi in x:
            gg = ctx.gcd(gg, xi)
        if not ctx.is_unit(gg):
            continue
        if ctx.is_zero(ctx.mod(Q1.evaluate(x), d)) and \
                ctx.is_zero(ctx.mod(Q2.evaluate(x), d)):
            tilde.append(x)
    orbit_keys = set()
    for x in tilde:
        orbit_keys.add(min(tuple(ctx.element_key(ctx.mod(u * xi, d))
                                 for xi in x) for u in units))
    return CongruenceClassCount(d, len(tilde), len(orbit_keys))


def _vclasses_z(X, N: int):
    import numpy as np

    c1 = tuple(int(c) % N for c in _quad_coeffs6(X.parts["Q1"]))
    c2 = tuple(int(c) % N for c in _quad_coeffs6(X.parts["Q2"]))
    x1, x2 = np.meshgrid(np.arange(N, dtype=np.int64),
                         np.arange(N, dtype=np.int64), indexing="ij")
    g12 = np.gcd(np.gcd(x1, np.int64(N)), np.gcd(x2, np.int64(N)))
    out = []
    for x0 in range(N):
        def q(co):
            a11, a22, a33, a12, a13, a23 = co
            return (a11 * x0 * x0 + a22 * x1 * x1 + a33 * x2 * x2
                    + a12 * x0 * x1 + a13 * x0 * x2 + a23 * x1 * x2) % N
        sel = (q(c1) == 0) & (q(c2) == 0)
        sel &= np.gcd(np.int64(math.gcd(x0, N)), g12) == 1
        for i, j in zip(*np.nonzero(sel)):
            out.append((x0, int(x1[i, j]), int(x2[i, j])))
    return out


# ---------------------------------------------------------------------------
# exponent fitting
# ---------------------------------------------------------------------------

def fit_exponent(records) -> ExponentFit:
    """Least-squares fit of log N against log B over CountRecords (using
    N_U) or plain (B, N) pairs."""
    import numpy as np

    pairs = []
    for r in records:
        if isinstance(r, CountRecord):
            pairs.append((r.B, r.n_u))
        else:
            pairs.append((int(r[0]), int(r[1])))
    if len(pairs) < 3 or len({b for b, _ in pairs}) < 3:
        raise ValueError("need at least 3 records with distinct B")
    if any(n <= 0 for _, n in pairs):
        raise ValueError("all counts must be positive")
    x = np.log([float(b) for b, _ in pairs])
    y = np.log([float(n) for _, n in pairs])
    A = np.vstack([x, np.ones_like(x)]).T
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope, intercept = float(sol[0]), float(sol[1])
    res = tuple(float(v) for v in (y - A @ sol))
    return ExponentFit(slope, intercept, res)

# ---------------------------------------------------------------------------
# hyperplane-section point counts (study tool; never used for N_U)
# ---------------------------------------------------------------------------

def _int_cubic_roots(a, b, c, d):
    """Integer roots of a y^3 + b y^2 + c y + d (not identically zero)."""
    if a == 0:
        if b == 0:
            if c == 0:
                return []
            return [-d // c] if d % c == 0 else []
        roots = []
        disc = c * c - 4 * b * d
        if disc >= 0:
            r = math.isqrt(disc)
            if r * r == disc:
                for s in (r, -r):
                    num = s - c
                    if num % (2 * b) == 0:
                        roots.append(num // (2 * b))
        return sorted(set(roots))
    import numpy as np

    approx = np.roots([float(a), float(b), float(c), float(d)])
    cands = set()
    for z in approx:
        if abs(z.imag) < 1.0:
            r = int(round(z.real))
            cands.update(range(r - 2, r + 3))
    return sorted(y for y in cands
                  if ((a * y + b) * y + c) * y + d == 0)


def count_section_points(X: DelPezzoModel, c, B: int) -> int:
    """Points of a DP3 surface over Q on the hyperplane section c.x = 0
    with height <= B, exactly.  Needs a unit coefficient in c (the section
    is swept by the two remaining free coordinates)."""
    if X.variant != "DP3" or X.ctx.kind != "Q":
        raise ValueError("section counts are implemented for DP3 over Q")
    if B < 1:
        raise ValueError("B < 1")
    ctx = X.ctx
    c = make_primitive(ctx, c)
    k = next((i for i in range(4) if abs(c[i]) == 1), None)
    if k is None:
        raise ValueError("hyperplane needs a coordinate with unit "
                         "coefficient")
    free = [i for i in range(4) if i != k]
    F = X.parts["F"]
    if B > 40:
        return len(_section_scan_numpy(X, c, k, free, B))

    def point(x_a, x_b, y):
        x = [0] * 4
        x[free[0]], x[free[1]], x[free[2]] = x_a, x_b, y
        x[k] = -c[k] * sum(c[i] * x[i] for i in free)
        return tuple(x)

    pts = set()
    for x_a in range(-B, B + 1):
        for x_b in range(-B, B + 1):
            # interpolate the cubic in y from values at y = 0, 1, -1, 2
            v0, v1, vm1, v2 = (int(F.evaluate(point(x_a, x_b, y)))
                               for y in (0, 1, -1, 2))
            d0 = v0
            b2 = (v1 + vm1 - 2 * v0) // 2
            a3 = ((v2 - 4 * b2 - d0) // 2 - (v1 - b2 - d0)) // 3
            c1 = v1 - b2 - d0 - a3
            if a3 == b2 == c1 == d0 == 0:
                roots = range(-B, B + 1)   # the whole line lies on X
            else:
                roots = _int_cubic_roots(a3, b2, c1, d0)
            for y in roots:
                if abs(y) > B:
                    continue
                x = point(x_a, x_b, y)
                if abs(x[k]) > B or all(v == 0 for v in x):
                    continue
                assert F.evaluate(x) == 0
                pts.add(make_primitive(ctx, x))
    return len(pts)


def _section_scan_numpy(X, c, k, free, B) -> set:
    """Vectorized row scan of the section curve: for each value of the
    first free coordinate, isolate the integer roots of the cubic in the
    last free coordinate (float roots plus exact verification)."""
    import numpy as np
    from .binforms import MultiPoly

    ctx = X.ctx
    y = [MultiPoly.variable(ctx, 3, i) for i in range(3)]
    coords = [None] * 4
    for pos, i in enumerate(free):
        coords[i] = y[pos]
    xk = MultiPoly(ctx, 3)
    for pos, i in enumerate(free):
        xk = xk + y[pos].scale(-c[k] * c[i])
    coords[k] = xk
    T = X.parts["F"].substitute(coords)
    groups = {0: {}, 1: {}, 2: {}, 3: {}}
    for e, co in T.terms.items():
        groups[e[2]][e[:2]] = int(co)
    pts = set()
    vg = np.arange(-B, B + 1, dtype=np.int64)

    def poly_eval(co, u):
        acc = np.zeros(vg.shape, dtype=np.int64)
        for e, cc in co.items():
            acc = acc + cc * np.int64(u) ** e[0] * vg ** e[1]
        return acc

    ck0, ck1, ck2 = (-c[k] * c[i] for i in free)

    def emit(u, v, w):
        x = [0] * 4
        x[free[0]], x[free[1]], x[free[2]] = u, v, w
        x[k] = ck0 * u + ck1 * v + ck2 * w
        if abs(x[k]) <= B and any(x):
            pts.add(make_primitive(ctx, tuple(x)))

    for u in range(-B, B + 1):
        c3 = poly_eval(groups[3], u)
        c2 = poly_eval(groups[2], u)
        c1 = poly_eval(groups[1], u)
        c0 = poly_eval(groups[0], u)
        cands = []
        with np.errstate(all="ignore"):
            cubic = c3 != 0
            for root in _cubic_float_roots(c3.astype(np.float64),
                                           c2.astype(np.float64),
                                           c1.astype(np.float64),
                                           c0.astype(np.float64), cubic):
                r = np.where(np.isfinite(root), root, 0.0)
                cands.append(
                    np.round(np.clip(r, -B - 1, B + 1)).astype(np.int64))
            quad = (c3 == 0) & (c2 != 0)
            disc = c1 * c1 - 4 * c2 * c0
            okq = quad & (disc >= 0)
            sq = np.zeros(vg.shape, dtype=np.int64)
            sq[okq] = np.sqrt(disc[okq].astype(np.float64)).astype(np.int64)
            den = 2 * np.where(c2 == 0, 1, c2)
            for sgn in (1, -1):
                cands.append(np.where(okq, (sgn * sq - c1) // den, 0))
            lin = (c3 == 0) & (c2 == 0) & (c1 != 0)
            denl = np.where(c1 == 0, 1, c1)
            cands.append(np.where(lin, -c0 // denl, 0))
        seen = set()
        for cand in cands:
            for delta in (-2, -1, 0, 1, 2):
                w = cand + delta
                val = ((c3 * w + c2) * w + c1) * w + c0
                sel = (val == 0) & (np.abs(w) <= B)
                for i in np.nonzero(sel)[0]:
                    key = (int(vg[i]), int(w[i]))
                    if key not in seen:
                        seen.add(key)
                        emit(u, *key)
        zero = (c3 == 0) & (c2 == 0) & (c1 == 0) & (c0 == 0)
        for i in np.nonzero(zero)[0]:
            for w in range(-B, B + 1):
                emit(u, int(vg[i]), w)
    return pts
