"""Binary forms of degree <= 6 and multivariate small-value counting.

Conventions (pinned once, used everywhere):
* a BinaryForm of degree d stores coeffs[i] = coefficient of s^i t^(d-i),
  lowest s-degree first, matching the serialization order;
* resultants are Sylvester-matrix determinants;
* discriminants come from the universal integer discriminant polynomial of
  each degree (computed symbolically once and cached), so they remain correct
  when the leading coefficient vanishes and in odd characteristic.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from .globalfield import FieldContext
from .lattices import mat_det


# ---------------------------------------------------------------------------
# sparse multivariate polynomials over O_K
# ---------------------------------------------------------------------------

class MultiPoly:
    """Sparse polynomial in n variables with O_K coefficients."""

    __slots__ = ("ctx", "nvars", "terms")

    def __init__(self, ctx: FieldContext, nvars: int, terms=None):
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "nvars", nvars)
        clean = {}
        for exps, c in (terms or {}).items():
            if not ctx.is_zero(c):
                clean[tuple(exps)] = clean.get(tuple(exps), ctx.zero) + c \
                    if tuple(exps) in clean else c
        clean = {e: c for e, c in clean.items() if not ctx.is_zero(c)}
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("MultiPoly is immutable")

    @classmethod
    def constant(cls, ctx, nvars, c):
        return cls(ctx, nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, ctx, nvars, i):
        e = [0] * nvars
        e[i] = 1
        return cls(ctx, nvars, {tuple(e): ctx.one})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def __eq__(self, other):
        return (isinstance(other, MultiPoly) and self.nvars == other.nvars
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other):
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t[e] + c if e in t else c
        return MultiPoly(self.ctx, self.nvars, t)

    def __neg__(self):
        return MultiPoly(self.ctx, self.nvars,
                         {e: -c if isinstance(c, int) else (self.ctx.zero - c)
                          for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        t = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                t[e] = t[e] + prod if e in t else prod
        return MultiPoly(self.ctx, self.nvars, t)

    def scale(self, c):
        return MultiPoly(self.ctx, self.nvars,
                         {e: c * v for e, v in self.terms.items()})

    def partial(self, i: int) -> "MultiPoly":
        ctx = self.ctx
        t = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            ee = list(e)
            ee[i] -= 1
            t[tuple(ee)] = ctx.from_int(e[i]) * c
        return MultiPoly(ctx, self.nvars, t)

    def evaluate(self, point):
        ctx = self.ctx
        acc = ctx.zero
        for e, c in self.terms.items():
            term = c
            for xi, ei in zip(point, e):
                for _ in range(ei):
                    term = term * xi
            acc = acc + term
        return acc

    def substitute(self, polys: list["MultiPoly"]) -> "MultiPoly":
        """Plug polynomials (in m new vars) in for the variables."""
        ctx = self.ctx
        m = polys[0].nvars
        out = MultiPoly(ctx, m)
        for e, c in self.terms.items():
            term = MultiPoly.constant(ctx, m, c)
            for p, ei in zip(polys, e):
                for _ in range(ei):
                    term = term * p
            out = out + term
        return out

    def content(self):
        return self.ctx.content(list(self.terms.values()))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            mono = "*".join(f"x{i}^{k}" if k > 1 else f"x{i}"
                            for i, k in enumerate(e) if k)
            c = self.terms[e]
            parts.append(f"({c!r})" + ("*" + mono if mono else ""))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# binary forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryForm:
    """Homogeneous binary form; coeffs[i] multiplies s^i t^(d-i)."""

    ctx: FieldContext
    degree: int
    coeffs: tuple

    def __post_init__(self):
        if self.degree > 6:
            raise ValueError("degrees above 6 are not supported")
        cs = tuple(self.coeffs)
        if len(cs) != self.degree + 1:
            raise ValueError("need degree+1 coefficients")
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def from_coeffs(cls, ctx, coeffs):
        coeffs = [c if not isinstance(c, int) or ctx.kind == "Q"
                  else ctx.from_int(c) for c in coeffs]
        return cls(ctx, len(coeffs) - 1, tuple(coeffs))

    def is_zero(self) -> bool:
        return all(self.ctx.is_zero(c) for c in self.coeffs)

    def evaluate(self, s, t):
        ctx = self.ctx
        acc = ctx.zero
        sp = ctx.one
        # powers of s ascending; t descending
        tp = [ctx.one]
        for _ in range(self.degree):
            tp.append(tp[-1] * t)
        for i, c in enumerate(self.coeffs):
            if not ctx.is_zero(c):
                acc = acc + c * sp * tp[self.degree - i]
            sp = sp * s
        return acc

    def partial_s(self) -> "BinaryForm":
        ctx = self.ctx
        cs = [ctx.from_int(i) * self.coeffs[i] for i in range(1, self.degree + 1)]
        return BinaryForm(ctx, self.degree - 1, tuple(cs))

    def partial_t(self) -> "BinaryForm":
        ctx = self.ctx
        cs = [ctx.from_int(self.degree - i) * self.coeffs[i]
              for i in range(self.degree)]
        return BinaryForm(ctx, self.degree - 1, tuple(cs))

    def to_multipoly(self) -> MultiPoly:
        return MultiPoly(self.ctx, 2,
                         {(i, self.degree - i): c
                          for i, c in enumerate(self.coeffs)
                          if not self.ctx.is_zero(c)})

    def content(self):
        return self.ctx.content(self.coeffs)


# ---------------------------------------------------------------------------
# resultants and discriminants
# ---------------------------------------------------------------------------

def resultant(f: BinaryForm, g: BinaryForm):
    """Sylvester-matrix resultant of f and g (in the variable s, t = 1)."""
    ctx = f.ctx
    m, n = f.degree, g.degree
    if m == 0 or n == 0:
        # res(const, g) = const^deg(g)
        if m == 0:
            return f.coeffs[0] ** n
        return g.coeffs[0] ** m
    size = m + n
    rows = []
    fd = list(reversed(f.coeffs))  # leading first
    gd = list(reversed(g.coeffs))
    for i in range(n):
        rows.append([ctx.zero] * i + fd + [ctx.zero] * (size - i - m - 1))
    for i in range(m):
        rows.append([ctx.zero] * i + gd + [ctx.zero] * (size - i - n - 1))
    return mat_det(ctx, rows)


@functools.lru_cache(maxsize=None)
def _universal_discriminant(d: int):
    """Integer-coefficient discriminant polynomial in a_0..a_d, as a
    monomial dict {exponent tuple: int}.  Valid in any characteristic and
    when the leading coefficient vanishes."""
    import sympy

    a = sympy.symbols(f"a0:{d + 1}")
    x = sympy.Symbol("x")
    f = sum(a[i] * x ** i for i in range(d + 1))
    disc = sympy.Poly(sympy.discriminant(f, x), *a)
    return {tuple(int(e) for e in mono): int(c)
            for mono, c in disc.terms()}


def discriminant(f: BinaryForm):
    """Discriminant of the binary form (zero iff a repeated projective root).

    Uses the universal discriminant polynomial, so the result is the correct
    specialization even when coeffs[d] = 0 (root at infinity) and over Fq(t).
    """
    if f.degree < 2:
        raise ValueError("discriminant needs degree >= 2")
    ctx = f.ctx
    # universal poly is in a_i = coefficient of s^i (t = 1), our coeffs order
    table = _universal_discriminant(f.degree)
    acc = ctx.zero
    for exps, c in table.items():
        term = ctx.from_int(c)
        if ctx.is_zero(term):
            continue
        for coeff, e in zip(f.coeffs, exps):
            for _ in range(e):
                term = term * coeff
        acc = acc + term
    return acc


def is_separable(f: BinaryForm) -> bool:
    return not f.ctx.is_zero(discriminant(f))


# ---------------------------------------------------------------------------
# gcds of univariate polynomials / binary forms over O_K
# ---------------------------------------------------------------------------

def _univ_primitive(ctx, cs):
    cs = list(cs)
    while cs and ctx.is_zero(cs[-1]):
        cs.pop()
    if not cs:
        return cs
    g = ctx.content(cs)
    cs = [ctx.exact_div(c, g) for c in cs]
    u = ctx.normalize_unit_scalar(cs[-1])
    return [u * c for c in cs]


def _univ_prem(ctx, a, b):
    """Pseudo-remainder of a by b (lists, lowest degree first)."""
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    while len(a) - 1 >= db and a:
        if ctx.is_zero(a[-1]):
            a.pop()
            continue
        la = a[-1]
        shift = len(a) - 1 - db
        a = [lb * c for c in a]
        for j in range(db + 1):
            a[shift + j] = a[shift + j] - la * b[j]
        while a and ctx.is_zero(a[-1]):
            a.pop()
    return a


def univ_gcd(ctx, a, b):
    """Primitive gcd of univariate polynomials over O_K (UFD Euclid)."""
    a = _univ_primitive(ctx, a)
    b = _univ_primitive(ctx, b)
    while b:
        r = _univ_prem(ctx, a, b)
        a, b = b, _univ_primitive(ctx, r)
    return a


def binform_gcd(f: BinaryForm, g: BinaryForm):
    """gcd of two nonzero binary forms, as (t_multiplicity, univariate gcd
    coefficients in s); the gcd is t^mult * homogenization of the list."""
    ctx = f.ctx
    if f.is_zero() or g.is_zero():
        raise ValueError("gcd of zero form")

    def split(h):
        cs = list(h.coeffs)
        top = max(i for i, c in enumerate(cs) if not ctx.is_zero(c))
        return h.degree - top, cs[: top + 1]

    tf, uf = split(f)
    tg, ug = split(g)
    return min(tf, tg), univ_gcd(ctx, uf, ug)


def binform_gcd_degree(f: BinaryForm, g: BinaryForm) -> int:
    tmult, u = binform_gcd(f, g)
    return tmult + (len(u) - 1 if u else 0)


def _form_from_parts(ctx, tmult: int, u) -> BinaryForm:
    """Rebuild the binary form t^tmult * homogenization(u)."""
    deg = tmult + len(u) - 1
    coeffs = list(u) + [ctx.zero] * tmult
    return BinaryForm(ctx, deg, tuple(coeffs))


def has_repeated_root(f: BinaryForm) -> bool:
    """True iff f has a repeated root over the algebraic closure.

    Via gcd(f, df/ds, df/dt); identically-zero partials (possible in small
    characteristic) impose no condition, and both vanishing means f is a
    p-th power, hence inseparable."""
    ctx = f.ctx
    parts = [p for p in (f.partial_s(), f.partial_t()) if not p.is_zero()]
    if not parts:
        return True
    g = f
    for p in parts:
        tm, u = binform_gcd(g, p)
        g = _form_from_parts(ctx, tm, u if u else [ctx.one])
        if g.degree == 0:
            return False
    return g.degree >= 1


# ---------------------------------------------------------------------------
# counting operations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmallValueCount:
    count: int          # x with 0 < N(G(x)) <= S
    zeros: int          # x with G(x) = 0 (reported separately)


def count_small_values(G: MultiPoly, R, S) -> SmallValueCount:
    """#{x integral, sup|x| <= R, 0 < N(G(x)) <= S}; zeros side-channelled."""
    if G.is_zero():
        raise ValueError("G must be nonzero")
    ctx = G.ctx
    cnt = zeros = 0
    for x in itertools.product(list(ctx.elements(R)), repeat=G.nvars):
        v = G.evaluate(x)
        if ctx.is_zero(v):
            zeros += 1
        elif ctx.absval(v) <= S:
            cnt += 1
    return SmallValueCount(cnt, zeros)


@dataclass(frozen=True)
class PairCount:
    count: int          # primitive pairs with 0 < N(f(s,t)) <= S
    zeros: int          # primitive pairs with f(s,t) = 0


def _annulus_pairs(ctx, R):
    """Primitive (s,t) with sup norm in the annulus (R/2, R] over Q, or
    exactly R over Fq(t) (R a power of q); one canonical pair per unit orbit.
    """
    from .globalfield import make_primitive

    R = int(R)
    lo = R // 2  # exclusive lower edge over Q
    for s, t in itertools.product(list(ctx.elements(R)), repeat=2):
        if ctx.is_zero(s) and ctx.is_zero(t):
            continue
        m = max(ctx.absval(s), ctx.absval(t))
        if ctx.kind == "Q":
            if not (lo < m <= R):
                continue
        elif m != R:
            continue
        if not ctx.is_unit(ctx.content((s, t))):
            continue
        if make_primitive(ctx, (s, t)) != (s, t):
            continue
        yield s, t


def count_separable_small(f: BinaryForm, R, S) -> PairCount:
    """Primitive pairs in the height annulus with N(f(s,t)) <= S."""
    if not is_separable(f):
        raise ValueError("form must be separable")
    ctx = f.ctx
    cnt = zeros = 0
    for s, t in _annulus_pairs(ctx, R):
        v = f.evaluate(s, t)
        if ctx.is_zero(v):
            zeros += 1
        elif ctx.absval(v) <= S:
            cnt += 1
    return PairCount(cnt, zeros)


def count_representations(Q: BinaryForm, gamma, R) -> int:
    """#{(s,t): sup|(s,t)| <= R, Q(s,t) = gamma} for nondegenerate Q."""
    ctx = Q.ctx
    if Q.degree != 2:
        raise ValueError("Q must be a binary quadratic")
    if ctx.is_zero(discriminant(Q)):
        raise ValueError("Q must have nonzero discriminant")
    if ctx.is_zero(gamma):
        raise ValueError("gamma = 0 is routed to the zero side channels")
    cnt = 0
    elems = list(ctx.elements(R))
    for s in elems:
        for t in elems:
            if Q.evaluate(s, t) == gamma:
                cnt += 1
    return cnt


@dataclass(frozen=True)
class IdealCount:
    count: int
    zeros: int


def count_in_ideal(Q: BinaryForm, R, S, a) -> IdealCount:
    """Primitive pairs with 0 < N(Q(s,t)) <= S and a | Q(s,t)."""
    ctx = Q.ctx
    if Q.degree != 2:
        raise ValueError("Q must be a binary quadratic")
    if has_repeated_root(Q):
        raise ValueError("Q must be square-free")
    cnt = zeros = 0
    for s, t in itertools.product(list(ctx.elements(R)), repeat=2):
        if (ctx.is_zero(s) and ctx.is_zero(t)) or \
                not ctx.is_unit(ctx.content((s, t))):
            continue
        v = Q.evaluate(s, t)
        if ctx.is_zero(v):
            zeros += 1
        elif ctx.absval(v) <= S and ctx.is_zero(v % a):
            cnt += 1
    return IdealCount(cnt, zeros)
