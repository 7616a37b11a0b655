"""Del Pezzo surface models of degrees 1-5, smoothness certification,
fiber discriminants, exceptional-curve search and section classification.

Model variants and their defining data:
  DP1   y^2 = x^3 + g(u,v) x + h(u,v)  in P(3,2,1,1); g deg 4, h deg 6
  DP2   y^2 = g(u,v,w)                 in P(2,1,1,1); g a ternary quartic
  DP3   F(x0..x3) = 0                  cubic surface in P^3
  DP4   Q1 = Q2 = 0                    quadric intersection in P^4
  DP5CB s Q1(x) + t Q2(x) = 0          conic bundle in P^1 x P^2

Smoothness is certified one-sidedly through a good reduction: an exhaustive
Jacobian scan over a finite field (F_p for Q-models; F_{q^k} for models over
Fq(t) with constant coefficients).  SINGULAR comes with a rational witness
point; UNDECIDED is an honest third state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .ffield import FiniteField, gf, is_prime
from .globalfield import (FieldContext, context_from_json, make_primitive)
from .lattices import OKLattice, mat_det, orthogonal_lattice
from .binforms import BinaryForm, MultiPoly, univ_gcd
from .quadforms import QuadraticForm


_VARIANT_PARTS = {
    "DP1": (("g", 2, 4), ("h", 2, 6)),
    "DP2": (("g", 3, 4),),
    "DP3": (("F", 4, 3),),
    "DP4": (("Q1", 5, 2), ("Q2", 5, 2)),
    "DP5CB": (("Q1", 3, 2), ("Q2", 3, 2)),
}

EXCEPTIONAL_CURVE_COUNTS = {1: 240, 2: 56, 3: 27, 4: 16, 5: 10}


@dataclass(frozen=True)
class DelPezzoModel:
    ctx: FieldContext
    variant: str
    parts: dict
    model_id: str = ""

    def __post_init__(self):
        if self.variant not in _VARIANT_PARTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        spec = _VARIANT_PARTS[self.variant]
        if set(self.parts) != {name for name, _, _ in spec}:
            raise ValueError(f"{self.variant} needs parts "
                             f"{[name for name, _, _ in spec]}")
        ch = self.ctx.char
        if self.variant in ("DP1", "DP2", "DP3") and ch in (2, 3):
            raise ValueError(f"{self.variant} requires characteristic not in "
                             "{2, 3}")
        for name, nvars, deg in spec:
            p = self.parts[name]
            if p.nvars != nvars:
                raise ValueError(f"part {name} must have {nvars} variables")
            if p.is_zero():
                raise ValueError(f"part {name} must be nonzero")
            for e in p.terms:
                if sum(e) != deg:
                    raise ValueError(
                        f"part {name}: monomial {e} has degree {sum(e)}, "
                        f"expected {deg}")

    @property
    def degree(self) -> int:
        return {"DP1": 1, "DP2": 2, "DP3": 3, "DP4": 4, "DP5CB": 5}[self.variant]

    # -- serialization -------------------------------------------------------
    @classmethod
    def from_json(cls, d: dict) -> "DelPezzoModel":
        ctx = context_from_json(d["field"])
        variant = d["variant"]
        if variant not in _VARIANT_PARTS:
            raise ValueError(f"unknown variant {variant!r}")
        spec = _VARIANT_PARTS[variant]
        coeffs = d["coeffs"]
        parts = {}
        if len(spec) == 1 and not any(isinstance(v, dict)
                                      for v in coeffs.values()):
            coeffs = {spec[0][0]: coeffs}
        for name, nvars, deg in spec:
            if name not in coeffs:
                raise ValueError(f"missing part {name!r}")
            terms = {}
            for key, val in coeffs[name].items():
                exps = tuple(int(x) for x in key.split(","))
                if len(exps) != nvars or any(e < 0 for e in exps):
                    raise ValueError(f"part {name}: bad monomial key {key!r}")
                if sum(exps) != deg:
                    raise ValueError(f"part {name}: monomial {key!r} has "
                                     f"degree {sum(exps)}, expected {deg}")
                terms[exps] = ctx.parse_elem(val)
            parts[name] = MultiPoly(ctx, nvars, terms)
        return cls(ctx, variant, parts, model_id=d.get("model_id", ""))

    def to_json(self) -> dict:
        ctx = self.ctx
        fld = {"field": "Q"} if ctx.kind == "Q" else \
            {"field": "Fq(t)", "q": ctx.q}
        coeffs = {}
        for name, poly in self.parts.items():
            coeffs[name] = {",".join(map(str, e)): ctx.elem_to_json(c)
                            for e, c in sorted(poly.terms.items())}
        return {"field": fld, "variant": self.variant, "coeffs": coeffs,
                "model_id": self.model_id}


def quadric_form3(ctx, poly: MultiPoly) -> QuadraticForm:
    """Ternary MultiPoly quadric -> QuadraticForm coefficient order."""
    t = poly.terms
    z = ctx.zero
    return QuadraticForm(ctx, (
        t.get((2, 0, 0), z), t.get((0, 2, 0), z), t.get((0, 0, 2), z),
        t.get((1, 1, 0), z), t.get((1, 0, 1), z), t.get((0, 1, 1), z)))


# ---------------------------------------------------------------------------
# finite-field reductions
# ---------------------------------------------------------------------------

class ReducedPoly:
    """Reduction of a MultiPoly to a small finite field (codes)."""

    __slots__ = ("field", "nvars", "terms")

    def __init__(self, fieldF: FiniteField, nvars: int, terms: dict):
        self.field = fieldF
        self.nvars = nvars
        self.terms = {e: c for e, c in terms.items() if c != 0}

    @classmethod
    def reduce(cls, poly: MultiPoly, fieldF: FiniteField) -> "ReducedPoly":
        ctx = poly.ctx
        terms = {}
        if ctx.kind == "Q":
            for e, c in poly.terms.items():
                terms[e] = int(c) % fieldF.p if fieldF.k == 1 else \
                    fieldF.from_int(int(c))
        else:
            base = gf(ctx.q)
            for e, c in poly.terms.items():
                if c.deg > 0:
                    raise ValueError("reduction scan needs constant "
                                     "coefficients over Fq(t)")
                code = c.coeffs[0] if c.coeffs else 0
                terms[e] = fieldF.embed(code, base)
        return cls(fieldF, poly.nvars, terms)

    def is_zero(self) -> bool:
        return not self.terms

    def evaluate(self, point) -> int:
        F = self.field
        acc = 0
        for e, c in self.terms.items():
            v = c
            for xi, ei in zip(point, e):
                for _ in range(ei):
                    v = F.mul(v, xi)
            acc = F.add(acc, v)
        return acc

    def partial(self, i: int) -> "ReducedPoly":
        F = self.field
        t = {}
        for e, c in self.terms.items():
            if e[i] == 0:
                continue
            ee = list(e)
            ee[i] -= 1
            t2 = tuple(ee)
            v = F.mul(F.from_int(e[i]), c)
            t[t2] = F.add(t.get(t2, 0), v)
        return ReducedPoly(F, self.nvars, t)


def _proj_points_ff(fieldF: FiniteField, n: int):
    """Canonical representatives of P^(n-1)(F): first nonzero coord = 1."""
    q = fieldF.q
    for lead in range(n):
        for tail in itertools.product(range(q), repeat=n - lead - 1):
            yield (0,) * lead + (1,) + tail


# ---------------------------------------------------------------------------
# smoothness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothnessCertificate:
    status: str                 # "SMOOTH" | "SINGULAR" | "UNDECIDED"
    witness_prime: object = None   # p, or (q, k) for F_{q^k}
    witness_point: tuple | None = None
    method: str = ""

    def __bool__(self):
        return self.status == "SMOOTH"


_SCAN_PRIMES_Q = (5, 7, 11, 13, 17, 19, 23)


def is_smooth(X: DelPezzoModel) -> SmoothnessCertificate:
    """Certify smoothness via a good reduction (exact Groebner emptiness
    of the Jacobian ideal over F_p, which covers the whole algebraic
    closure), or produce a rational singular witness; UNDECIDED otherwise."""
    if X.variant == "DP1":
        # smooth iff the degree-12 discriminant binary form is separable
        if _binary_separable(X.ctx, _dp1_delta(X)):
            return SmoothnessCertificate("SMOOTH",
                                         method="separable discriminant")
        return SmoothnessCertificate("SINGULAR",
                                     method="repeated discriminant root")
    sing = _rational_singular_point(X)
    if sing is not None:
        return SmoothnessCertificate("SINGULAR", witness_point=sing,
                                     method="rational singular point")
    ctx = X.ctx
    polys, nvars = _jacobian_ideal(X)
    if ctx.kind == "Q":
        for p in _SCAN_PRIMES_Q:
            if _groebner_point_free(ctx, polys, nvars, p):
                return SmoothnessCertificate(
                    "SMOOTH", witness_prime=p,
                    method="reduction Jacobian certificate")
        return SmoothnessCertificate("UNDECIDED",
                                     method="all scan primes degenerate")
    try:
        if _groebner_point_free(ctx, polys, nvars, ctx.char):
            return SmoothnessCertificate(
                "SMOOTH", witness_prime=ctx.char,
                method="constant-coefficient Jacobian certificate over F_p")
        return SmoothnessCertificate("UNDECIDED",
                                     method="singular reduction over F_p "
                                     "(no rational witness found)")
    except ValueError:
        return SmoothnessCertificate(
            "UNDECIDED", method="coefficients outside the prime field over "
            "Fq(t); no exact reduction certificate available")


def _jacobian_ideal(X: DelPezzoModel):
    """Homogeneous generators whose affine zero cone is the singular locus;
    the model is smooth iff the cone is exactly the origin."""
    v = X.variant
    if v == "DP3":
        F = X.parts["F"]
        return [F.partial(i) for i in range(4)], 4
    if v == "DP2":
        # smooth iff the branch quartic V(g) in P^2 is smooth (char != 2);
        # 4g = u g_u + v g_v + w g_w puts g in the partial ideal
        g = X.parts["g"]
        return [g.partial(i) for i in range(3)], 3
    if v == "DP5CB":
        # a fiber point over [s:t] is singular iff Q1 = Q2 = 0 and the
        # gradients of Q1, Q2 are proportional at x (eliminating (s,t))
        Q1, Q2 = X.parts["Q1"], X.parts["Q2"]
        g1 = [Q1.partial(i) for i in range(3)]
        g2 = [Q2.partial(i) for i in range(3)]
        minors = [g1[i] * g2[j] - g1[j] * g2[i]
                  for i in range(3) for j in range(i + 1, 3)]
        return [Q1, Q2] + minors, 3
    if v == "DP4":
        Q1, Q2 = X.parts["Q1"], X.parts["Q2"]
        g1 = [Q1.partial(i) for i in range(5)]
        g2 = [Q2.partial(i) for i in range(5)]
        minors = [g1[i] * g2[j] - g1[j] * g2[i]
                  for i in range(5) for j in range(i + 1, 5)]
        return [Q1, Q2] + minors, 5
    raise AssertionError(v)


def _coeff_code(ctx, c) -> int:
    """Integer representative of a coefficient for a prime-field reduction."""
    if ctx.kind == "Q":
        return int(c)
    if c.deg > 0:
        raise ValueError("non-constant coefficient over Fq(t)")
    code = c.coeffs[0] if c.coeffs else 0
    if code >= ctx.char:
        raise ValueError("coefficient outside the prime subfield")
    return code


def _groebner_point_free(ctx, polys, nvars: int, p: int) -> bool:
    """True iff the homogeneous polys have no common projective zero over
    the algebraic closure of F_p: their affine cone mod p is {0}, which is
    exactly zero-dimensionality of the (homogeneous) Groebner basis."""
    import sympy

    syms = sympy.symbols(f"x0:{nvars}")
    exprs = []
    for P in polys:
        e = 0
        for exps, c in P.terms.items():
            cc = _coeff_code(ctx, c) % p
            if cc:
                m = cc
                for s, k in zip(syms, exps):
                    m *= s ** k
                e += m
        if e != 0:
            exprs.append(e)
    if not exprs:
        return False
    G = sympy.groebner(exprs, *syms, modulus=p, order="grevlex")
    return bool(G.is_zero_dimensional)


def _rational_singular_point(X: DelPezzoModel, bound: int = 2):
    """Small-box search for a rational singular point (exact witness)."""
    ctx = X.ctx
    v = X.variant
    if v == "DP3":
        F = X.parts["F"]
        grads = [F.partial(i) for i in range(4)]
        for x in itertools.product(list(ctx.elements(bound)), repeat=4):
            if all(ctx.is_zero(c) for c in x):
                continue
            if ctx.is_zero(F.evaluate(x)) and \
                    all(ctx.is_zero(g.evaluate(x)) for g in grads):
                return make_primitive(ctx, x)
        return None
    if v == "DP2":
        g = X.parts["g"]
        grads = [g.partial(i) for i in range(3)]
        for x in itertools.product(list(ctx.elements(bound)), repeat=3):
            if all(ctx.is_zero(c) for c in x):
                continue
            if ctx.is_zero(g.evaluate(x)) and \
                    all(ctx.is_zero(gr.evaluate(x)) for gr in grads):
                return make_primitive(ctx, x)
        return None
    if v == "DP4":
        Q1, Q2 = X.parts["Q1"], X.parts["Q2"]
        g1 = [Q1.partial(i) for i in range(5)]
        g2 = [Q2.partial(i) for i in range(5)]
        for x in itertools.product(list(ctx.elements(bound)), repeat=5):
            if all(ctx.is_zero(c) for c in x):
                continue
            if not (ctx.is_zero(Q1.evaluate(x)) and ctx.is_zero(Q2.evaluate(x))):
                continue
            r1 = [g.evaluate(x) for g in g1]
            r2 = [g.evaluate(x) for g in g2]
            if all(ctx.is_zero(r1[i] * r2[j] - r1[j] * r2[i])
                   for i in range(5) for j in range(i + 1, 5)):
                return make_primitive(ctx, x)
        return None
    if v == "DP5CB":
        Q1, Q2 = X.parts["Q1"], X.parts["Q2"]
        g1 = [Q1.partial(i) for i in range(3)]
        g2 = [Q2.partial(i) for i in range(3)]
        for st in itertools.product(list(ctx.elements(bound)), repeat=2):
            if all(ctx.is_zero(c) for c in st):
                continue
            s, t = st
            for x in itertools.product(list(ctx.elements(bound)), repeat=3):
                if all(ctx.is_zero(c) for c in x):
                    continue
                if not (ctx.is_zero(Q1.evaluate(x))
                        and ctx.is_zero(Q2.evaluate(x))):
                    continue
                if all(ctx.is_zero(s * a.evaluate(x) + t * b.evaluate(x))
                       for a, b in zip(g1, g2)):
                    return tuple(make_primitive(ctx, st)) + \
                        tuple(make_primitive(ctx, x))
        return None
    if v == "DP1":
        return None  # handled through the discriminant criterion
    raise AssertionError(v)


# ---------------------------------------------------------------------------
# fiber discriminants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiberDiscriminant:
    coeffs: tuple          # coeffs[i] multiplies s^i t^(deg - i)
    degree: int
    separable: bool

    def to_binary_form(self, ctx) -> BinaryForm:
        if self.degree > 6:
            raise ValueError("degree exceeds the BinaryForm cap")
        return BinaryForm(ctx, self.degree, self.coeffs)

    def to_multipoly(self, ctx) -> MultiPoly:
        return MultiPoly(ctx, 2, {(i, self.degree - i): c
                                  for i, c in enumerate(self.coeffs)
                                  if not ctx.is_zero(c)})


def _binary_separable(ctx, coeffs) -> bool:
    """Separability of a binary form of any degree via gcd with partials."""
    d = len(coeffs) - 1
    fs = [ctx.from_int(i) * coeffs[i] for i in range(1, d + 1)]
    ft = [ctx.from_int(d - i) * coeffs[i] for i in range(d)]

    def split(cs):
        cs = list(cs)
        lo = 0
        while cs and ctx.is_zero(cs[-1]):
            cs.pop()
        return cs

    uf = split(coeffs)
    tmult_f = d - (len(uf) - 1)
    if tmult_f >= 2:
        return False
    cur_t, cur_u = tmult_f, uf
    for part, pdeg in ((fs, d - 1), (ft, d - 1)):
        up = split(part)
        if not up:
            continue
        tmult_p = pdeg - (len(up) - 1)
        cur_t = min(cur_t, tmult_p)
        cur_u = univ_gcd(ctx, cur_u, up)
        if cur_t == 0 and len(cur_u) <= 1:
            return True
    return cur_t == 0 and len(cur_u) <= 1


def _binary_primitive_normalize(ctx, coeffs):
    coeffs = list(coeffs)
    g = ctx.content(coeffs)
    if not ctx.is_unit(g):
        coeffs = [ctx.exact_div(c, g) for c in coeffs]
    lead = next((c for c in reversed(coeffs) if not ctx.is_zero(c)), None)
    if lead is None:
        raise ValueError("zero form")
    u = ctx.normalize_unit_scalar(lead)
    return tuple(u * c for c in coeffs)


def _dp1_delta(X: DelPezzoModel):
    """Delta(u,v) = 4 g^3 + 27 h^2, degree 12, raw coefficients."""
    ctx = X.ctx
    g = X.parts["g"]
    h = X.parts["h"]
    d = g * g * g
    d = d.scale(ctx.from_int(4)) + (h * h).scale(ctx.from_int(27))
    coeffs = [ctx.zero] * 13
    for e, c in d.terms.items():
        coeffs[e[0]] = c
    return tuple(coeffs)


def fiber_discriminant(X: DelPezzoModel) -> FiberDiscriminant:
    ctx = X.ctx
    if X.variant == "DP5CB":
        G1 = quadric_form3(ctx, X.parts["Q1"]).gram
        G2 = quadric_form3(ctx, X.parts["Q2"]).gram
        # det(s G1 + t G2): binary cubic, computed coefficient-exactly
        coeffs = [ctx.zero] * 4  # s^i t^(3-i)
        for perm, sign in _PERMS3:
            for picks in itertools.product((0, 1), repeat=3):
                i = sum(1 for b in picks if b == 0)  # number of G1 factors
                term = ctx.from_int(sign)
                for r, (c, b) in enumerate(zip(perm, picks)):
                    term = term * (G1[r][c] if b == 0 else G2[r][c])
                coeffs[i] = coeffs[i] + term
        coeffs = _binary_primitive_normalize(ctx, coeffs)
        sep = _binary_separable(ctx, coeffs)
        return FiberDiscriminant(coeffs, 3, sep)
    if X.variant == "DP4":
        Qp, a = dp4_normal_form(X)
        agg, ahh, agh = _dp4_fiber_entries(X, Qp)
        # det gram of 2*(q) with q = a_gg g^2 + a_gh gh + a_hh h^2 + a z^2:
        # 2a (4 a_gg a_hh - a_gh^2), a binary quartic in (u, v)
        four = ctx.from_int(4)
        quart = (agg * ahh).scale(four) - agh * agh
        quart = quart.scale(ctx.from_int(2) * a)
        coeffs = [ctx.zero] * 5
        for e, c in quart.terms.items():
            coeffs[e[0]] = c
        coeffs = _binary_primitive_normalize(ctx, coeffs)
        sep = _binary_separable(ctx, coeffs)
        return FiberDiscriminant(tuple(coeffs), 4, sep)
    if X.variant == "DP1":
        coeffs = _dp1_delta(X)
        sep = _binary_separable(ctx, coeffs)
        return FiberDiscriminant(coeffs, 12, sep)
    raise ValueError(f"{X.variant} has no conic/elliptic fibration here")


_PERMS3 = [((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
           ((2, 1, 0), -1), ((1, 0, 2), -1), ((0, 2, 1), -1)]


def dp4_normal_form(X: DelPezzoModel):
    """For DP4 with Q1 = x0 x1 - x2 x3: return (Q restricted to x0..x3, a)
    where Q2 = Q(x0..x3) + a x4^2; raises if not in normal form."""
    if X.variant != "DP4":
        raise ValueError("not a DP4 model")
    ctx = X.ctx
    want = {(1, 1, 0, 0, 0): ctx.one,
            (0, 0, 1, 1, 0): ctx.zero - ctx.one}
    if X.parts["Q1"].terms != {e: c for e, c in want.items()}:
        raise ValueError("DP4 fiber methods need the normal form "
                         "Q1 = x0*x1 - x2*x3; rewrite the model or use "
                         "method=brute")
    Q2 = X.parts["Q2"]
    a = ctx.zero
    qterms = {}
    for e, c in Q2.terms.items():
        if e[4] == 2:
            a = c
        elif e[4] == 1:
            raise ValueError("DP4 normal form forbids x4 cross terms in Q2")
        else:
            qterms[e[:4]] = c
    if ctx.is_zero(a):
        raise ValueError("DP4 normal form needs a nonzero x4^2 coefficient")
    return MultiPoly(ctx, 4, qterms), a


def _dp4_fiber_entries(X: DelPezzoModel, Qp: MultiPoly):
    """Binary quadratics a_gg, a_hh, a_gh of the fiber conic of pi_1:
    points (u g, v h, v g, u h, z), q(g,h,z) = Q(ug, vh, vg, uh) + a z^2."""
    ctx = X.ctx
    u = MultiPoly.variable(ctx, 2, 0)
    v = MultiPoly.variable(ctx, 2, 1)
    zero = MultiPoly(ctx, 2)
    agg = Qp.substitute([u, zero, v, zero])
    ahh = Qp.substitute([zero, v, zero, u])
    both = Qp.substitute([u, v, v, u])
    agh = both - agg - ahh
    return agg, ahh, agh


def dp4_fiber_form(X: DelPezzoModel, u, v) -> QuadraticForm:
    """The ternary fiber conic q_{u,v}(g, h, z) of pi_1 as a QuadraticForm."""
    ctx = X.ctx
    Qp, a = dp4_normal_form(X)
    agg, ahh, agh = _dp4_fiber_entries(X, Qp)
    return QuadraticForm(ctx, (agg.evaluate((u, v)), ahh.evaluate((u, v)), a,
                               agh.evaluate((u, v)), ctx.zero, ctx.zero))


def dp5_fiber_form(X: DelPezzoModel, s, t) -> QuadraticForm:
    """The conic s Q1 + t Q2 over the fiber [s:t] as a QuadraticForm."""
    ctx = X.ctx
    F1 = quadric_form3(ctx, X.parts["Q1"])
    F2 = quadric_form3(ctx, X.parts["Q2"])
    return QuadraticForm(ctx, tuple(s * c1 + t * c2 for c1, c2
                                    in zip(F1.coeffs, F2.coeffs)))


# ---------------------------------------------------------------------------
# exceptional curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExceptionalSet:
    curves: tuple          # canonical line data (pairs of basis rows)
    search_bound: int
    complete: bool
    kind: str = "lines"


def _canonical_line(ctx, p, q, n):
    """Canonical basis of the projective line through p and q: reduced
    echelon form with primitive unit-normalized rows (saturated, so the
    key does not depend on which spanning points were used)."""
    M = [list(p), list(q)]
    j1 = next((j for j in range(n)
               if not (ctx.is_zero(M[0][j]) and ctx.is_zero(M[1][j]))), None)
    if j1 is None:
        return None
    if ctx.is_zero(M[0][j1]):
        M[0], M[1] = M[1], M[0]
    r2 = [M[0][j1] * M[1][j] - M[1][j1] * M[0][j] for j in range(n)]
    if all(ctx.is_zero(c) for c in r2):
        return None
    r2 = make_primitive(ctx, r2)
    j2 = next(j for j in range(n) if not ctx.is_zero(r2[j]))
    r1 = [r2[j2] * M[0][j] - M[0][j2] * r2[j] for j in range(n)]
    r1 = make_primitive(ctx, r1)
    return (tuple(r1), tuple(r2))


def _line_on_surface(X: DelPezzoModel, rows) -> bool:
    """Exact containment: substitute s*rows[0] + t*rows[1] into the
    defining equations and expand."""
    ctx = X.ctx
    s = MultiPoly.variable(ctx, 2, 0)
    t = MultiPoly.variable(ctx, 2, 1)
    coords = [s.scale(rows[0][i]) + t.scale(rows[1][i])
              for i in range(len(rows[0]))]
    if X.variant == "DP3":
        return X.parts["F"].substitute(coords).is_zero()
    if X.variant == "DP4":
        return (X.parts["Q1"].substitute(coords).is_zero()
                and X.parts["Q2"].substitute(coords).is_zero())
    raise ValueError("line search supports DP3 and DP4 models")


def find_lines(X: DelPezzoModel, H_max: int) -> ExceptionalSet:
    """K-rational lines with canonical-basis height <= H_max (height-bounded
    search; completeness flag False over a global field)."""
    if X.variant not in ("DP3", "DP4"):
        raise ValueError("line search supports DP3 and DP4 models")
    cert = is_smooth(X)
    if cert.status == "SINGULAR":
        raise ValueError("find_lines needs a smooth model")
    ctx = X.ctx
    n = 4 if X.variant == "DP3" else 5
    pts = _surface_points(X, min(int(H_max), 30))
    found = {}
    for p, q in itertools.combinations(pts, 2):
        rows = _canonical_line(ctx, p, q, n)
        if rows is None or rows in found:
            continue
        if max(ctx.absval(c) for r in rows for c in r) > H_max:
            continue
        found[rows] = None
        if not _line_on_surface(X, rows):
            del found[rows]
    curves = tuple(sorted(found, key=lambda rows: tuple(
        tuple(ctx.element_key(c) for c in r) for r in rows)))
    total = EXCEPTIONAL_CURVE_COUNTS[X.degree]
    assert len(curves) <= total
    return ExceptionalSet(curves, int(H_max), complete=False)


def _surface_points(X: DelPezzoModel, bound: int):
    """Primitive points on a DP3/DP4 model with height <= bound."""
    ctx = X.ctx
    out = []
    if X.variant == "DP3":
        F = X.parts["F"]
        elems = list(ctx.elements(bound))
        seen = set()
        for x in itertools.product(elems, repeat=4):
            if all(ctx.is_zero(c) for c in x):
                continue
            if not ctx.is_zero(F.evaluate(x)):
                continue
            if not ctx.is_unit(ctx.content(x)):
                continue
            p = make_primitive(ctx, x)
            k = ctx.vec_key(p)
            if k not in seen:
                seen.add(k)
                out.append(p)
        return out
    Q1, Q2 = X.parts["Q1"], X.parts["Q2"]
    elems = list(ctx.elements(bound))
    seen = set()
    for x in itertools.product(elems, repeat=5):
        if all(ctx.is_zero(c) for c in x):
            continue
        if not (ctx.is_zero(Q1.evaluate(x)) and ctx.is_zero(Q2.evaluate(x))):
            continue
        if not ctx.is_unit(ctx.content(x)):
            continue
        p = make_primitive(ctx, x)
        k = ctx.vec_key(p)
        if k not in seen:
            seen.add(k)
            out.append(p)
    return out


def find_lines_mod(X: DelPezzoModel, p_or_k) -> ExceptionalSet:
    """Exhaustive line search on a finite-field reduction (complete)."""
    ctx = X.ctx
    if X.variant != "DP3":
        raise ValueError("exhaustive reduction line search is for DP3")
    fieldF = gf(p_or_k) if ctx.kind == "Q" else gf(ctx.q ** p_or_k)
    F = ReducedPoly.reduce(X.parts["F"], fieldF)
    q = fieldF.q
    lines = set()
    pts = list(_proj_points_ff(fieldF, 4))
    onX = [x for x in pts if F.evaluate(x) == 0]
    param_pts = list(_proj_points_ff(fieldF, 2))
    for a, b in itertools.combinations(onX, 2):
        key = _ff_line_key(fieldF, a, b)
        if key is None or key in lines:
            continue
        ok = True
        for s, t in param_pts:
            x = tuple(fieldF.add(fieldF.mul(s, ai), fieldF.mul(t, bi))
                      for ai, bi in zip(a, b))
            if F.evaluate(x) != 0:
                ok = False
                break
        if ok:
            lines.add(key)
    total = EXCEPTIONAL_CURVE_COUNTS[3]
    assert len(lines) <= total
    return ExceptionalSet(tuple(sorted(lines)), fieldF.q, complete=True)


def _ff_line_key(fieldF: FiniteField, a, b):
    """Canonical reduced row-echelon basis of the plane spanned by a, b."""
    M = [list(a), list(b)]
    r = 0
    for col in range(4):
        piv = None
        for i in range(r, 2):
            if M[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = fieldF.inv(M[r][col])
        M[r] = [fieldF.mul(inv, c) for c in M[r]]
        for i in range(2):
            if i != r and M[i][col] != 0:
                f = M[i][col]
                M[i] = [fieldF.sub(ci, fieldF.mul(f, cj))
                        for ci, cj in zip(M[i], M[r])]
        r += 1
        if r == 2:
            break
    if r != 2:
        return None
    return (tuple(M[0]), tuple(M[1]))


# ---------------------------------------------------------------------------
# bitangents (DP2)
# ---------------------------------------------------------------------------

def _binary_square_root(ctx, coeffs):
    """h with h^2 = unit * (coeffs) as binary forms, or None."""
    d = len(coeffs) - 1
    if d % 2:
        return None
    cs = list(coeffs)
    tmult = 0
    while cs and ctx.is_zero(cs[0]):
        cs.pop(0)
        tmult += 1
    if not cs:
        return None
    if tmult % 2:
        return None
    top = len(cs) - 1
    while ctx.is_zero(cs[top]):
        top -= 1
    if (len(cs) - 1 - top) % 2:
        return None
    cs = cs[: top + 1]
    n = len(cs) - 1
    if n % 2:
        return None
    for u in ctx.units():
        w = [u * c for c in cs]
        h = _univ_sqrt(ctx, w)
        if h is not None:
            half_t = tmult // 2
            return [ctx.zero] * half_t + h + \
                [ctx.zero] * ((d // 2) - half_t - (len(h) - 1))
    return None


def _univ_sqrt(ctx, cs):
    """Exact square root of a univariate polynomial over O_K, or None."""
    n = len(cs) - 1
    if n % 2:
        return None
    m = n // 2
    lead = ctx.sqrt(cs[-1])
    if lead is None or ctx.is_zero(lead):
        return None
    h = [ctx.zero] * (m + 1)
    h[m] = lead
    two = ctx.from_int(2)
    for i in range(m - 1, -1, -1):
        # coefficient of degree i + m in h^2 is 2 h[i] h[m] plus cross terms
        # h[j] h[i+m-j] with i < j < m (h[0..i-1] still unknown but those
        # pairings need an index > m, so they cannot occur)
        acc = ctx.zero
        for j in range(i + 1, m):
            k = i + m - j
            if i < k < m + 1 and k != m:
                acc = acc + h[j] * h[k]
        q, r = divmod(cs[i + m] - acc, two * lead)
        if not ctx.is_zero(r):
            return None
        h[i] = q
    prod = [ctx.zero] * (n + 1)
    for j, a in enumerate(h):
        for k, b in enumerate(h):
            prod[j + k] = prod[j + k] + a * b
    if all(ctx.is_zero(p - c) for p, c in zip(prod, cs)):
        return h
    return None


def find_bitangents(X: DelPezzoModel, H_max: int) -> ExceptionalSet:
    """Lines c with H(c) <= H_max whose restriction of g is a perfect
    square over K (bitangents of the branch quartic)."""
    if X.variant != "DP2":
        raise ValueError("bitangent search is for DP2 models")
    ctx = X.ctx
    cert = is_smooth(X)
    if cert.status == "SINGULAR":
        raise ValueError("find_bitangents needs a nonsingular quartic")
    g = X.parts["g"]
    found = []
    seen = set()
    from .globalfield import proj_points_in_box
    for c in proj_points_in_box(ctx, 3, int(H_max)):
        L = orthogonal_lattice(ctx, c)
        A, B = L.basis
        s = MultiPoly.variable(ctx, 2, 0)
        t = MultiPoly.variable(ctx, 2, 1)
        coords = [s.scale(A[i]) + t.scale(B[i]) for i in range(3)]
        gc = g.substitute(coords)
        coeffs = [ctx.zero] * 5
        for e, cf in gc.terms.items():
            coeffs[e[0]] = cf
        if all(ctx.is_zero(cf) for cf in coeffs):
            continue
        if _binary_square_root(ctx, coeffs) is not None:
            k = ctx.vec_key(c)
            if k not in seen:
                seen.add(k)
                found.append(c)
    assert len(found) <= 28
    return ExceptionalSet(tuple(found), int(H_max), complete=False,
                          kind="bitangents")


def count_bitangents_mod(X: DelPezzoModel, p_or_q: int) -> int:
    """Exhaustive bitangent count of the branch quartic over a finite field."""
    if X.variant != "DP2":
        raise ValueError("bitangent search is for DP2 models")
    fieldF = gf(p_or_q)
    g = ReducedPoly.reduce(X.parts["g"], fieldF)
    q = fieldF.q
    count = 0
    squares = set()
    # all squares of binary quadratics over F_q, up to scalar
    for h in itertools.product(range(q), repeat=3):
        if all(c == 0 for c in h):
            continue
        sq = _ff_binquad_square(fieldF, h)
        squares.add(sq)
    for c in _proj_points_ff(fieldF, 3):
        basis = _ff_orthogonal_basis(fieldF, c)
        gc = _ff_restrict(fieldF, g, basis)
        if all(v == 0 for v in gc):
            continue
        norm = _ff_normalize_binform(fieldF, gc)
        if norm in squares:
            count += 1
    assert count <= 28
    return count


def _ff_binquad_square(fieldF, h):
    out = [0] * 5
    for j, a in enumerate(h):
        for k, b in enumerate(h):
            out[j + k] = fieldF.add(out[j + k], fieldF.mul(a, b))
    return _ff_normalize_binform(fieldF, out)


def _ff_normalize_binform(fieldF, cs):
    lead = next(c for c in reversed(cs) if c != 0)
    inv = fieldF.inv(lead)
    return tuple(fieldF.mul(inv, c) for c in cs)


def _ff_orthogonal_basis(fieldF, c):
    i0 = next(i for i, v in enumerate(c) if v != 0)
    basis = []
    for j in range(3):
        if j == i0:
            continue
        v = [0, 0, 0]
        v[j] = c[i0]
        v[i0] = fieldF.neg(c[j])
        basis.append(tuple(v))
    return basis


def _ff_restrict(fieldF, g: ReducedPoly, basis):
    """Coefficients of g(s*A + t*B) as a binary quartic (s^i t^(4-i))."""
    A, B = basis
    out = [0] * 5
    # evaluate at 5 interpolation... direct expansion instead
    for e, coef in g.terms.items():
        # product over variables of (A_i s + B_i t)^{e_i}
        poly = {(0, 0): coef}
        for var in range(3):
            for _ in range(e[var]):
                newp = {}
                for (i, j), c2 in poly.items():
                    for de, mult in (((1, 0), A[var]), ((0, 1), B[var])):
                        kk = (i + de[0], j + de[1])
                        newp[kk] = fieldF.add(newp.get(kk, 0),
                                              fieldF.mul(c2, mult))
                poly = newp
        for (i, j), c2 in poly.items():
            out[i] = fieldF.add(out[i], c2)
    return out


# ---------------------------------------------------------------------------
# hyperplane sections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectionClass:
    label: str                      # SMOOTH_GENUS1 | IRREDUCIBLE_SINGULAR |
    #                                 CONTAINS_LINE | CONTAINS_CONIC_OR_TWO_LINES |
    #                                 DEGENERATE
    witness: tuple | None = None
    sample_prime: object = None
    section: MultiPoly | None = None


def section_cubic(X: DelPezzoModel, c) -> tuple[MultiPoly, OKLattice]:
    """Restrict a DP3 cubic to the hyperplane c.x = 0, in coordinates of an
    orthogonal-lattice basis; returns (ternary cubic, basis lattice)."""
    if X.variant != "DP3":
        raise ValueError("sections are implemented for DP3")
    ctx = X.ctx
    L = orthogonal_lattice(ctx, c)
    y = [MultiPoly.variable(ctx, 3, i) for i in range(3)]
    coords = []
    for j in range(4):
        acc = MultiPoly(ctx, 3)
        for i in range(3):
            acc = acc + y[i].scale(L.basis[i][j])
        coords.append(acc)
    return X.parts["F"].substitute(coords), L


def classify_section(X: DelPezzoModel, c,
                     lines: ExceptionalSet | None = None) -> SectionClass:
    """Classify the hyperplane section c.x = 0 of a DP3 surface."""
    ctx = X.ctx
    c = make_primitive(ctx, c)
    T, L = section_cubic(X, c)
    if T.is_zero():
        return SectionClass("DEGENERATE", section=T)
    if lines is None:
        lines = find_lines(X, 10)
    for rows in lines.curves:
        if all(ctx.is_zero(sum((c[i] * r[i] for i in range(1, 4)),
                               c[0] * r[0])) for r in rows):
            return SectionClass("CONTAINS_LINE", witness=rows, section=T)
    lf = _linear_factor(T)
    if lf is not None:
        return SectionClass("CONTAINS_CONIC_OR_TWO_LINES", witness=lf,
                            section=T)
    # rational singular witness
    grads = [T.partial(i) for i in range(3)]
    for x in itertools.product(list(ctx.elements(3)), repeat=3):
        if all(ctx.is_zero(v) for v in x):
            continue
        if ctx.is_zero(T.evaluate(x)) and \
                all(ctx.is_zero(g.evaluate(x)) for g in grads):
            return SectionClass("IRREDUCIBLE_SINGULAR",
                                witness=make_primitive(ctx, x), section=T)
    # exact certificate: a smooth reduction of the section (whole closure,
    # via the Groebner criterion) certifies a smooth genus-1 section
    candidates = _SCAN_PRIMES_Q if ctx.kind == "Q" else (ctx.char,)
    try:
        for p in candidates:
            if _groebner_point_free(ctx, grads, 3, p):
                return SectionClass("SMOOTH_GENUS1", sample_prime=p,
                                    section=T)
        return SectionClass("IRREDUCIBLE_SINGULAR", sample_prime="sampled",
                            section=T)
    except ValueError:
        pass
    # sampled fallback: rational-point Jacobian scan over F_{q^k}
    for k in (1, 2):
        fieldF = gf(ctx.q ** k)
        Tf = ReducedPoly.reduce(T, fieldF)
        if Tf.is_zero():
            continue
        gr = [Tf.partial(i) for i in range(3)]
        if not any(Tf.evaluate(x) == 0
                   and all(g.evaluate(x) == 0 for g in gr)
                   for x in _proj_points_ff(fieldF, 3)):
            return SectionClass("SMOOTH_GENUS1",
                                sample_prime=(ctx.q, k, "sampled"),
                                section=T)
    return SectionClass("IRREDUCIBLE_SINGULAR", sample_prime="sampled",
                        section=T)


def _linear_factor(T: MultiPoly):
    """A primitive linear form dividing the ternary cubic T, or None
    (height-bounded search; exact verification by substitution)."""
    ctx = T.ctx
    from .globalfield import proj_points_in_box
    for ell in proj_points_in_box(ctx, 3, 6):
        # parameterize the line ell.y = 0 and test T == 0 on it
        L = orthogonal_lattice(ctx, ell)
        s = MultiPoly.variable(ctx, 2, 0)
        t = MultiPoly.variable(ctx, 2, 1)
        coords = [s.scale(L.basis[0][i]) + t.scale(L.basis[1][i])
                  for i in range(3)]
        if T.substitute(coords).is_zero():
            return ell
    return None


# ---------------------------------------------------------------------------
# dual quartic degree
# ---------------------------------------------------------------------------

def dual_quartic_degree(X: DelPezzoModel, p: int, trials: int,
                        seed: int = 0) -> dict:
    """Degree of the dual curve of the branch quartic, observed over F_p:
    a random point P corresponds to a line in the dual plane, and its
    intersections with the dual curve are the tangent lines through P.
    Those are the points of V(g) meet V(polar_P g), counted over the
    algebraic closure as the distinct roots of the degree-12 eliminant.
    Returns the max over trials (a certified lower bound, <= 12)."""
    import random
    import sympy

    if X.variant != "DP2":
        raise ValueError("dual degree estimation is for DP2 models")
    if not is_prime(p) or p <= 3:
        raise ValueError("p must be a prime > 3")
    if trials == 0:
        return {"degree": 0, "trials": 0, "low_confidence": True,
                "warning": "no trials requested"}
    fieldF = gf(p)
    g = ReducedPoly.reduce(X.parts["g"], fieldF)
    grads = [g.partial(i) for i in range(3)]
    gpolys = [X.parts["g"].partial(i) for i in range(3)]
    if not _groebner_point_free(X.ctx, gpolys, 3, p):
        raise ValueError(f"branch quartic is singular mod {p}")
    rng = random.Random(seed)
    pts = list(_proj_points_ff(fieldF, 3))
    x0, x2 = sympy.symbols("x0 x2")
    gpoly = _sympy_dehom(g, x0, x2, p)
    if g.terms.get((0, 0, 4), 0) == 0:
        # move the curve off the projection center [0:0:1]
        raise ValueError("projection center lies on the quartic; "
                         "permute coordinates of the model")
    best = 0
    for _ in range(trials):
        P = pts[rng.randrange(len(pts))]
        polar = ReducedPoly(fieldF, 3, {})
        acc = {}
        for i in range(3):
            for e, c in grads[i].terms.items():
                v = fieldF.mul(P[i], c)
                acc[e] = fieldF.add(acc.get(e, 0), v)
        polar = ReducedPoly(fieldF, 3, acc)
        if polar.is_zero():
            continue
        hpoly = _sympy_dehom(polar, x0, x2, p)
        # coefficients are mod-p representatives and the x2-degrees match
        # the reductions, so the integer resultant reduces correctly mod p
        res = sympy.resultant(gpoly, hpoly, x2)
        R = sympy.Poly(res, x0, modulus=p)
        if R.is_zero:
            continue
        dR = R.degree()
        G = sympy.gcd(R, R.diff(x0))
        count = (R // G).degree()
        if dR < 12:
            count += 1  # one projective root at infinity
        assert count <= 12, count
        best = max(best, count)
    return {"degree": best, "trials": trials, "prime": p,
            "low_confidence": p < 11}


def _sympy_dehom(poly: ReducedPoly, x0, x2, p: int):
    """ReducedPoly over GF(p) with x1 set to 1, as a sympy expression."""
    acc = 0
    for e, c in poly.terms.items():
        acc += int(c) * x0 ** e[0] * x2 ** e[2]
    return acc


# ---------------------------------------------------------------------------
# delta_0 and form recovery
# ---------------------------------------------------------------------------

def delta0(d: int) -> dict:
    """(12 - d) - 2d + 3d = 12 for 3 <= d <= 5, with the ingredient terms."""
    if not 3 <= d <= 5:
        raise ValueError("delta0 is defined for degrees 3..5")
    terms = (12 - d, -2 * d, 3 * d)
    return {"value": sum(terms), "c2_term": terms[0],
            "middle_term": terms[1], "last_term": terms[2]}


def recover_form(ctx, points, d: int):
    """The unique (up to scalar) ternary degree-d form vanishing on the given
    points, if the evaluation matrix has corank 1; None if the points are too
    special (corank >= 2)."""
    monos = [e for e in itertools.product(range(d + 1), repeat=3)
             if sum(e) == d]
    M = len(monos)
    if len(points) < M - 1:
        raise ValueError(f"need at least {M - 1} points")
    rows = []
    for p in points:
        rows.append([_mono_eval(ctx, p, e) for e in monos])
    # select M - 1 independent rows; corank >= 2 if impossible
    sel = _select_independent_rows(ctx, rows, M - 1)
    if sel is None:
        return None
    A = [rows[i] for i in sel]
    # kernel via signed maximal minors
    v = []
    for j in range(M):
        minor = [[A[i][k] for k in range(M) if k != j]
                 for i in range(M - 1)]
        dj = mat_det(ctx, minor)
        v.append(dj if j % 2 == 0 else (ctx.zero - dj))
    if all(ctx.is_zero(x) for x in v):
        return None
    g = ctx.content(v)
    v = [ctx.exact_div(x, g) for x in v]
    lead = next(x for x in v if not ctx.is_zero(x))
    u = ctx.normalize_unit_scalar(lead)
    v = [u * x for x in v]
    form = MultiPoly(ctx, 3, dict(zip(monos, v)))
    for p in points:
        if not ctx.is_zero(form.evaluate(p)):
            return None  # the remaining points are inconsistent: corank 0
    return form


def _mono_eval(ctx, p, e):
    acc = ctx.one
    for xi, ei in zip(p, e):
        for _ in range(ei):
            acc = acc * xi
    return acc


def _select_independent_rows(ctx, rows, r):
    """Indices of r linearly independent rows, or None (generic Gaussian
    elimination with exact arithmetic via fraction-free pivoting)."""
    from fractions import Fraction

    if ctx.kind == "Q":
        work = [([Fraction(int(c)) for c in row], i)
                for i, row in enumerate(rows)]
        sel = []
        ncols = len(rows[0])
        col = 0
        while len(sel) < r and work:
            piv = None
            for idx, (row, orig) in enumerate(work):
                if col < ncols and row[col] != 0:
                    piv = idx
                    break
            if piv is None:
                col += 1
                if col >= ncols:
                    return None
                continue
            prow, porig = work.pop(piv)
            sel.append(porig)
            nw = []
            for row, orig in work:
                if row[col] != 0:
                    f = row[col] / prow[col]
                    row = [a - f * b for a, b in zip(row, prow)]
                nw.append((row, orig))
            work = nw
            col += 1
        return sel if len(sel) == r else None
    # Fq[t]: fraction-free elimination by cross-multiplication
    work = [(list(row), i) for i, row in enumerate(rows)]
    sel = []
    ncols = len(rows[0])
    col = 0
    while len(sel) < r and work:
        piv = None
        for idx, (row, orig) in enumerate(work):
            if col < ncols and not ctx.is_zero(row[col]):
                piv = idx
                break
        if piv is None:
            col += 1
            if col >= ncols:
                return None
            continue
        prow, porig = work.pop(piv)
        sel.append(porig)
        nw = []
        for row, orig in work:
            if not ctx.is_zero(row[col]):
                row = [a * prow[col] - row[col] * b
                       for a, b in zip(row, prow)]
            nw.append((row, orig))
        work = nw
        col += 1
    return sel if len(sel) == r else None
