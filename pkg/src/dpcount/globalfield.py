"""Exact arithmetic for the two supported global fields: Q and Fq(t).

The ring of integers is Z or Fq[t] (class number 1, a single infinite place
in both cases, s_K = d_K = 1).  Ring elements are plain Python ints over Q
and FqPoly instances over Fq(t); both support the usual operators, so the
rest of the package is written generically against a FieldContext that
supplies norms, gcds, unit normalization and box enumeration.

Conventions
-----------
* absolute value: |x| over Z; q^deg(x) over Fq[t], with |0| = 0.
* primitive representative: integral coordinates, unit gcd, normalized so
  the first nonzero coordinate is positive (Z) / monic (Fq[t]).  This makes
  projective representatives unique, so point sets deduplicate exactly.
* weighted points (weights w_i) are normalized by dividing out every prime
  pi with pi^{w_i} | x_i for all i, then picking the canonical unit-orbit
  representative.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from .ffield import FiniteField, gf, factor_prime_power


# ---------------------------------------------------------------------------
# Fq[t] elements
# ---------------------------------------------------------------------------

class FqPoly:
    """Univariate polynomial over GF(q); immutable, hashable.

    Coefficients are GF(q) element codes, little-endian (coeffs[i] is the
    t^i coefficient), with no trailing zeros.  The zero polynomial has an
    empty coefficient tuple and degree -1 by convention.
    """

    __slots__ = ("field", "coeffs")

    def __init__(self, field: FiniteField, coeffs):
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("FqPoly is immutable")

    # -- basics --
    @property
    def deg(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __hash__(self):
        return hash((self.field.q, self.coeffs))

    def __eq__(self, other):
        if isinstance(other, FqPoly):
            return self.field.q == other.field.q and self.coeffs == other.coeffs
        if isinstance(other, int):
            return self == self._lift(other)
        return NotImplemented

    def _lift(self, n: int) -> "FqPoly":
        return FqPoly(self.field, [n % self.field.p])

    def _coerce(self, other):
        if isinstance(other, FqPoly):
            return other
        if isinstance(other, int):
            return self._lift(other)
        return None

    # -- ring operators --
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        F = self.field
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = F.add(out[i], c)
        return FqPoly(F, out)

    __radd__ = __add__

    def __neg__(self):
        F = self.field
        return FqPoly(F, [F.neg(c) for c in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        F = self.field
        a, b = self.coeffs, o.coeffs
        if not a or not b:
            return FqPoly(F, [])
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        out[i + j] = F.add(out[i + j], F.mul(ai, bj))
        return FqPoly(F, out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative power of a ring element")
        result = FqPoly(self.field, [1])
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __divmod__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        F = self.field
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quo = [0] * max(0, len(rem) - len(o.coeffs) + 1)
        dlc = F.inv(o.lc())
        do = o.deg
        for i in range(len(rem) - 1, do - 1, -1):
            c = rem[i]
            if c:
                f = F.mul(c, dlc)
                quo[i - do] = f
                for j, oc in enumerate(o.coeffs):
                    rem[i - do + j] = F.sub(rem[i - do + j], F.mul(f, oc))
        return FqPoly(F, quo), FqPoly(F, rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    # -- helpers --
    def monic(self) -> "FqPoly":
        if self.is_zero():
            return self
        F = self.field
        inv = F.inv(self.lc())
        return FqPoly(F, [F.mul(c, inv) for c in self.coeffs])

    def derivative(self) -> "FqPoly":
        F = self.field
        return FqPoly(F, [F.mul(F.from_int(i), c)
                          for i, c in enumerate(self.coeffs)][1:])

    def eval_gf(self, x: int, big: FiniteField | None = None) -> int:
        """Evaluate at an element of GF(q) or of an extension field."""
        F = self.field
        if big is None or big.q == F.q:
            acc = 0
            for c in reversed(self.coeffs):
                acc = F.add(F.mul(acc, x), c)
            return acc
        acc = 0
        for c in reversed(self.coeffs):
            acc = big.add(big.mul(acc, x), big.embed(c, F))
        return acc

    def __repr__(self):
        if self.is_zero():
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"{c}*t" if c != 1 else "t")
            else:
                parts.append(f"{c}*t^{i}" if c != 1 else f"t^{i}")
        return "+".join(reversed(parts))


# ---------------------------------------------------------------------------
# Field contexts
# ---------------------------------------------------------------------------

class FieldContext:
    """Shared interface; see Rationals and FunctionField."""

    s_K = 1
    d_K = 1

    # subclasses: kind, char, zero, one, from_int, absval, is_unit, units,
    # gcd, xgcd, sqrt, elements, residues, mod, factor, element_key,
    # parse_elem, elem_to_json, rand_elem

    def norm(self, x) -> int:
        """Ideal norm N((x)); positive, multiplicative; error on zero."""
        a = self.absval(x)
        if a == 0:
            raise ValueError("norm of zero is undefined")
        return a

    def is_zero(self, x) -> bool:
        return self.absval(x) == 0

    def content(self, xs):
        g = self.zero
        for x in xs:
            g = self.gcd(g, x)
            if self.is_unit(g):
                break
        return g

    def exact_div(self, a, b):
        q, r = divmod(a, b)
        if not self.is_zero(r):
            raise ValueError("non-exact division")
        return q

    def inverse_mod(self, a, m):
        g, u, _ = self.xgcd(a, m)
        if not self.is_unit(g):
            raise ValueError("element not invertible modulo m")
        # scale so that u*a == 1 mod m exactly
        uinv = self.unit_inverse(g)
        return self.mod(u * uinv, m)

    def nonzero_elements(self, bound):
        for x in self.elements(bound):
            if not self.is_zero(x):
                yield x


class Rationals(FieldContext):
    kind = "Q"
    char = 0
    q = None

    def __init__(self):
        self.zero = 0
        self.one = 1

    def __repr__(self):
        return "Rationals()"

    def from_int(self, n: int) -> int:
        return n

    def absval(self, x: int) -> int:
        return abs(x)

    def is_unit(self, x: int) -> bool:
        return x in (1, -1)

    def units(self):
        return (1, -1)

    def unit_inverse(self, u: int) -> int:
        return u

    def gcd(self, a: int, b: int) -> int:
        return math.gcd(a, b)

    def xgcd(self, a: int, b: int):
        old_r, r = a, b
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r:
            qq = old_r // r
            old_r, r = r, old_r - qq * r
            old_s, s = s, old_s - qq * s
            old_t, t = t, old_t - qq * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        return old_r, old_s, old_t

    def sqrt(self, x: int):
        if x < 0:
            return None
        r = math.isqrt(x)
        return r if r * r == x else None

    def normalize_unit_scalar(self, x: int) -> int:
        """Unit making x canonical (positive)."""
        return -1 if x < 0 else 1

    def mod(self, a: int, m: int) -> int:
        return a % abs(m)

    def residues(self, m: int):
        return range(abs(m))

    def elements(self, bound) -> range:
        b = int(bound)
        return range(-b, b + 1)

    def box_count(self, R, N: int) -> int:
        """#{x in (N) : |x| <= R} = 2*floor(R/N) + 1."""
        return 2 * (int(R) // N) + 1

    def factor(self, x: int) -> dict[int, int]:
        import sympy

        n = abs(x)
        if n == 0:
            raise ValueError("cannot factor zero")
        return {int(p): int(e) for p, e in sympy.factorint(n).items()}

    def residue_field_size(self, pi: int) -> int:
        return abs(pi)

    def element_key(self, x: int):
        return (abs(x), -x)

    def vec_key(self, xs):
        return tuple(xs)

    def rand_elem(self, rng, size: int, nonzero: bool = False) -> int:
        while True:
            v = rng.randint(-size, size)
            if v or not nonzero:
                return v

    def parse_elem(self, obj) -> int:
        if isinstance(obj, bool) or not isinstance(obj, (int, str)):
            raise ValueError(f"cannot parse ring element from {obj!r}")
        return int(obj)

    def elem_to_json(self, x: int) -> int:
        return x


class FunctionField(FieldContext):
    kind = "Fq(t)"

    def __init__(self, q: int):
        p, _ = factor_prime_power(q)
        if p == 2:
            raise ValueError("characteristic 2 is not supported (char != 2 "
                             "is required by the quadratic form machinery)")
        self.q = q
        self.char = p
        self.field = gf(q)
        self.zero = FqPoly(self.field, [])
        self.one = FqPoly(self.field, [1])
        self.t = FqPoly(self.field, [0, 1])

    def __repr__(self):
        return f"FunctionField(q={self.q})"

    def from_int(self, n: int) -> FqPoly:
        return FqPoly(self.field, [n % self.char])

    def from_codes(self, codes) -> FqPoly:
        return FqPoly(self.field, codes)

    def absval(self, x: FqPoly) -> int:
        if x.is_zero():
            return 0
        return self.q ** x.deg

    def is_unit(self, x: FqPoly) -> bool:
        return x.deg == 0

    def units(self):
        return tuple(FqPoly(self.field, [c]) for c in range(1, self.q))

    def unit_inverse(self, u: FqPoly) -> FqPoly:
        return FqPoly(self.field, [self.field.inv(u.coeffs[0])])

    def gcd(self, a: FqPoly, b: FqPoly) -> FqPoly:
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def xgcd(self, a: FqPoly, b: FqPoly):
        old_r, r = a, b
        old_s, s = self.one, self.zero
        old_t, t = self.zero, self.one
        while not r.is_zero():
            qq = old_r // r
            old_r, r = r, old_r - qq * r
            old_s, s = s, old_s - qq * s
            old_t, t = t, old_t - qq * t
        if not old_r.is_zero() and old_r.lc() != 1:
            u = FqPoly(self.field, [self.field.inv(old_r.lc())])
            old_r, old_s, old_t = u * old_r, u * old_s, u * old_t
        return old_r, old_s, old_t

    def sqrt(self, x: FqPoly):
        """Exact square root in Fq[t], or None."""
        if x.is_zero():
            return x
        if x.deg % 2:
            return None
        F = self.field
        lr = F.sqrt(x.lc())
        if lr is None:
            return None
        h = x.deg // 2
        out = [0] * (h + 1)
        out[h] = lr
        # solve coefficients from the top: (sum out_i t^i)^2 = x
        acc = [0] * (x.deg + 1)
        acc[x.deg] = F.mul(lr, lr)
        inv2lr = F.inv(F.mul(F.from_int(2), lr))
        for i in range(h - 1, -1, -1):
            # coefficient of t^{i+h} in out^2 must match x
            want = x.coeffs[i + h] if i + h <= x.deg else 0
            have = 0
            for j in range(i + 1, h):
                k = i + h - j
                if i < k <= h:
                    have = F.add(have, F.mul(out[j], out[k]))
            # out^2 coefficient = 2*out[h]*out[i] + sum_{j+k=i+h, j,k<h}
            out[i] = F.mul(F.sub(want, have), inv2lr)
        cand = FqPoly(F, out)
        return cand if cand * cand == x else None

    def normalize_unit_scalar(self, x: FqPoly) -> FqPoly:
        """Unit u with u*x monic."""
        return FqPoly(self.field, [self.field.inv(x.lc())])

    def mod(self, a: FqPoly, m: FqPoly) -> FqPoly:
        return a % m

    def residues(self, m: FqPoly):
        d = m.deg
        for codes in itertools.product(range(self.q), repeat=d):
            yield FqPoly(self.field, codes)

    def elements(self, bound):
        """All x with |x| <= bound (bound >= 1 includes constants; always 0)."""
        b = int(bound)
        yield self.zero
        if b < 1:
            return
        r = 0
        while self.q ** (r + 1) <= b:
            r += 1
        for d in range(r + 1):
            for lead in range(1, self.q):
                for low in itertools.product(range(self.q), repeat=d):
                    yield FqPoly(self.field, list(low) + [lead])

    def box_count(self, R, gen: FqPoly) -> int:
        """#{x in (gen): |x| <= R}; includes 0."""
        R = int(R)
        if R < 1:
            return 1
        r = 0
        while self.q ** (r + 1) <= R:
            r += 1
        if r < gen.deg:
            return 1
        return self.q ** (r - gen.deg + 1)

    def factor(self, x: FqPoly) -> dict[FqPoly, int]:
        """Monic irreducible factorization by trial division (desk scale)."""
        if x.is_zero():
            raise ValueError("cannot factor zero")
        out: dict[FqPoly, int] = {}
        rem = x.monic()
        d = 1
        while rem.deg > 0:
            if 2 * d > rem.deg:
                out[rem] = out.get(rem, 0) + 1
                break
            for pi in self._monic_polys_of_degree(d):
                if not self._is_irreducible_cached(pi):
                    continue
                while (rem % pi).is_zero():
                    out[pi] = out.get(pi, 0) + 1
                    rem = rem // pi
                if rem.deg < 2 * d:
                    break
            d += 1
        return out

    def _monic_polys_of_degree(self, d: int):
        for low in itertools.product(range(self.q), repeat=d):
            yield FqPoly(self.field, list(low) + [1])

    def _is_irreducible_cached(self, f: FqPoly) -> bool:
        cache = getattr(self, "_irred_cache", None)
        if cache is None:
            cache = self._irred_cache = {}
        r = cache.get(f.coeffs)
        if r is None:
            r = self.is_irreducible(f)
            cache[f.coeffs] = r
        return r

    def is_irreducible(self, f: FqPoly) -> bool:
        if f.deg <= 0:
            return False
        if f.deg == 1:
            return True
        # no roots and no factor of degree <= deg/2 (trial division)
        for d in range(1, f.deg // 2 + 1):
            for g in self._monic_polys_of_degree(d):
                if (f % g).is_zero():
                    return False
        return True

    def residue_field_size(self, pi: FqPoly) -> int:
        return self.q ** pi.deg

    def element_key(self, x: FqPoly):
        return (x.deg, tuple(reversed(x.coeffs)))

    def vec_key(self, xs):
        return tuple(x.coeffs for x in xs)

    def rand_elem(self, rng, size: int, nonzero: bool = False) -> FqPoly:
        """Random polynomial with |x| <= q^size-ish (degree <= size)."""
        while True:
            d = rng.randint(0, max(0, size))
            codes = [rng.randrange(self.q) for _ in range(d + 1)]
            v = FqPoly(self.field, codes)
            if not v.is_zero() or not nonzero:
                return v

    def parse_elem(self, obj) -> FqPoly:
        if isinstance(obj, int):
            return self.from_int(obj)
        if isinstance(obj, (list, tuple)):
            return FqPoly(self.field, [int(c) % self.q for c in obj])
        raise ValueError(f"cannot parse ring element from {obj!r}")

    def elem_to_json(self, x: FqPoly):
        return list(x.coeffs)


def context_from_json(d: dict) -> FieldContext:
    fld = d.get("field")
    if fld == "Q":
        return Rationals()
    if fld == "Fq(t)":
        return FunctionField(int(d["q"]))
    raise ValueError(f"unknown field descriptor {fld!r}")


# ---------------------------------------------------------------------------
# Projective points, heights
# ---------------------------------------------------------------------------

def make_primitive(ctx: FieldContext, coords) -> tuple:
    """Canonical primitive representative of a projective point.

    Accepts integral ring elements, and over Q also Fractions (denominators
    are cleared first).  Raises ValueError on the all-zero input.
    """
    coords = list(coords)
    if ctx.kind == "Q":
        den = 1
        for c in coords:
            if isinstance(c, Fraction):
                den = den * c.denominator // math.gcd(den, c.denominator)
        coords = [int(c * den) if isinstance(c, Fraction) else int(c) * den
                  for c in coords]
    if all(ctx.is_zero(c) for c in coords):
        raise ValueError("projective point needs a nonzero coordinate")
    g = ctx.content(coords)
    coords = [ctx.exact_div(c, g) for c in coords]
    lead = next(c for c in coords if not ctx.is_zero(c))
    u = ctx.normalize_unit_scalar(lead)
    return tuple(u * c for c in coords)


def is_primitive(ctx: FieldContext, coords) -> bool:
    return ctx.is_unit(ctx.content(coords))


def height_proj(ctx: FieldContext, coords) -> int:
    """H(x) = max |x_i| for a primitive representative (s_K = 1)."""
    if not is_primitive(ctx, coords):
        raise ValueError("height_proj expects a primitive representative")
    return max(ctx.absval(c) for c in coords)


def normalize_weighted(ctx: FieldContext, coords, weights) -> tuple:
    """Canonical weighted-primitive representative in P(weights)."""
    coords = list(coords)
    if all(ctx.is_zero(c) for c in coords):
        raise ValueError("weighted point needs a nonzero coordinate")
    # divide out primes pi with pi^{w_i} | x_i for all i
    pool = None
    for c, w in sorted(zip(coords, weights), key=lambda cw: cw[1]):
        if not ctx.is_zero(c):
            pool = ctx.factor(c)
            break
    assert pool is not None
    for pi in list(pool):
        while True:
            e_ok = True
            for c, w in zip(coords, weights):
                if not ctx.is_zero(c) and not ctx.is_zero(c % (pi ** w)):
                    e_ok = False
                    break
            if not e_ok:
                break
            coords = [c if ctx.is_zero(c) else ctx.exact_div(c, pi ** w)
                      for c, w in zip(coords, weights)]
    # canonical unit-orbit representative (unit u acts by u^{w_i})
    best = None
    for u in ctx.units():
        cand = tuple((u ** w) * c for c, w in zip(coords, weights))
        key = tuple(ctx.element_key(c) for c in cand)
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


def is_weighted_normalized(ctx: FieldContext, coords, weights) -> bool:
    return tuple(coords) == normalize_weighted(ctx, coords, weights)


def height_weighted(ctx: FieldContext, coords, weights) -> float:
    """max_i |x_i|^{1/w_i} as a float (exact comparisons: weighted_height_leq)."""
    if not is_weighted_normalized(ctx, coords, weights):
        raise ValueError("height_weighted expects a normalized weighted point")
    return max(ctx.absval(c) ** (1.0 / w) for c, w in zip(coords, weights))


def weighted_height_leq(ctx: FieldContext, coords, weights, B: int) -> bool:
    """Exact test max |x_i|^{1/w_i} <= B (B a positive integer height bound)."""
    return all(ctx.absval(c) <= B ** w for c, w in zip(coords, weights))


def enumerate_box(ctx: FieldContext, R, ideal_gen):
    """All x in the principal ideal (ideal_gen) with |x| <= R (0 included)."""
    if ctx.is_zero(ideal_gen):
        return [ctx.zero]
    out = []
    N = ctx.absval(ideal_gen)
    if ctx.kind == "Q":
        g = abs(ideal_gen)
        k = int(R) // g
        return [g * i for i in range(-k, k + 1)]
    R = int(R)
    if R < N:
        return [ctx.zero]
    out = [ideal_gen * h for h in ctx.elements(R // N)]
    return out


def box_count_formula(ctx: FieldContext, R, ideal_gen) -> int:
    """The exact cardinality formula for enumerate_box."""
    if ctx.kind == "Q":
        return ctx.box_count(R, abs(ideal_gen))
    return ctx.box_count(R, ideal_gen)


def proj_points_in_box(ctx: FieldContext, n: int, bound: int):
    """All points of P^{n-1}(K) with height <= bound, as canonical tuples.

    Straightforward enumeration; intended for small boxes and oracles.
    """
    seen = set()
    out = []
    for vec in itertools.product(list(ctx.elements(bound)), repeat=n):
        if all(ctx.is_zero(c) for c in vec):
            continue
        if not ctx.is_unit(ctx.content(vec)):
            continue
        p = make_primitive(ctx, vec)
        k = ctx.vec_key(p)
        if k not in seen:
            seen.add(k)
            out.append(p)
    return out


def count_p1(ctx: FieldContext, bound: int) -> int:
    """#{x in P^1(K) : H(x) <= bound}, exactly.

    Over Q via Moebius-sieved primitive-pair counting; over Fq(t) by direct
    enumeration (desk-scale bounds).
    """
    if ctx.kind == "Q":
        B = int(bound)
        if B < 1:
            return 0
        mu = _moebius_upto(B)
        total = 0
        for d in range(1, B + 1):
            if mu[d]:
                m = B // d
                total += mu[d] * ((2 * m + 1) ** 2 - 1)
        assert total % 2 == 0
        return total // 2
    return len(proj_points_in_box(ctx, 2, bound))


def _moebius_upto(n: int) -> list[int]:
    mu = [1] * (n + 1)
    primes = []
    is_comp = [False] * (n + 1)
    for i in range(2, n + 1):
        if not is_comp[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            if i * p > n:
                break
            is_comp[i * p] = True
            if i % p == 0:
                mu[i * p] = 0
                break
            mu[i * p] = -mu[i]
    return mu


def siegel_hyperplane(ctx: FieldContext, x) -> tuple:
    """Minimal-height primitive c with c . x = 0 (Siegel's lemma witness).

    Computed as the shortest vector of the orthogonal lattice of x; ties in
    the underlying enumeration are broken deterministically.
    """
    from . import lattices

    x = tuple(x)
    if len(x) < 2:
        raise ValueError("need ambient dimension n >= 1")
    L = lattices.orthogonal_lattice(ctx, x)
    v = lattices.shortest_vector(L)
    return make_primitive(ctx, v)
