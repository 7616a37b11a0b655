"""Small finite fields GF(p^k) for coefficient arithmetic and reduction scans.

Elements are encoded as integers in 0..q-1: the integer's base-p digits are the
coordinates of the element with respect to the polynomial basis 1, X, X^2, ...
of GF(p)[X]/(f) for a fixed irreducible f.  The prime subfield embeds as
0..p-1.  Multiplication goes through discrete-log tables, so these fields are
meant to stay small (q up to a few thousand).

NOT a cryptographic implementation; desk-scale exact arithmetic only.
"""

from __future__ import annotations

import functools


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def factor_prime_power(q: int) -> tuple[int, int]:
    """Return (p, k) with q = p^k, p prime; raise ValueError otherwise."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    for p in range(2, q + 1):
        if p * p > q:
            p = q
        if q % p == 0:
            k = 0
            m = q
            while m % p == 0:
                m //= p
                k += 1
            if m != 1 or not is_prime(p):
                raise ValueError(f"{q} is not a prime power")
            return p, k
    raise ValueError(f"{q} is not a prime power")


def _gfp_polymulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    """(a*b) mod f over GF(p); f monic, lists little-endian."""
    res = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                res[i + j] = (res[i + j] + ai * bj) % p
    # reduce mod monic f
    df = len(f) - 1
    for i in range(len(res) - 1, df - 1, -1):
        c = res[i]
        if c:
            res[i] = 0
            for j in range(df):
                res[i - df + j] = (res[i - df + j] - c * f[j]) % p
    while len(res) > 1 and res[-1] == 0:
        res.pop()
    return res


def _find_irreducible(p: int, k: int) -> list[int]:
    """Monic irreducible of degree k over GF(p), little-endian coefficients."""
    if k == 1:
        return [0, 1]

    def powmod_x(e: int, f: list[int]) -> list[int]:
        # X^e mod f
        result = [1]
        base = [0, 1]
        while e:
            if e & 1:
                result = _gfp_polymulmod(result, base, f, p)
            base = _gfp_polymulmod(base, base, f, p)
            e >>= 1
        return result

    def is_irred(f: list[int]) -> bool:
        # f monic degree k: irreducible iff X^{p^k} == X mod f and
        # gcd-degree test X^{p^{k/r}} != X for prime r | k.
        if powmod_x(p ** k, f) != [0, 1]:
            return False
        r = 2
        kk = k
        primes = set()
        while r * r <= kk:
            while kk % r == 0:
                primes.add(r)
                kk //= r
            r += 1
        if kk > 1:
            primes.add(kk)
        for r in primes:
            if powmod_x(p ** (k // r), f) == [0, 1]:
                return False
        return True

    # deterministic search over constant-then-low coefficients
    for n in range(p ** k):
        coeffs = []
        m = n
        for _ in range(k):
            coeffs.append(m % p)
            m //= p
        f = coeffs + [1]
        if f[0] != 0 and is_irred(f):
            return f
    raise RuntimeError(f"no irreducible of degree {k} over GF({p})")


class FiniteField:
    """GF(q) with integer-coded elements; use FiniteField.get(q)."""

    _cache: dict[int, "FiniteField"] = {}

    @classmethod
    def get(cls, q: int) -> "FiniteField":
        fld = cls._cache.get(q)
        if fld is None:
            fld = cls(q)
            cls._cache[q] = fld
        return fld

    def __init__(self, q: int):
        p, k = factor_prime_power(q)
        self.q = q
        self.p = p
        self.k = k
        self.modulus = _find_irreducible(p, k)
        self._build_tables()

    # ---- encoding helpers -------------------------------------------------
    def _decode(self, e: int) -> list[int]:
        digits = []
        for _ in range(self.k):
            digits.append(e % self.p)
            e //= self.p
        return digits

    def _encode(self, digits: list[int]) -> int:
        e = 0
        for d in reversed(digits):
            e = e * self.p + (d % self.p)
        return e

    def _build_tables(self) -> None:
        p, q = self.p, self.q
        # raw multiplication without tables (used to bootstrap the log tables)
        def rawmul(a: int, b: int) -> int:
            pa = self._decode(a)
            pb = self._decode(b)
            prod = _gfp_polymulmod(pa, pb, self.modulus, p)
            prod += [0] * (self.k - len(prod))
            return self._encode(prod)

        # find a generator of GF(q)^*
        n = q - 1
        prime_divs = []
        m = n
        d = 2
        while d * d <= m:
            if m % d == 0:
                prime_divs.append(d)
                while m % d == 0:
                    m //= d
            d += 1
        if m > 1:
            prime_divs.append(m)

        def rawpow(a: int, e: int) -> int:
            r = 1
            while e:
                if e & 1:
                    r = rawmul(r, a)
                a = rawmul(a, a)
                e >>= 1
            return r

        g = None
        for cand in range(2, q):
            if all(rawpow(cand, n // r) != 1 for r in prime_divs):
                g = cand
                break
        if g is None:  # q == 2 edge; unused here (char 2 rejected upstream)
            g = 1
        self.gen = g
        exp = [1] * n
        log = [0] * q
        acc = 1
        for i in range(n):
            exp[i] = acc
            log[acc] = i
            acc = rawmul(acc, g)
        self._exp = exp
        self._log = log
        # additive structure: vector addition in base p
        self._neg = [self._encode([(-d) % p for d in self._decode(a)]) for a in range(q)]

    # ---- arithmetic -------------------------------------------------------
    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        da, db = self._decode(a), self._decode(b)
        return self._encode([(x + y) % self.p for x, y in zip(da, db)])

    def neg(self, a: int) -> int:
        return self._neg[a]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self._neg[b])

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in GF(q)")
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e == 0:
                return 1
            if e < 0:
                raise ZeroDivisionError("0 to a negative power")
            return 0
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    def sqrt(self, a: int) -> int | None:
        """A square root in GF(q), or None (char is odd for all our fields)."""
        if a == 0:
            return 0
        la = self._log[a]
        if la % 2:
            return None
        return self._exp[la // 2]

    def from_int(self, n: int) -> int:
        return n % self.p

    def elements(self) -> range:
        return range(self.q)

    def frobenius(self, a: int) -> int:
        return self.pow(a, self.p)

    def _embedding_root(self, sub: "FiniteField") -> int:
        """A root in this field of sub's defining polynomial (ring embedding)."""
        if self.p != sub.p or self.k % sub.k:
            raise ValueError("not a subfield")
        cache = getattr(self, "_embed_roots", None)
        if cache is None:
            cache = self._embed_roots = {}
        beta = cache.get(sub.q)
        if beta is None:
            fq_coeffs = [c % self.p for c in sub.modulus]
            for cand in range(self.q):
                acc = 0
                for c in reversed(fq_coeffs):
                    acc = self.add(self.mul(acc, cand), c)
                if acc == 0:
                    beta = cand
                    break
            if beta is None:
                raise RuntimeError("embedding root not found")
            cache[sub.q] = beta
        return beta

    def embed(self, a: int, sub: "FiniteField") -> int:
        """Embed element a of a subfield GF(p^d) into this field (d | k)."""
        if sub.q == self.q:
            return a
        if sub.k == 1:
            return a % self.p  # prime subfield shares the encoding
        beta = self._embedding_root(sub)
        digits = sub._decode(a)
        acc = 0
        for c in reversed(digits):
            acc = self.add(self.mul(acc, beta), c)
        return acc

    def __repr__(self) -> str:
        return f"GF({self.q})"


@functools.lru_cache(maxsize=None)
def gf(q: int) -> FiniteField:
    return FiniteField.get(q)
