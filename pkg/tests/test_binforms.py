"""Binary forms: resultants, discriminants, separability, small-value and
representation counts against direct scans and a sympy oracle."""

import itertools
import math
import random

import pytest
import sympy

from dpcount.globalfield import Rationals, FunctionField
from dpcount.binforms import (MultiPoly, BinaryForm, resultant, discriminant,
                              is_separable, has_repeated_root, binform_gcd,
                              binform_gcd_degree, count_small_values,
                              count_separable_small, count_representations,
                              count_in_ideal)

QQ = Rationals()
F3 = FunctionField(3)


def bform(coeffs, ctx=QQ):
    return BinaryForm.from_coeffs(ctx, list(coeffs))


def dehom(f):
    """sympy polynomial f(s, 1)."""
    s = sympy.Symbol("s")
    return sum(int(c) * s ** i for i, c in enumerate(f.coeffs))


def test_resultant_root_product():
    """Res(f, g) = lc(f)^deg(g) * prod g(root) for split monic f."""
    rng = random.Random(43)
    for _ in range(30):
        roots = [rng.randint(-4, 4) for _ in range(rng.randint(1, 3))]
        fc = [1]
        for a in roots:   # multiply (s - a t) into the coefficient list
            fc = [0] + fc
            for i in range(len(fc) - 1):
                fc[i] -= a * fc[i + 1]
        f = bform(fc)
        g = bform([rng.randint(-5, 5) for _ in range(rng.randint(1, 3))]
                  + [rng.randint(1, 5)])
        expected = math.prod(g.evaluate(a, 1) for a in roots)
        assert resultant(f, g) == expected


def test_resultant_is_sylvester_determinant():
    rng = random.Random(59)
    for _ in range(20):
        df, dg = rng.randint(1, 4), rng.randint(1, 4)
        fc = [rng.randint(-5, 5) for _ in range(df)] + [rng.randint(1, 5)]
        gc = [rng.randint(-5, 5) for _ in range(dg)] + [rng.randint(1, 5)]
        rows = []
        fd, gd = list(reversed(fc)), list(reversed(gc))
        for i in range(dg):
            rows.append([0] * i + fd + [0] * (dg - 1 - i))
        for i in range(df):
            rows.append([0] * i + gd + [0] * (df - 1 - i))
        det = int(sympy.Matrix(rows).det())
        assert resultant(bform(fc), bform(gc)) == det


def test_discriminant_matches_sympy():
    rng = random.Random(47)
    s = sympy.Symbol("s")
    for _ in range(40):
        d = rng.randint(2, 4)
        f = bform([rng.randint(-5, 5) for _ in range(d)] + [rng.randint(1, 5)])
        assert discriminant(f) == sympy.discriminant(dehom(f), s)


def test_separability_is_squarefreeness():
    assert is_separable(bform([0, 0, 1])) is False          # s^2
    assert is_separable(bform([-1, 0, 1]))                  # s^2 - t^2
    assert has_repeated_root(bform([1, 2, 1]))              # (s + t)^2
    assert not has_repeated_root(bform([1, 0, 0, 1]))


def test_separability_fqt():
    t = F3.t
    f = BinaryForm.from_coeffs(F3, [t, F3.zero, F3.one])  # s^2 + t_poly * u^2
    assert is_separable(f)
    g = BinaryForm.from_coeffs(F3, [F3.zero, F3.zero, F3.one])
    assert not is_separable(g)


def test_binform_gcd_consistency():
    f = bform([-1, 0, 1])         # (s-t)(s+t)
    g = bform([1, 1])             # s + t
    tmult, u = binform_gcd(f, g)
    assert binform_gcd_degree(f, g) == 1
    assert tmult + len(u) - 1 == 1
    coprime = bform([1, 0, 1])
    assert binform_gcd_degree(coprime, g) == 0
    assert QQ.is_zero(resultant(f, g))
    assert not QQ.is_zero(resultant(coprime, g))


def test_count_small_values_direct():
    G = MultiPoly(QQ, 2, {(2, 0): 1, (0, 2): -2})
    R, S = 6, 10
    cnt = zeros = 0
    for x in itertools.product(range(-R, R + 1), repeat=2):
        v = x[0] ** 2 - 2 * x[1] ** 2
        if v == 0:
            zeros += 1
        elif abs(v) <= S:
            cnt += 1
    out = count_small_values(G, R, S)
    assert (out.count, out.zeros) == (cnt, zeros)


def test_count_separable_small_annulus():
    f = bform([-2, 0, 1])   # s^2 - 2 t^2, separable
    out = count_separable_small(f, 8, 4)
    # pairs live in the annulus 4 < max(|s|,|t|) <= 8; no rational zeros
    assert out.zeros == 0
    assert out.count >= 1   # e.g. (s,t)=(7,5): 49-50=-1
    with pytest.raises(ValueError):
        count_separable_small(bform([1, 2, 1]), 8, 4)


def test_count_representations_direct_scan():
    rng = random.Random(53)
    for _ in range(15):
        Q = bform([rng.randint(1, 4), rng.randint(-3, 3), rng.randint(1, 4)])
        if QQ.is_zero(discriminant(Q)):
            continue
        gamma, R = rng.randint(1, 25), rng.randint(2, 8)
        direct = sum(1 for s in range(-R, R + 1) for t in range(-R, R + 1)
                     if Q.evaluate(s, t) == gamma)
        assert count_representations(Q, gamma, R) == direct


def test_count_in_ideal_divisibility():
    Q = bform([1, 0, 1])    # s^2 + t^2
    out = count_in_ideal(Q, 6, 40, 5)
    cnt = zeros = 0
    for s in range(-6, 7):
        for t in range(-6, 7):
            if (s, t) == (0, 0) or math.gcd(s, t) != 1:
                continue
            v = s * s + t * t
            if v == 0:
                zeros += 1
            elif v <= 40 and v % 5 == 0:
                cnt += 1
    assert (out.count, out.zeros) == (cnt, zeros)


def test_multipoly_substitute_and_evaluate():
    x = MultiPoly.variable(QQ, 2, 0)
    y = MultiPoly.variable(QQ, 2, 1)
    p = x * x + y.scale(3)
    assert p.evaluate((2, 5)) == 19
    q = p.substitute([y, x])   # swap variables
    assert q.evaluate((2, 5)) == 31
