"""Ternary quadratic forms: exact conic counts, parameterizations,
solution-lattice covers, lattice-quadric counts."""

import itertools
import random

import pytest

from dpcount.globalfield import (Rationals, FunctionField, make_primitive,
                                 height_proj, is_primitive)
from dpcount.lattices import OKLattice
from dpcount.quadforms import (QuadraticForm, discriminants, count_conic_box,
                               zeros_in_box, find_point, parameterize,
                               solution_lattices, count_fiber_dp4,
                               count_lattice_quadric,
                               count_lattice_quadric_naive)

QQ = Rationals()
F3 = FunctionField(3)


def rand_form(rng, cap=10, nonsingular=True):
    while True:
        F = QuadraticForm(QQ, tuple(rng.randint(-cap, cap) for _ in range(6)))
        if not nonsingular or F.is_nonsingular():
            return F


def oracle_points(F, R):
    """Canonical projective zeros in the symmetric box, by full scan."""
    return {make_primitive(F.ctx, v) for v in zeros_in_box(F, R) if any(v)}


def test_discriminants_known_values():
    # x^2 + y^2 - z^2: gram diag(2, 2, -2), det -8
    F = QuadraticForm(QQ, (1, 1, -1, 0, 0, 0))
    delta, delta0 = discriminants(F)
    assert delta == 8
    assert delta0 == 2 ** 2   # content of the 2x2 minors is 4
    G = QuadraticForm(QQ, (0, 0, 0, 1, 0, 0))   # xy, rank 2
    assert discriminants(G)[0] == 0


def test_count_conic_box_matches_oracle():
    rng = random.Random(29)
    for _ in range(25):
        F = rand_form(rng)
        R = rng.randint(2, 9)
        assert count_conic_box(F, R, R, R) == len(oracle_points(F, R))


def test_count_conic_box_asymmetric():
    F = QuadraticForm(QQ, (1, 1, -2, 0, 0, 0))
    pts = set()
    for v in itertools.product(range(-2, 3), range(-5, 6), range(-4, 5)):
        if any(v) and F.evaluate(v) == 0:
            pts.add(make_primitive(QQ, v))
    assert count_conic_box(F, 2, 5, 4) == len(pts)


def test_find_point_returns_zero():
    rng = random.Random(31)
    found = 0
    for _ in range(30):
        F = rand_form(rng)
        p = find_point(F, H_max=20)
        if p is not None:
            found += 1
            assert F.ctx.is_zero(F.evaluate(p))
            assert is_primitive(QQ, p)
    assert found >= 10   # isotropic forms are common at these sizes


def test_find_point_fqt():
    t = F3.t
    F = QuadraticForm(F3, (F3.one, F3.from_int(2), t, F3.zero, F3.zero,
                           F3.zero))
    p = find_point(F, H_max=9)
    assert p is not None and F3.is_zero(F.evaluate(p))


def test_parameterize_sweeps_conic():
    """Every point of height <= R is hit by the parameterization at some
    parameter; cross-checked against the full scan."""
    F = QuadraticForm(QQ, (1, 1, -2, 0, 0, 0))
    p0 = find_point(F, H_max=5)
    param = parameterize(F, p0)
    want = oracle_points(F, 8)
    got = set()
    for s in range(-40, 41):
        for t in range(-40, 41):
            if (s, t) == (0, 0):
                continue
            x = param.evaluate(s, t)
            if height_proj(QQ, x) <= 8:
                got.add(x)
    assert want == got
    assert p0 in got


def test_solution_lattices_cover_zero_set():
    rng = random.Random(37)
    for _ in range(25):
        F = rand_form(rng)
        lats = solution_lattices(F)
        for p in oracle_points(F, 6):
            assert any(L.contains(p) for L in lats), (F.coeffs, p)


def test_solution_lattices_need_nonsingular():
    with pytest.raises(ValueError):
        solution_lattices(QuadraticForm(QQ, (0, 0, 0, 1, 0, 0)))


def test_count_fiber_dp4_is_box_count():
    F = QuadraticForm(QQ, (3, 1, -1, 0, 0, 0))
    assert count_fiber_dp4(F, 2, 6) == count_conic_box(F, 2, 6, 6)
    degenerate = QuadraticForm(QQ, (1, 1, 1, 0, 0, 2))  # q(0,y,z)=(y+z)^2
    with pytest.raises(ValueError):
        count_fiber_dp4(degenerate, 2, 6)


def test_count_lattice_quadric_matches_naive():
    rng = random.Random(41)
    for _ in range(10):
        basis = tuple(tuple(rng.randint(-3, 3) for _ in range(3))
                      for _ in range(3))
        L = OKLattice(QQ, basis)
        try:
            from dpcount.lattices import determinant
            determinant(L)
        except ValueError:
            continue
        Q = rand_form(rng, cap=5, nonsingular=False)
        alpha, R = rng.randint(2, 5), rng.randint(2, 30)
        import warnings
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            a = count_lattice_quadric(L, Q, alpha, R)
        assert a == count_lattice_quadric_naive(L, Q, alpha, R)
