"""Point counting: brute-force vs fiberwise routes, pinned goldens,
congruence-class counts, exponent fits, section counts."""

import itertools
import math

import pytest

from dpcount.globalfield import Rationals, FunctionField
from dpcount.quadforms import QuadraticForm
from dpcount.counting import (CountRecord, count_brute, count_fiber_dp5,
                              count_fiber_dp4, count_vclasses, fit_exponent,
                              count_section_points, conic_points,
                              conic_points_scan, conic_count_scan)

QQ = Rationals()
F3 = FunctionField(3)


# -- brute vs fiber agreement ------------------------------------------------

def test_dp5_brute_fiber_agree_q(dp5_diagonal, baselines):
    golden = baselines["counts"]["dp5_diagonal"]
    for B in (10, 50, 100):
        b = count_brute(dp5_diagonal, B)
        assert (b.n_x, b.n_u) == tuple(golden["brute"][str(B)])
        if str(B) in golden["fiber"]:
            f = count_fiber_dp5(dp5_diagonal, B)
            assert (f.n_x, f.n_u) == (b.n_x, b.n_u)


def test_dp5_brute_fiber_agree_fqt(dp5_diagonal_f3, baselines):
    golden = baselines["counts"]["dp5_diagonal_f3"]
    for B in (3, 9, 27):
        b = count_brute(dp5_diagonal_f3, B)
        f = count_fiber_dp5(dp5_diagonal_f3, B)
        assert (b.n_x, b.n_u) == (f.n_x, f.n_u) == tuple(golden[str(B)])


def test_dp4_brute_fiber_agree(dp4_normal, baselines):
    golden = baselines["counts"]["dp4_normal"]
    for B in (10, 50, 100):
        b = count_brute(dp4_normal, B)
        assert (b.n_x, b.n_u) == tuple(golden["brute"][str(B)])
    f = count_fiber_dp4(dp4_normal, 100)
    assert (f.n_x, f.n_u) == tuple(golden["brute"]["100"])


def test_dp4_brute_fiber_agree_fqt(dp4_f3, baselines):
    golden = baselines["counts"]["dp4_f3"]
    for B in (3, 9):
        b = count_brute(dp4_f3, B)
        f = count_fiber_dp4(dp4_f3, B)
        assert (b.n_x, b.n_u) == (f.n_x, f.n_u) == tuple(golden[str(B)])


def test_dp3_numpy_matches_small_scan(fermat3, baselines):
    # B <= 12 uses the plain python box scan; the vectorized path must
    # reproduce it exactly
    from dpcount.counting import _dp3_brute
    for B in (5, 12):
        small = _dp3_brute(fermat3, B, 1, 10)
        rec = count_brute(fermat3, B)
        assert (rec.n_x, rec.n_u) == (small[0], small[1])
    golden = baselines["counts"]["dp3_fermat"]["brute"]
    rec = count_brute(fermat3, 50)
    assert (rec.n_x, rec.n_u) == tuple(golden["50"])


def test_dp2_dp1_goldens(dp2_fermat4, dp1_sample, baselines):
    for B in (3, 6):
        rec = count_brute(dp2_fermat4, B)
        assert (rec.n_x, rec.n_u) == tuple(
            baselines["counts"]["dp2_fermat4"]["brute"][str(B)])
    for B in (3, 6, 10):
        rec = count_brute(dp1_sample, B)
        assert (rec.n_x, rec.n_u) == tuple(
            baselines["counts"]["dp1_sample"]["brute"][str(B)])
        assert rec.n_x == rec.n_u   # no exceptional curves found at height B


def test_worker_determinism(dp5_diagonal):
    recs = [count_brute(dp5_diagonal, 60, workers=w) for w in (1, 2, 8)]
    assert len({(r.n_x, r.n_u) for r in recs}) == 1


def test_counts_monotone_in_b(dp5_diagonal):
    prev = (0, 0)
    for B in (5, 10, 20, 40):
        rec = count_fiber_dp5(dp5_diagonal, B)
        assert rec.n_x >= prev[0] and rec.n_u >= prev[1]
        prev = (rec.n_x, rec.n_u)


def test_count_record_row():
    rec = CountRecord("m", "Q", 10, "brute", 5, 3, 0.1234, 100)
    row = rec.row()
    assert row == {"model_id": "m", "field": "Q", "B": 10, "method": "brute",
                   "N_X": 5, "N_U": 3, "seconds": 0.123, "exc_bound": 100}
    with pytest.raises(AssertionError):
        CountRecord("m", "Q", 10, "brute", 3, 5, 0.1, 100)


# -- conic scan equivalences -------------------------------------------------

def test_conic_scans_agree():
    import random
    rng = random.Random(61)
    for _ in range(20):
        F = QuadraticForm(QQ, tuple(rng.randint(-6, 6) for _ in range(6)))
        R = rng.randint(2, 30)
        pts = conic_points_scan(F, R)
        assert conic_count_scan(F, R) == len(pts)
        assert conic_points(F, R)[0] == pts


def test_conic_points_certified_route():
    # x^2 + y^2 - 2 z^2 is isotropic: the parameterized route and the scan
    # must produce the same canonical point set
    F = QuadraticForm(QQ, (1, 1, -2, 0, 0, 0))
    for R in (5, 25, 60):
        assert conic_points(F, R)[0] == conic_points_scan(F, R)


# -- congruence classes ------------------------------------------------------

def test_count_vclasses_goldens(dp5_diagonal, baselines):
    golden = baselines["vclass_goldens"]["dp5_diagonal"]
    for d, (nt, no) in golden.items():
        out = count_vclasses(dp5_diagonal, int(d))
        assert (out.n_tilde, out.n_orbits) == (nt, no), d


def test_count_vclasses_crt(dp5_diagonal):
    for a, b in ((2, 3), (3, 7), (4, 25)):
        na = count_vclasses(dp5_diagonal, a).n_tilde
        nb = count_vclasses(dp5_diagonal, b).n_tilde
        nab = count_vclasses(dp5_diagonal, a * b).n_tilde
        assert nab == na * nb


def test_count_vclasses_fqt(dp5_diagonal_f3):
    t = F3.t
    out = count_vclasses(dp5_diagonal_f3, t)
    assert out.n_tilde >= 0 and out.n_orbits <= max(out.n_tilde, 1)
    # multiplicativity across coprime moduli
    n1 = count_vclasses(dp5_diagonal_f3, t).n_tilde
    n2 = count_vclasses(dp5_diagonal_f3, t + F3.one).n_tilde
    n12 = count_vclasses(dp5_diagonal_f3, t * (t + F3.one)).n_tilde
    assert n12 == n1 * n2


def test_count_vclasses_errors(dp5_diagonal, fermat3):
    with pytest.raises(ValueError):
        count_vclasses(fermat3, 5)
    with pytest.raises(ValueError):
        count_vclasses(dp5_diagonal, 10 ** 4 + 1)


# -- exponent fitting --------------------------------------------------------

def test_fit_exponent_exact_lines():
    fit = fit_exponent([(10, 10), (100, 100), (1000, 1000)])
    assert abs(fit.slope - 1.0) < 1e-12
    assert max(abs(r) for r in fit.residuals) < 1e-12
    fit2 = fit_exponent([(10, 100), (100, 10 ** 4), (1000, 10 ** 6)])
    assert abs(fit2.slope - 2.0) < 1e-12


def test_fit_exponent_accepts_records():
    recs = [CountRecord("m", "Q", B, "brute", B * B, B * B, 0.0, 10)
            for B in (10, 100, 1000)]
    fit = fit_exponent(recs)
    assert abs(fit.slope - 2.0) < 1e-12


def test_fit_exponent_errors():
    with pytest.raises(ValueError):
        fit_exponent([(10, 10), (100, 100)])
    with pytest.raises(ValueError):
        fit_exponent([(10, 10), (10, 20), (10, 30)])
    with pytest.raises(ValueError):
        fit_exponent([(10, 0), (100, 5), (1000, 9)])


# -- hyperplane-section counts -----------------------------------------------

def naive_section_count(X, c, B):
    ctx = X.ctx
    F = X.parts["F"]
    seen = set()
    from dpcount.globalfield import make_primitive
    for x in itertools.product(range(-B, B + 1), repeat=4):
        if not any(x):
            continue
        if sum(ci * xi for ci, xi in zip(c, x)) != 0:
            continue
        if F.evaluate(x) == 0 and math.gcd(math.gcd(x[0], x[1]),
                                           math.gcd(x[2], x[3])) == 1:
            seen.add(make_primitive(ctx, x))
    return len(seen)


def test_count_section_points_oracle(fermat3):
    for c in ((1, 2, 3, 5), (1, 1, 0, 0), (1, 0, 0, 0)):
        for B in (4, 8):
            assert count_section_points(fermat3, c, B) == \
                naive_section_count(fermat3, c, B)


def test_count_section_points_golden(fermat3, baselines):
    golden = baselines["counts"]["fermat3_sections_1235"]
    assert count_section_points(fermat3, (1, 2, 3, 5), 100) == golden["100"]


def test_count_section_points_needs_unit_coefficient(fermat3):
    with pytest.raises(ValueError):
        count_section_points(fermat3, (2, 3, 5, 7), 5)
