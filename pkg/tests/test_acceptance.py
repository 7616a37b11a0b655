"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line on the real stdout so the criterion
verdicts survive pytest capture.  Criteria with wall-clock requirements
measure and enforce them here; hardware-bound criteria are asserted as
written even where the host cannot meet them.
"""

import math
import random
import time

import numpy as np

from dpcount.globalfield import Rationals, FunctionField, make_primitive
from dpcount import lattices as lat
from dpcount.lattices import (OKLattice, determinant, successive_minima,
                              count_in_box, count_in_box_naive, box_envelope,
                              congruence_lattice)
from dpcount.quadforms import (QuadraticForm, count_conic_box,
                               solution_lattices, zeros_in_box)
from dpcount.delpezzo import (DelPezzoModel, is_smooth, find_lines,
                              find_lines_mod, dual_quartic_degree, delta0)
from dpcount.counting import (count_brute, count_fiber_dp5, count_fiber_dp4,
                              count_vclasses, fit_exponent,
                              count_section_points)

QQ = Rationals()
F3 = FunctionField(3)

QUAD_KEYS = ("2,0,0", "0,2,0", "0,0,2", "1,1,0", "1,0,1", "0,1,1")


def report(capsys, num, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}",
              flush=True)
    assert ok, detail


def rand_z_lattice(rng, rank, cap=6):
    while True:
        L = OKLattice(QQ, tuple(tuple(rng.randint(-cap, cap)
                                      for _ in range(rank))
                                for _ in range(rank)))
        try:
            determinant(L)
            return L
        except ValueError:
            continue


def rand_f3_lattice(rng, rank):
    while True:
        basis = tuple(tuple(
            F3.from_codes([rng.randrange(3)
                           for _ in range(rng.randint(1, 3))])
            for _ in range(rank)) for _ in range(rank))
        L = OKLattice(F3, basis)
        try:
            determinant(L)
            return L
        except ValueError:
            continue


def test_criterion_01_minkowski(capsys):
    rng = random.Random(1001)
    t0 = time.perf_counter()
    for _ in range(500):
        L = rand_z_lattice(rng, rng.randint(2, 4))
        n, det = L.rank, determinant(L)
        prod = math.prod(successive_minima(L).values)
        assert det <= math.factorial(n) * prod
        assert prod <= det
    for _ in range(500):
        L = rand_f3_lattice(rng, rng.randint(2, 3))
        assert math.prod(successive_minima(L).values) == determinant(L)
    dt = time.perf_counter() - t0
    report(capsys, 1, dt <= 60.0,
           f"500+500 Minkowski checks exact in {dt:.1f}s (limit 60s)")


def test_criterion_02_box_counts(capsys, baselines):
    rng = random.Random(1002)
    lo, hi = baselines["box_ratio_range"]
    ratios, done = [], 0
    while done < 200:
        L = rand_z_lattice(rng, rng.randint(2, 3), cap=5)
        if determinant(L) > 10 ** 4:
            continue
        R = rng.randint(1, 50)
        # keep the naive coefficient-box oracle tractable
        vol = math.prod(2 * int(b * R) + 1
                        for b in lat._coefficient_bounds(L))
        if vol > 3 * 10 ** 5:
            continue
        n = count_in_box(L, R)
        assert n == count_in_box_naive(L, R), (L.basis, R)
        ratios.append(n / box_envelope(L, R))
        done += 1
    ok = lo <= min(ratios) and max(ratios) <= hi
    report(capsys, 2, ok,
           f"200 exact box counts; envelope ratios "
           f"[{min(ratios):.3f}, {max(ratios):.3f}] within [{lo}, {hi}]")


def conic_box_oracle(F, R1, R2, R3):
    """Dense vectorized scan, independent of the library's loop."""
    a11, a22, a33, a12, a13, a23 = (int(c) for c in F.coeffs)
    X, Y, Z = np.meshgrid(np.arange(-R1, R1 + 1, dtype=np.int64),
                          np.arange(-R2, R2 + 1, dtype=np.int64),
                          np.arange(-R3, R3 + 1, dtype=np.int64),
                          indexing="ij")
    V = (a11 * X * X + a22 * Y * Y + a33 * Z * Z
         + a12 * X * Y + a13 * X * Z + a23 * Y * Z)
    sel = (V == 0) & ((X != 0) | (Y != 0) | (Z != 0))
    xs, ys, zs = X[sel], Y[sel], Z[sel]
    g = np.gcd(np.gcd(np.abs(xs), np.abs(ys)), np.abs(zs))
    pts = set()
    for t in zip((xs // g).tolist(), (ys // g).tolist(), (zs // g).tolist()):
        lead = next(c for c in t if c != 0)
        if lead < 0:
            t = tuple(-c for c in t)
        pts.add(t)
    return len(pts)


def test_criterion_03_conic_counts(capsys, baselines):
    rng = random.Random(1003)
    worst = 0.0
    done = 0
    while done < 200:
        F = QuadraticForm(QQ, tuple(rng.randint(-20, 20) for _ in range(6)))
        if not F.is_nonsingular():
            continue
        R1, R2, R3 = (rng.randint(3, 50) for _ in range(3))
        n = count_conic_box(F, R1, R2, R3)
        assert n == conic_box_oracle(F, R1, R2, R3), (F.coeffs, R1, R2, R3)
        worst = max(worst, n / (1.0 + (R1 * R2 * R3) ** (1.0 / 3.0)))
        done += 1
    cap = baselines["conic_ratio_max"] * 1.10
    report(capsys, 3, worst <= cap,
           f"200 exact conic box counts; max count/(1+(R1R2R3)^(1/3)) = "
           f"{worst:.3f} <= {cap:.3f}")


def test_criterion_04_solution_lattice_cover(capsys):
    rng = random.Random(1004)
    done = 0
    while done < 100:
        F = QuadraticForm(QQ, tuple(rng.randint(-8, 8) for _ in range(6)))
        if not F.is_nonsingular():
            continue
        lats = solution_lattices(F)
        for v in zeros_in_box(F, 6):
            if not any(v):
                continue
            p = make_primitive(QQ, v)
            assert any(L.contains(p) for L in lats), (F.coeffs, p)
        done += 1
    report(capsys, 4, True,
           "zero sets of 100 fuzzed conics covered by solution lattices "
           "(exact inclusion)")


def test_criterion_05_vclasses(capsys, dp5_diagonal, baselines):
    t0 = time.perf_counter()
    cache = {}

    def vc(d):
        if d not in cache:
            cache[d] = count_vclasses(dp5_diagonal, d)
        return cache[d]

    # exhaustive CRT over coprime pairs with small product
    for a in range(2, 12):
        for b in range(a + 1, 121):
            if a * b > 120 or math.gcd(a, b) != 1:
                continue
            assert vc(a * b).n_tilde == vc(a).n_tilde * vc(b).n_tilde
            assert vc(a * b).n_orbits == vc(a).n_orbits * vc(b).n_orbits
    # sampled coprime pairs up to norm 10^3
    for a, b in ((11, 13), (13, 19), (16, 27), (23, 31)):
        assert vc(a * b).n_tilde == vc(a).n_tilde * vc(b).n_tilde
        assert vc(a * b).n_orbits == vc(a).n_orbits * vc(b).n_orbits
    # linear envelope on prime powers
    C = baselines["vclass_linear_constant"]
    worst = 0.0
    for n in (2, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49, 64, 81, 121, 125):
        worst = max(worst, vc(n).n_tilde / n)
    dt = time.perf_counter() - t0
    ok = worst <= C and dt <= 120.0
    report(capsys, 5, ok,
           f"CRT multiplicativity exact; max #V~(p^s)/p^s = {worst:.2f} <= "
           f"{C}; {dt:.1f}s (limit 120s)")


def test_criterion_06_congruence_lattice_det(capsys):
    rng = random.Random(1006)
    for _ in range(50):
        while True:
            d = rng.randint(2, 60)
            y = tuple(rng.randint(0, d - 1) for _ in range(3))
            if math.gcd(math.gcd(math.gcd(y[0], y[1]), y[2]), d) == 1:
                break
        assert determinant(congruence_lattice(QQ, y, d)) == d * d
    for _ in range(50):
        while True:
            d = F3.from_codes([rng.randrange(3)
                               for _ in range(rng.randint(2, 3))])
            if F3.is_zero(d) or F3.is_unit(d):
                continue
            y = tuple(F3.from_codes([rng.randrange(3)
                                     for _ in range(rng.randint(1, 2))])
                      for _ in range(3))
            g = d
            for yi in y:
                g = F3.gcd(g, yi)
            if F3.is_unit(g):
                break
        assert determinant(congruence_lattice(F3, y, d)) == F3.norm(d) ** 2
    report(capsys, 6, True,
           "det(congruence lattice) = N(d)^2 for 100 random (y, d), "
           "both fields")


def rand_smooth_dp5(rng, ctx_json, to_coeff):
    while True:
        coeffs = {part: {k: to_coeff(rng) for k in QUAD_KEYS}
                  for part in ("Q1", "Q2")}
        try:
            X = DelPezzoModel.from_json({
                "field": ctx_json, "variant": "DP5CB",
                "model_id": "fuzz_dp5", "coeffs": coeffs})
        except ValueError:
            continue
        if is_smooth(X).status == "SMOOTH":
            return X


def test_criterion_07_fiber_equals_brute(capsys, dp5_diagonal, dp4_normal):
    rng = random.Random(1007)
    models_q = [dp5_diagonal,
                rand_smooth_dp5(rng, {"field": "Q"},
                                lambda r: r.randint(-3, 3)),
                rand_smooth_dp5(rng, {"field": "Q"},
                                lambda r: r.randint(-3, 3))]
    for X in models_q:
        for B in (10, 50, 100, 200):
            b, f = count_brute(X, B), count_fiber_dp5(X, B)
            assert (b.n_x, b.n_u) == (f.n_x, f.n_u), (X.model_id, B)
    models_f3 = [rand_smooth_dp5(rng, {"field": "Fq(t)", "q": 3},
                                 lambda r: [r.randrange(3)])
                 for _ in range(2)]
    for X in models_f3:
        for B in (3, 9, 27):
            b, f = count_brute(X, B), count_fiber_dp5(X, B)
            assert (b.n_x, b.n_u) == (f.n_x, f.n_u), (X.model_id, B)
    for B in (10, 50, 100, 200):
        b, f = count_brute(dp4_normal, B), count_fiber_dp4(dp4_normal, B)
        assert (b.n_x, b.n_u) == (f.n_x, f.n_u), B
    report(capsys, 7, True,
           "fiber = brute exactly: 3 DP5 models over Q (B <= 200), "
           "2 over F3(t) (B <= 27), shipped DP4")


def test_criterion_08_performance(capsys, dp5_diagonal):
    B = 2000
    t0 = time.perf_counter()
    b1 = count_brute(dp5_diagonal, B, workers=1)
    tb1 = time.perf_counter() - t0
    t0 = time.perf_counter()
    f1 = count_fiber_dp5(dp5_diagonal, B, workers=1)
    tf1 = time.perf_counter() - t0
    t0 = time.perf_counter()
    b8 = count_brute(dp5_diagonal, B, workers=8)
    tb8 = time.perf_counter() - t0
    assert (b1.n_x, b1.n_u) == (f1.n_x, f1.n_u) == (b8.n_x, b8.n_u)
    fiber_speedup = tb1 / tf1
    worker_speedup = tb1 / tb8
    ok = fiber_speedup >= 5.0 and worker_speedup >= 4.0
    report(capsys, 8, ok,
           f"B=2000 counts identical; fiber speedup {fiber_speedup:.1f}x "
           f"(need >= 5), 8-worker brute speedup {worker_speedup:.1f}x "
           f"(need >= 4)")


def test_criterion_09_exponent_envelopes(capsys, dp5_diagonal, dp4_normal,
                                         fermat3, baselines):
    tol = baselines["slope_tolerance"]
    checks = []

    recs = [count_fiber_dp5(dp5_diagonal, B) for B in (100, 1000, 10000)]
    s = fit_exponent(recs).slope
    checks.append(("dp5 fiber", s,
                   abs(s - baselines["slopes"]["dp5_diagonal_fiber"]) <= tol
                   and s <= 1.35))

    recs = [count_fiber_dp4(dp4_normal, B) for B in (100, 400, 1600)]
    s = fit_exponent(recs).slope
    checks.append(("dp4 fiber", s,
                   abs(s - baselines["slopes"]["dp4_normal_fiber"]) <= tol
                   and s <= 1.35))

    recs = [count_brute(fermat3, B) for B in (50, 100, 200)]
    s = fit_exponent(recs).slope
    checks.append(("dp3 brute", s,
                   abs(s - baselines["slopes"]["dp3_fermat_brute"]) <= tol
                   and s <= 1.0 + 1.0 / 3.0 + 0.35))

    pairs = [(B, count_section_points(fermat3, (1, 2, 3, 5), B))
             for B in (100, 300, 1000)]
    s = fit_exponent(pairs).slope
    checks.append(("genus-1 section", s,
                   abs(s - baselines["slopes"]["fermat3_section_1235"]) <= tol
                   and s < 0.5))

    ok = all(c[2] for c in checks)
    detail = "; ".join(f"{name} slope {sl:.3f}" for name, sl, _ in checks)
    report(capsys, 9, ok, detail + " (all within pinned +-0.02 and envelope)")


def test_criterion_10_dual_degree(capsys, dp2_fermat4):
    t0 = time.perf_counter()
    out = dual_quartic_degree(dp2_fermat4, 101, 50)
    dt = time.perf_counter() - t0
    ok = out["degree"] == 12 and dt <= 120.0
    report(capsys, 10, ok,
           f"dual curve degree {out['degree']} (want 12) in {dt:.1f}s "
           f"(limit 120s)")


def test_criterion_11_exceptional_sets(capsys, fermat3):
    n_q = len(find_lines(fermat3, 10).curves)
    n_7 = len(find_lines_mod(fermat3, 7).curves)
    ok = n_q == 3 and n_7 == 27
    report(capsys, 11, ok,
           f"Fermat cubic: {n_q} rational lines at H<=10 (want 3); "
           f"{n_7} lines over F7 (want 27, <= 27)")


def test_criterion_12_delta0(capsys):
    vals = {d: delta0(d)["value"] for d in (3, 4, 5)}
    ok = all(v == 12 for v in vals.values())
    report(capsys, 12, ok, f"delta0 = {vals} (want 12 for d in 3,4,5)")
