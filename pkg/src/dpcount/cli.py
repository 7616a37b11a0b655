"""dpcount command line: count (point counts on a model file), verify
(invariant suites with seeded fuzzing), analyze (growth-exponent fits).

Exit codes: 0 success, 1 property failure, 2 validation/usage error,
3 smoothness UNDECIDED without --allow-undecided.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import random
import sys
from importlib import resources

from .globalfield import Rationals, FunctionField, make_primitive
from . import lattices as lat
from . import quadforms as qf
from . import binforms as bf
from .delpezzo import DelPezzoModel, is_smooth, delta0, classify_section
from . import counting as cnt


CSV_COLUMNS = ("model_id", "field", "B", "method", "N_X", "N_U",
               "seconds", "exc_bound")


def data_path(name: str):
    return resources.files("dpcount.data").joinpath(name)


def load_model(path) -> DelPezzoModel:
    with open(path) as f:
        return DelPezzoModel.from_json(json.load(f))


def load_baselines() -> dict:
    with data_path("baselines.json").open() as f:
        return json.load(f)


# ---------------------------------------------------------------------------
# count
# ---------------------------------------------------------------------------

def _parse_heights(spec: str):
    try:
        heights = [int(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise ValueError(f"heights must be integers, got {spec!r}")
    if not heights:
        raise ValueError("empty height schedule")
    if any(b < 1 for b in heights):
        raise ValueError("heights must be >= 1")
    if any(b1 >= b2 for b1, b2 in zip(heights, heights[1:])):
        raise ValueError("height schedule must be strictly increasing")
    return heights


def cmd_count(args) -> int:
    try:
        X = load_model(args.model)
        heights = _parse_heights(args.heights)
    except (OSError, ValueError, KeyError) as e:
        print(f"model validation failure: {e}", file=sys.stderr)
        return 2
    cert = is_smooth(X)
    if cert.status == "SINGULAR":
        print(f"model validation failure: singular model "
              f"(witness {cert.witness_point}, {cert.method})",
              file=sys.stderr)
        return 2
    if cert.status == "UNDECIDED" and not args.allow_undecided:
        print(f"smoothness UNDECIDED ({cert.method}); "
              "pass --allow-undecided to count anyway", file=sys.stderr)
        return 3
    records = []
    for B in heights:
        try:
            if args.method == "brute":
                rec = cnt.count_brute(X, B, workers=args.workers,
                                      exc_bound=args.exc_bound)
            elif X.variant == "DP5CB":
                rec = cnt.count_fiber_dp5(X, B, workers=args.workers)
            elif X.variant == "DP4":
                rec = cnt.count_fiber_dp4(X, B, workers=args.workers)
            else:
                print("model validation failure: the fiber method needs a "
                      "conic-bundle model (DP4 normal form or DP5CB); got "
                      f"{X.variant}", file=sys.stderr)
                return 2
        except ValueError as e:
            print(f"model validation failure: {e}", file=sys.stderr)
            return 2
        records.append(rec)
    _emit_records(records, args.out, args.format)
    return 0


def _emit_records(records, out, fmt):
    rows = [r.row() for r in records]
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        if fmt == "json":
            json.dump(rows, fh, indent=2)
            fh.write("\n")
        else:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            w.writeheader()
            for row in rows:
                w.writerow(row)
    finally:
        if out:
            fh.close()


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

def _rand_lattice_z(rng, rank):
    while True:
        basis = tuple(tuple(rng.randint(-5, 5) for _ in range(rank))
                      for _ in range(rank))
        L = lat.OKLattice(Rationals(), basis)
        try:
            lat.determinant(L)
            return L
        except ValueError:
            continue


def _rand_lattice_f3(rng, rank):
    ctx = FunctionField(3)
    while True:
        basis = tuple(tuple(
            ctx.parse_elem([rng.randrange(3) for _ in range(rng.randint(1, 3))])
            for _ in range(rank)) for _ in range(rank))
        L = lat.OKLattice(ctx, basis)
        try:
            lat.determinant(L)
            return L
        except ValueError:
            continue


def suite_lattices(seed: int, baselines: dict):
    rng = random.Random(seed)
    checks = []
    ok = True
    for _ in range(60):
        L = _rand_lattice_z(rng, rng.randint(2, 4))
        n = L.rank
        det = lat.determinant(L)
        prod = math.prod(lat.successive_minima(L).values)
        ok &= det <= math.factorial(n) * prod and prod <= det
    checks.append(("minkowski-Z: det/n! <= prod(lambda) <= det", ok))
    ok = True
    for _ in range(20):
        L = _rand_lattice_f3(rng, rng.randint(2, 3))
        ok &= math.prod(lat.successive_minima(L).values) == lat.determinant(L)
    checks.append(("minkowski-F3t: prod(lambda) = det", ok))
    ok = True
    ratios = []
    for _ in range(30):
        L = _rand_lattice_z(rng, rng.randint(2, 3))
        R = rng.randint(1, 12)
        n = lat.count_in_box(L, R)
        ok &= n == lat.count_in_box_naive(L, R)
        ratios.append(n / lat.box_envelope(L, R))
    checks.append(("count_in_box = naive oracle", ok))
    lo, hi = baselines["box_ratio_range"]
    checks.append((f"box envelope ratio in [{lo}, {hi}] "
                   f"(observed [{min(ratios):.3f}, {max(ratios):.3f}])",
                   lo <= min(ratios) and max(ratios) <= hi))
    return checks


def _rand_conic(rng):
    ctx = Rationals()
    while True:
        F = qf.QuadraticForm(ctx, tuple(rng.randint(-10, 10)
                                        for _ in range(6)))
        if F.is_nonsingular():
            return F


def suite_conics(seed: int, baselines: dict):
    rng = random.Random(seed)
    checks = []
    ok_count = ok_cover = True
    worst = 0.0
    for _ in range(40):
        F = _rand_conic(rng)
        R = rng.randint(3, 12)
        naive = set()
        for v in qf.zeros_in_box(F, R):
            if any(v):
                naive.add(make_primitive(F.ctx, v))
        ok_count &= qf.count_conic_box(F, R, R, R) == len(naive)
        worst = max(worst, len(naive) / (1 + R))
        lats = qf.solution_lattices(F)
        for p in naive:
            ok_cover &= any(L.contains(p) for L in lats)
    checks.append(("count_conic_box = triple-loop oracle", ok_count))
    checks.append(("zero set covered by solution lattices", ok_cover))
    cap = baselines["conic_ratio_max"] * 1.10
    checks.append((f"conic count ratio <= {cap:.3f} "
                   f"(observed {worst:.3f})", worst <= cap))
    return checks


def suite_binforms(seed: int, baselines: dict):
    rng = random.Random(seed)
    ctx = Rationals()
    checks = []
    ok_disc = ok_res = ok_rep = True
    for _ in range(60):
        d = rng.randint(2, 4)
        f = bf.BinaryForm.from_coeffs(
            ctx, [rng.randint(-6, 6) for _ in range(d + 1)])
        if all(c == 0 for c in f.coeffs):
            continue
        ok_disc &= bf.is_separable(f) == (not bf.has_repeated_root(f))
        g = bf.BinaryForm.from_coeffs(ctx, [rng.randint(-6, 6) for _ in range(3)])
        if any(c != 0 for c in g.coeffs):
            ok_res &= (ctx.is_zero(bf.resultant(f, g))
                       == (bf.binform_gcd_degree(f, g) > 0))
    for _ in range(20):
        while True:
            Q = bf.BinaryForm.from_coeffs(
                ctx, [rng.randint(1, 5), rng.randint(-3, 3), rng.randint(1, 5)])
            if not ctx.is_zero(bf.discriminant(Q)):
                break
        gamma = rng.choice([g for g in range(-20, 21) if g != 0])
        R = rng.randint(2, 10)
        direct = sum(1 for s in range(-R, R + 1) for t in range(-R, R + 1)
                     if Q.evaluate(s, t) == gamma)
        ok_rep &= bf.count_representations(Q, gamma, R) == direct
    checks.append(("separability = no repeated root", ok_disc))
    checks.append(("resultant zero = positive gcd degree", ok_res))
    checks.append(("count_representations = direct scan", ok_rep))
    return checks


def suite_vclasses(seed: int, baselines: dict):
    X = load_model(data_path("dp5_diagonal.json"))
    checks = []
    ok = True
    for a, b in ((2, 3), (3, 7), (4, 25), (8, 9), (5, 27), (4, 243)):
        na = cnt.count_vclasses(X, a).n_tilde
        nb = cnt.count_vclasses(X, b).n_tilde
        nab = cnt.count_vclasses(X, a * b).n_tilde
        ok &= nab == na * nb
    checks.append(("CRT multiplicativity up to norm 10^3", ok))
    cap = baselines["vclass_linear_constant"]
    worst = 0.0
    for ps in (2, 3, 4, 5, 7, 8, 9, 16, 25, 27):
        worst = max(worst, cnt.count_vclasses(X, ps).n_tilde / ps)
    checks.append((f"#V~(p^s) <= {cap} * p^s (observed max ratio "
                   f"{worst:.3f})", worst <= cap))
    return checks


def suite_sections(seed: int, baselines: dict):
    rng = random.Random(seed)
    X = load_model(data_path("fermat3.json"))
    checks = []
    checks.append(("delta0(3) = delta0(4) = delta0(5) = 12",
                   all(delta0(d)["value"] == 12 for d in (3, 4, 5))))
    labels = {}
    for _ in range(6):
        c = tuple(rng.randint(-3, 3) for _ in range(4))
        if all(v == 0 for v in c):
            continue
        labels[make_primitive(X.ctx, c)] = classify_section(X, c).label
    line_c = (1, 1, 0, 0)   # contains the line x0 + x1 = x2 + x3 = 0
    checks.append(("hyperplane through a line is flagged",
                   classify_section(X, line_c).label == "CONTAINS_LINE"))
    checks.append(("generic sections classified without DEGENERATE",
                   all(v != "DEGENERATE" for v in labels.values())))
    checks.append(("a smooth genus-1 section is found",
                   classify_section(X, (1, 2, 3, 5)).label
                   == "SMOOTH_GENUS1"))
    return checks


SUITES = {"lattices": suite_lattices, "conics": suite_conics,
          "binforms": suite_binforms, "vclasses": suite_vclasses,
          "sections": suite_sections}


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from "
              f"{sorted(SUITES)} or 'all'", file=sys.stderr)
        return 2
    baselines = load_baselines()
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    failed = 0
    for name in names:
        for label, ok in SUITES[name](args.seed, baselines):
            print(f"[{name}] {'PASS' if ok else 'FAIL'}  {label}")
            failed += int(not ok)
    print(f"{'OK' if failed == 0 else 'FAILED'} "
          f"({failed} failing check(s), seed {args.seed})")
    return 0 if failed == 0 else 1


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def _envelope_for(model_id: str, method: str):
    if method == "fiber":
        return 1.0 + 0.35
    for d in (1, 2, 3, 4, 5):
        if f"dp{d}" in model_id.lower():
            return 1.0 + 1.0 / d + 0.35
    return None


def cmd_analyze(args) -> int:
    groups = {}
    try:
        for path in args.inputs:
            with open(path) as f:
                for row in csv.DictReader(f):
                    key = (row["model_id"], row["method"])
                    groups.setdefault(key, []).append(
                        (int(row["B"]), int(row["N_U"])))
    except (OSError, KeyError, ValueError) as e:
        print(f"malformed CSV: {e}", file=sys.stderr)
        return 2
    if not groups:
        print("malformed CSV: no data rows", file=sys.stderr)
        return 2
    bad = 0
    print(f"{'model_id':20} {'method':6} {'slope':>8} {'envelope':>9} flag")
    for (model_id, method), pairs in sorted(groups.items()):
        if len({b for b, _ in pairs}) < 3:
            print(f"need >= 3 rows with distinct B for {model_id}/{method}",
                  file=sys.stderr)
            return 2
        fit = cnt.fit_exponent(pairs)
        env = _envelope_for(model_id, method)
        flag = ""
        if env is not None and fit.slope > env:
            flag = "EXCEEDS"
            bad += 1
        print(f"{model_id:20} {method:6} {fit.slope:8.4f} "
              f"{'-' if env is None else format(env, '9.4f')} {flag}")
    return 0 if bad == 0 else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dpcount",
        description="Exact point counts and invariant suites for del Pezzo "
                    "surface models over Q and Fq(t).")
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("count", help="count points on a model file")
    pc.add_argument("--model", required=True, help="model JSON path")
    pc.add_argument("--heights", required=True,
                    help="comma-separated strictly increasing bounds")
    pc.add_argument("--method", choices=("brute", "fiber"), default="brute")
    pc.add_argument("--workers", type=int, default=None,
                    help="worker processes (default: DPCOUNT_THREADS or 1)")
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--exc-bound", type=int, default=10,
                    help="exceptional-curve search height bound")
    pc.add_argument("--out", default=None, help="output path (default stdout)")
    pc.add_argument("--format", choices=("csv", "json"), default="csv")
    pc.add_argument("--allow-undecided", action="store_true",
                    help="count even when smoothness is UNDECIDED")
    pc.set_defaults(fn=cmd_count)

    pv = sub.add_parser("verify", help="run invariant suites")
    pv.add_argument("--suite", required=True,
                    help="lattices|conics|binforms|vclasses|sections|all")
    pv.add_argument("--seed", type=int, default=0)
    pv.set_defaults(fn=cmd_verify)

    pa = sub.add_parser("analyze", help="fit growth exponents from CSV runs")
    pa.add_argument("inputs", nargs="+", help="CSV files from dpcount count")
    pa.set_defaults(fn=cmd_analyze)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "count" and args.workers is not None \
            and args.workers < 1:
        print("worker count must be >= 1", file=sys.stderr)
        return 2
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
