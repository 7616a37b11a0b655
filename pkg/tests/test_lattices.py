"""O_K-lattices: reduction, minima, exact box counts, special lattices."""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from dpcount.globalfield import Rationals, FunctionField
from dpcount.lattices import (OKLattice, determinant, successive_minima,
                              shortest_vector, count_in_box,
                              count_in_box_naive, box_envelope, sup_norm,
                              orthogonal_lattice, congruence_lattice,
                              reduced_basis, hnf)

QQ = Rationals()
F3 = FunctionField(3)


def z_lattice(entries, rank):
    return OKLattice(QQ, tuple(tuple(entries[i * rank + j]
                                     for j in range(rank))
                               for i in range(rank)))


def nonsingular(L):
    try:
        determinant(L)
        return True
    except ValueError:
        return False


small = st.integers(min_value=-6, max_value=6)


@given(st.integers(min_value=2, max_value=4), st.data())
@settings(max_examples=60, deadline=None)
def test_minkowski_bounds_z(rank, data):
    entries = data.draw(st.lists(small, min_size=rank * rank,
                                 max_size=rank * rank))
    L = z_lattice(entries, rank)
    if not nonsingular(L):
        return
    det = determinant(L)
    mins = successive_minima(L).values
    prod = math.prod(mins)
    assert all(a <= b for a, b in zip(mins, mins[1:]))
    assert det <= math.factorial(rank) * prod
    assert prod <= det


def rand_f3_lattice(rng, rank):
    while True:
        basis = tuple(tuple(
            F3.from_codes([rng.randrange(3)
                           for _ in range(rng.randint(1, 3))])
            for _ in range(rank)) for _ in range(rank))
        L = OKLattice(F3, basis)
        if nonsingular(L):
            return L


def test_minima_product_equals_det_fqt():
    rng = random.Random(5)
    for _ in range(40):
        L = rand_f3_lattice(rng, rng.randint(2, 3))
        assert math.prod(successive_minima(L).values) == determinant(L)


def test_minima_witnesses_attain_values():
    rng = random.Random(11)
    for _ in range(25):
        rank = rng.randint(2, 3)
        L = z_lattice([rng.randint(-6, 6) for _ in range(rank * rank)], rank)
        if not nonsingular(L):
            continue
        sm = successive_minima(L)
        for lam, w in zip(sm.values, sm.witnesses):
            assert sup_norm(QQ, w) == lam
            assert L.contains(w)


def test_shortest_vector_is_first_minimum():
    rng = random.Random(3)
    for _ in range(25):
        rank = rng.randint(2, 4)
        L = z_lattice([rng.randint(-5, 5) for _ in range(rank * rank)], rank)
        if not nonsingular(L):
            continue
        v = shortest_vector(L)
        assert sup_norm(QQ, v) == successive_minima(L).values[0]


def test_count_in_box_matches_naive_z():
    rng = random.Random(17)
    for _ in range(40):
        rank = rng.randint(2, 3)
        L = z_lattice([rng.randint(-5, 5) for _ in range(rank * rank)], rank)
        if not nonsingular(L):
            continue
        R = rng.randint(1, 15)
        n = count_in_box(L, R)
        assert n == count_in_box_naive(L, R)
        assert n >= 1   # zero vector
        assert n <= count_in_box(L, R + 3)   # monotone in R


def test_count_in_box_matches_naive_fqt():
    rng = random.Random(23)
    for _ in range(20):
        L = rand_f3_lattice(rng, 2)
        R = 3 ** rng.randint(0, 3)
        assert count_in_box(L, R) == count_in_box_naive(L, R)


def test_box_envelope_two_sided():
    # the count never exceeds a fixed multiple of the envelope and the
    # envelope is attained up to a dimensional constant for boxes past
    # the last minimum
    L = z_lattice([1, 0, 0, 1], 2)
    for R in (1, 5, 20):
        n = count_in_box(L, R)
        env = box_envelope(L, R)
        assert n <= 1.2 * env + 1
        assert env <= 3 * n


def test_reduced_basis_spans_same_lattice():
    L = z_lattice([4, 1, 0, 3], 2)
    red, bounds = reduced_basis(L)
    assert hnf(QQ, red.basis, 2) == hnf(QQ, L.basis, 2)
    assert bounds["norms"] == [3, 4]
    assert all(r >= 1.0 for r in bounds["ratios"])


def test_hnf_is_idempotent_and_triangular():
    rows = [(4, 2, 0), (2, 1, 3), (0, 0, 5)]
    h = hnf(QQ, rows, 3)
    assert hnf(QQ, h, 3) == h


def test_orthogonal_lattice_q():
    x = (2, 3, 5, 7)
    L = orthogonal_lattice(QQ, x)
    assert L.rank == 3
    for r in L.basis:
        assert sum(a * b for a, b in zip(r, x)) == 0


def test_orthogonal_lattice_fqt():
    t = F3.t
    x = (F3.one, t, t * t + F3.one)
    L = orthogonal_lattice(F3, x)
    assert L.rank == 2
    for r in L.basis:
        assert F3.is_zero(sum((a * b for a, b in zip(r, x)), F3.zero))


@pytest.mark.parametrize("y,d", [((1, 2, 3), 5), ((1, 0, 0), 12),
                                 ((3, 1, 7), 9), ((2, 5, 1), 30)])
def test_congruence_lattice_det_q(y, d):
    L = congruence_lattice(QQ, y, d)
    assert determinant(L) == d * d
    # every basis vector is congruent to a multiple of y mod d
    for r in L.basis:
        lam = next((r[i] * pow(y[i], -1, d)) % d
                   for i in range(3) if math.gcd(y[i], d) == 1)
        assert all((r[i] - lam * y[i]) % d == 0 for i in range(3))


def test_congruence_lattice_det_fqt():
    t = F3.t
    for y, d in (((F3.one, t, F3.from_int(2)), t * t + F3.one),
                 ((t, F3.one, t + F3.one), t * t * t + t + F3.one)):
        L = congruence_lattice(F3, y, d)
        assert determinant(L) == F3.norm(d) ** 2


def test_congruence_lattice_gcd_precondition():
    with pytest.raises(ValueError):
        congruence_lattice(QQ, (2, 4, 6), 4)
    L = congruence_lattice(QQ, (2, 4, 6), 4, relaxed=True)
    assert L.rank == 3
