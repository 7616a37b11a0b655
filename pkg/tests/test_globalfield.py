"""Heights, canonical projective representatives, and box enumeration."""

import pytest
from hypothesis import given, settings, strategies as st

from dpcount.globalfield import (Rationals, FunctionField, context_from_json,
                                 make_primitive, is_primitive, height_proj,
                                 normalize_weighted, is_weighted_normalized,
                                 weighted_height_leq, enumerate_box,
                                 box_count_formula, proj_points_in_box,
                                 count_p1, siegel_hyperplane)

ints = st.integers(min_value=-50, max_value=50)


def nonzero_vec(n):
    return st.lists(ints, min_size=n, max_size=n).filter(lambda v: any(v))


@given(nonzero_vec(3))
def test_make_primitive_idempotent_q(v):
    ctx = Rationals()
    p = make_primitive(ctx, v)
    assert make_primitive(ctx, p) == p
    assert is_primitive(ctx, p)
    # canonical: first nonzero coordinate is positive
    assert next(c for c in p if c != 0) > 0


@given(nonzero_vec(3), st.integers(min_value=1, max_value=9))
def test_make_primitive_scaling_invariant(v, k):
    ctx = Rationals()
    assert make_primitive(ctx, [k * c for c in v]) == make_primitive(ctx, v)
    assert make_primitive(ctx, [-c for c in v]) == make_primitive(ctx, v)


@given(nonzero_vec(4))
def test_height_proj_is_primitive_sup_norm(v):
    ctx = Rationals()
    p = make_primitive(ctx, v)
    assert height_proj(ctx, p) == max(abs(c) for c in p)
    if not is_primitive(ctx, v):
        with pytest.raises(ValueError):
            height_proj(ctx, v)


def test_make_primitive_fqt():
    ctx = FunctionField(3)
    t = ctx.t
    v = (t * t + ctx.one, t * (t * t + ctx.one))
    p = make_primitive(ctx, v)
    assert p == (ctx.one, t)
    assert height_proj(ctx, p) == 3   # q^deg(t)


def test_context_from_json_roundtrip():
    assert context_from_json({"field": "Q"}).kind == "Q"
    ctx = context_from_json({"field": "Fq(t)", "q": 3})
    assert ctx.kind == "Fq(t)" and ctx.q == 3
    with pytest.raises(ValueError):
        context_from_json({"field": "R"})


@pytest.mark.parametrize("g,R", [(1, 7), (2, 10), (3, 9), (5, 4)])
def test_enumerate_box_matches_formula_q(g, R):
    ctx = Rationals()
    xs = enumerate_box(ctx, R, g)
    assert len(xs) == box_count_formula(ctx, R, g)
    assert all(x % g == 0 and abs(x) <= R for x in xs)
    assert len(set(xs)) == len(xs)


def test_enumerate_box_matches_formula_fqt():
    ctx = FunctionField(3)
    t = ctx.t
    for g, R in ((ctx.one, 3), (t, 9), (t + ctx.one, 27)):
        xs = enumerate_box(ctx, R, g)
        assert len(xs) == box_count_formula(ctx, R, g)
        assert len({ctx.element_key(x) for x in xs}) == len(xs)


@pytest.mark.parametrize("B", [1, 2, 5, 10, 30])
def test_count_p1_matches_enumeration_q(B):
    ctx = Rationals()
    assert count_p1(ctx, B) == len(proj_points_in_box(ctx, 2, B))


def test_count_p1_fqt():
    ctx = FunctionField(3)
    # q + 1 points of height 1, then q^2 more per height step: the exact
    # P^1(Fq(t)) counts are 1 + q + q^2 + ... for canonical primitives
    assert count_p1(ctx, 1) == 4
    assert count_p1(ctx, 3) == len(proj_points_in_box(ctx, 2, 3))


def test_weighted_normalization_dp2():
    ctx = Rationals()
    w = (2, 1, 1, 1)
    p = normalize_weighted(ctx, (4, 2, -2, 0), w)
    assert is_weighted_normalized(ctx, p, w)
    # (y, u, v, w) ~ (lambda^2 y, lambda u, ...) collapses the scaling
    assert p == normalize_weighted(ctx, (16, 4, -4, 0), w)
    assert weighted_height_leq(ctx, p, w, 2)


@given(nonzero_vec(4))
@settings(max_examples=25, deadline=None)
def test_siegel_hyperplane_orthogonal(v):
    ctx = Rationals()
    x = make_primitive(ctx, v)
    c = siegel_hyperplane(ctx, x)
    assert sum(a * b for a, b in zip(c, x)) == 0
    assert is_primitive(ctx, c)
    # Siegel quality: H(c) <= (n H(x))^{1/(n-1)} up to the lattice constant;
    # enforce the crude exact bound H(c)^3 <= 6^3 * H(x)
    assert height_proj(ctx, c) ** 3 <= 216 * height_proj(ctx, x)
