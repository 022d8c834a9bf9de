import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warpcurv.expr import eval_jet2_batch
from warpcurv.generators import BOX, random_placement, random_warped_product
from warpcurv.geometry import GeometryError, LocalGeometry, make_chart, ricci, scalar
from warpcurv.warped import (
    BASE,
    CURVATURE_CASES,
    FIBER,
    RICCI_CASES,
    LemmaContext,
    PlacementError,
    build,
    identity_checks,
    lemma_curvature_rhs,
    lemma_ricci_rhs,
    lift,
    lift_vectors,
    placement,
    scalar_formula_rhs,
    zero_placement,
)

LINE_T = make_chart(["t"], [["1"]], box=[(-1, 1)])
LINE_X = make_chart(["x"], [["1"]], box=[(-1, 1)])
PLANE_XY = make_chart(["x", "y"], [["1", "0"], ["1"]], box=[(-1, 1), (-1, 1)])
H3 = build(LINE_T, PLANE_XY, "exp(t)")
H2 = build(LINE_T, LINE_X, "exp(t)")
SPHERE = build(
    make_chart(["t"], [["1"]], box=[(0.2, math.pi - 0.2)]),
    make_chart(["p"], [["1"]], box=[(0, 2 * math.pi)]),
    "sin(t)",
)
FLAT = build(make_chart(["u"], [["1"]], box=[(-1, 1)]), LINE_X, "1")


def sample(wp, n, seed=0):
    rng = np.random.default_rng(seed)
    lo, hi = np.array(wp.ambient.box).T
    return rng.uniform(lo, hi, (n, wp.n))


# -- build ----------------------------------------------------------------------


def test_build_errors():
    with pytest.raises(GeometryError):
        build(LINE_X, PLANE_XY, "1")  # x used on both factors
    with pytest.raises(GeometryError):
        build(LINE_T, PLANE_XY, "1 + x^2")  # warping reads a fiber coordinate


def test_block_structure_and_ordering():
    assert H3.ambient.coords == ("t", "x", "y")
    assert (H3.n1, H3.n2, H3.n) == (1, 2, 3)
    assert tuple(H3.ambient.signature) == (1, 1, 1)
    pts = sample(H3, 6)
    local = LocalGeometry(H3.ambient, pts)
    for arr in (local.g, local.dg, local.d2g):
        assert np.all(arr[:, :1, 1:] == 0) and np.all(arr[:, 1:, :1] == 0)
    np.testing.assert_allclose(local.g[:, 1, 1], np.exp(2 * pts[:, 0]), rtol=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_products_have_zero_mixed_blocks(seed):
    wp = random_warped_product(seed)
    local = LocalGeometry(wp.ambient, sample(wp, 4, seed))
    n1 = wp.n1
    for arr in (local.g, local.dg, local.d2g):
        assert np.all(arr[:, :n1, n1:] == 0)
    assert np.all(eval_jet2_batch(wp.f, local.points[:, :n1]).value >= 1.0)


def test_trivial_product_is_flat():
    pts = sample(FLAT, 5)
    assert np.max(np.abs(LocalGeometry(FLAT.ambient, pts).riemann())) == 0


def test_h3_is_einstein():
    # negated-Ricci convention: constant curvature -1 gives Ric = +2g, S = +6
    pts = sample(H3, 5)
    local = LocalGeometry(H3.ambient, pts)
    np.testing.assert_allclose(local.ricci(), 2 * local.g, atol=1e-12)
    np.testing.assert_allclose(scalar(H3.ambient, pts), 6.0, atol=1e-12)


def test_sphere_as_warped_product():
    pts = sample(SPHERE, 5)
    np.testing.assert_allclose(scalar(SPHERE.ambient, pts), -2.0, atol=1e-12)
    assert scalar_formula_rhs(SPHERE, zero_placement(SPHERE, BASE), pts[0]) == pytest.approx(-2.0, abs=1e-12)


def test_nonpositive_warping_rejected():
    wp = build(LINE_T, LINE_X, "t")
    with pytest.raises(GeometryError):
        LemmaContext(wp, zero_placement(wp, BASE), [[-0.5, 0.0]])


# -- placements and lifts -----------------------------------------------------------


def test_placement_validation():
    with pytest.raises(PlacementError):
        placement(H3, FIBER, ["1"])
    with pytest.raises(Exception):
        placement(H3, BASE, ["x"])  # fiber coordinate in a base field


def test_lift():
    dt = lift(H3, placement(H3, BASE, ["1"]))
    np.testing.assert_array_equal(dt.jet([[0.1, 0.2, 0.3]])[0], [[1, 0, 0]])
    zero = lift(H3, zero_placement(H3, FIBER))
    assert np.all(zero.jet([[0.1, 0.2, 0.3]])[0] == 0)
    fib = lift(H3, placement(H3, FIBER, ["y", "x^2"]))
    np.testing.assert_allclose(fib.jet([[0.1, 0.2, 0.3]])[0], [[0, 0.3, 0.04]])
    np.testing.assert_array_equal(lift_vectors(H3, FIBER, [2.0, 3.0]), [[0, 2, 3]])


def test_lift_is_linear():
    pt = [[0.2, -0.1, 0.4]]
    a = lift(H3, placement(H3, FIBER, ["x", "1"])).jet(pt)[0]
    b = lift(H3, placement(H3, FIBER, ["y^2", "2"])).jet(pt)[0]
    c = lift(H3, placement(H3, FIBER, ["x + 3*y^2", "1 + 3*2"])).jet(pt)[0]
    np.testing.assert_allclose(c, a + 3 * b, atol=1e-15)


# -- case evaluation --------------------------------------------------------------


def test_b3_is_zero():
    P = placement(H3, BASE, ["1 + t^2"])
    rng = np.random.default_rng(1)
    inputs = {s: rng.uniform(-1, 1, (4, 1 if s in "XY" else 2)) for s in "XYVW"}
    out = lemma_curvature_rhs(H3, "B3", P, inputs, sample(H3, 4))
    assert np.all(out == 0)


def test_b2_hand_value_on_h3():
    P = placement(H3, BASE, ["1"])
    pt = [[0.0, 0.3, -0.2]]
    inputs = {"V": [[1.0, 0.0]], "X": [[1.0]], "Y": [[1.0]]}
    # -(H(dt,dt)/f + g(dt, nabla_dt P) - pi(dt)^2) V = -(1 + 0 - 1) V = 0
    np.testing.assert_allclose(lemma_curvature_rhs(H3, "B2", P, inputs, pt), 0, atol=1e-15)
    ctx = LemmaContext(H3, P, pt)
    np.testing.assert_allclose(ctx.curvature_lhs("B2", inputs), 0, atol=1e-14)


@pytest.mark.parametrize("t", [0.0, 0.4, -0.3])
def test_fiber_ricci_hand_values(t):
    # base (R,dt^2) x_{e^t} (R,dx^2), P = d_x on the fiber:
    # pi(d_x) = e^2t, Xf/f = 1, n = 2
    P = placement(H2, FIBER, ["1"])
    pt = [[t, 0.1]]
    io = {"X": [[1.0]], "V": [[1.0]]}
    assert lemma_ricci_rhs(H2, "F2", P, io, pt)[0] == pytest.approx(math.exp(2 * t), rel=1e-14)
    assert lemma_ricci_rhs(H2, "F3", P, io, pt)[0] == pytest.approx(-math.exp(2 * t), rel=1e-14)
    ctx = LemmaContext(H2, P, pt)
    assert ctx.ricci_lhs("F2", io)[0] == pytest.approx(math.exp(2 * t), rel=1e-12)
    assert ctx.ricci_lhs("F3", io)[0] == pytest.approx(-math.exp(2 * t), rel=1e-12)


def test_base_mixed_ricci_vanishes():
    P = placement(H3, BASE, ["1 + t"])
    io = {"X": [[0.7]], "V": [[0.3, -1.2]]}
    assert np.all(lemma_ricci_rhs(H3, "B2", P, io, [[0.1, 0.0, 0.0]]) == 0)


def test_scalar_formula_on_hyperbolic_plane():
    P = placement(H2, BASE, ["1"])
    pts = sample(H2, 4)
    np.testing.assert_allclose(scalar_formula_rhs(H2, P, pts), 2.0, atol=1e-12)
    np.testing.assert_allclose(LemmaContext(H2, P, pts).scalar_lhs(), 2.0, atol=1e-12)


def test_flat_trivial_all_cases_zero():
    pts = sample(FLAT, 3)
    for loc in (BASE, FIBER):
        ctx = LemmaContext(FLAT, zero_placement(FLAT, loc), pts)
        prefix = "B" if loc == BASE else "F"
        ones = {s: np.ones((3, 1)) for s in "XYZUVW"}
        for case, (_, slots, _) in CURVATURE_CASES.items():
            if case.startswith(prefix):
                assert np.all(np.abs(ctx.curvature_rhs(case, {s: ones[s] for s in slots})) == 0)
        for case, (_, slots, _) in RICCI_CASES.items():
            if case.startswith(prefix):
                assert np.all(np.abs(ctx.ricci_rhs(case, {s: ones[s] for s in slots})) == 0)
        assert np.all(ctx.scalar_rhs() == 0)


def test_case_errors():
    P = placement(H3, BASE, ["1"])
    pt = [[0.0, 0.0, 0.0]]
    with pytest.raises(PlacementError):
        lemma_curvature_rhs(H3, "B9", P, {}, pt)
    with pytest.raises(PlacementError):
        lemma_curvature_rhs(H3, "B2", P, {"X": [[1.0]], "Y": [[1.0]]}, pt)  # V missing
    with pytest.raises(PlacementError):
        lemma_curvature_rhs(H3, "F1", P, {"X": [[1.0]], "Y": [[1.0]], "Z": [[1.0]]}, pt)  # wrong family


# -- master identity suite ------------------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("loc", [BASE, FIBER])
def test_identities_on_random_products(seed, loc):
    wp = random_warped_product(seed)
    rng = np.random.default_rng([seed, 7])
    P = random_placement(wp, loc, rng)
    pts = sample(wp, 50, seed)
    assert np.all((pts >= BOX[0]) & (pts <= BOX[1]))
    results = identity_checks(wp, P, pts, rng)
    expected = sum(1 for c in CURVATURE_CASES if c[0] == loc[0].upper())
    expected += sum(1 for c in RICCI_CASES if c[0] == loc[0].upper()) + 1
    assert len(results) == expected
    for r in results:
        assert r.samples == 50
        assert r.max_error <= 1e-7, (r.kind, r.case, r.max_error)


@pytest.mark.parametrize("wp", [H3, H2, SPHERE], ids=["H3", "H2", "sphere"])
def test_identities_on_closed_forms(wp):
    rng = np.random.default_rng(3)
    for loc in (BASE, FIBER):
        comps = ["1 + 0.5*" + c for c in wp.factor(loc).coords]
        P = placement(wp, loc, comps[:1] + ["0"] * (wp.factor(loc).dim - 1))
        for r in identity_checks(wp, P, sample(wp, 20), rng):
            assert r.max_error <= 1e-7, (loc, r.case, r.max_error)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reduction_to_levi_civita(seed):
    # with P = 0 the SSNM decompositions are the classical warped-product ones
    wp = random_warped_product(seed)
    pts = sample(wp, 10, seed)
    for loc in (BASE, FIBER):
        ctx = LemmaContext(wp, zero_placement(wp, loc), pts)
        np.testing.assert_allclose(ctx.ambient_ricci, ricci(wp.ambient, pts), atol=1e-12)
        np.testing.assert_allclose(ctx.scalar_rhs(), scalar(wp.ambient, pts), atol=1e-9)
    base = LemmaContext(wp, zero_placement(wp, BASE), pts)
    fib = LemmaContext(wp, zero_placement(wp, FIBER), pts)
    rng = np.random.default_rng(seed)
    inputs = {s: rng.uniform(-1, 1, (10, wp.n1 if s in "XYZ" else wp.n2)) for s in "XYZUVW"}
    pairs = [("B1", "F1", "XYZ"), ("B2", "F2", "VXY"), ("B5", "F6", "UVW")]
    for cb, cf, slots in pairs:
        sub = {s: inputs[s] for s in slots}
        np.testing.assert_allclose(base.curvature_rhs(cb, sub), fib.curvature_rhs(cf, sub), atol=1e-10)
    np.testing.assert_allclose(base.scalar_rhs(), fib.scalar_rhs(), atol=1e-9)
