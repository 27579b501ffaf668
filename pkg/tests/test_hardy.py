import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gluedbessel import hardy
from gluedbessel.space import MINUS, PLUS, Ball, GluedGrid, GluedPoint, GridSpec, HalfGrid, h_hat_D, h_hat_N

BALLS = [Ball(GluedPoint(PLUS, 5.0), 1.0), Ball(GluedPoint(PLUS, 1.3), 0.5), Ball(GluedPoint(PLUS, 40.0), 12.0)]


@pytest.mark.parametrize("flavor", hardy.FLAVORS)
@pytest.mark.parametrize("ball", BALLS, ids=["mid", "edge", "wide"])
def test_atom_invariants(flavor, ball):
    a = hardy.make_atom(flavor, 3.0, ball, seed=7)
    outside = ~a.support_mask()
    assert np.all(a.values[outside] == 0.0)
    assert a.l2_norm() <= a.measure**-0.5 * (1 + 1e-10)
    assert np.all(a.cancellation_residuals() <= 1e-10 * a.l1_norm())


def test_glued_atom_across_junction():
    ball = Ball(GluedPoint.from_signed(0.3), 1.0)
    a = hardy.make_atom("two-harmonic", 3.0, ball, seed=3)
    assert a.glued and ball.wraps
    assert np.any(a.values[a.x < 0] != 0) and np.any(a.values[a.x > 0] != 0)
    mean = np.sum(a.weights * a.values)
    assert abs(mean) <= 1e-10 * a.l1_norm()
    assert abs(np.sum(a.weights * a.values * h_hat_D(3.0, a.x))) <= 1e-10 * a.l1_norm()


def test_projection_idempotent():
    rng = np.random.default_rng(0)
    x = np.linspace(2.0, 6.0, 200)
    w = rng.uniform(0.5, 1.5, x.size)
    c = np.column_stack([np.ones_like(x), 1 - 1 / x])
    v = hardy.project_out(rng.standard_normal(x.size), w, c)
    assert np.max(np.abs(hardy.project_out(v, w, c) - v)) <= 1e-12 * np.max(np.abs(v))


def test_two_harmonic_span_equals_hat_span():
    x = np.concatenate([-np.linspace(1.0, 8.0, 60)[::-1], np.linspace(1.0, 8.0, 60)])
    w = np.ones_like(x)
    v = np.random.default_rng(1).standard_normal(x.size)
    a = hardy.project_out(v, w, hardy._constraints("two-harmonic", 3.0, x))
    b = hardy.project_out(v, w, np.column_stack([h_hat_N(3.0, x), h_hat_D(3.0, x)]))
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(v))


def test_two_interval_function_pairs_with_h_d():
    # g = 1_[2,3] - 1_[-3,-2] pairs with the signed h_D to 2 int_2^3 (x^2 - x) dx = 23/3
    grid = GluedGrid(HalfGrid.build(3.0, GridSpec(h_min=1e-3, h_cap=0.01, x_max=20.0, forced=(2.0, 3.0))))
    x, w = grid.x, grid.weights
    ax = np.abs(x)
    # half weight on the two edge nodes, whose cells straddle the interval ends
    g = np.sign(x) * np.where((ax > 2.0) & (ax < 3.0), 1.0, 0.0)
    g += np.sign(x) * 0.5 * (np.isclose(ax, 2.0) | np.isclose(ax, 3.0))
    val = np.sum(w * g * np.sign(x) * (1 - 1 / np.abs(x)))
    assert val == pytest.approx(23 / 3, rel=1e-4)
    assert abs(np.sum(w * g)) <= 1e-12


def test_atom_errors():
    with pytest.raises(hardy.AtomError):
        hardy.make_atom("two-harmonic", 3.0, Ball(GluedPoint(PLUS, 5.0), 1e-6), seed=0,
                        spec=GridSpec(h_min=0.1, h_cap=0.5, x_max=50.0))
    with pytest.raises(ValueError):
        hardy.make_atom("CW", 3.0, Ball(GluedPoint(MINUS, 5.0), 1.0), seed=0)
    with pytest.raises(ValueError):
        hardy.make_atom("bogus", 3.0, BALLS[0], seed=0)


def test_atoms_deterministic_by_seed():
    a = hardy.make_atom("hD", 3.0, BALLS[0], seed=11)
    b = hardy.make_atom("hD", 3.0, BALLS[0], seed=11)
    c = hardy.make_atom("hD", 3.0, BALLS[0], seed=12)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_reverse_holder():
    rep = hardy.reverse_holder_check(3.0, n=5000)
    assert rep.passed
    assert rep.far_max <= 2.0


@settings(max_examples=30)
@given(st.floats(1.1, 1e3), st.floats(1e-7, 1e3))
def test_hd_interval_ratio_bounds(a, rel):
    b = a * (1 + rel)
    r = float(hardy.hD_interval_ratio(3.0, [a], [b])[0])
    assert r >= 1.0 - 1e-14 / rel  # round-off in the measure of a short interval
    if rel < 1e-6:
        assert r == pytest.approx(1.0, abs=1e-4)


def test_hd_interval_ratio_at_boundary():
    # h_D vanishes linearly at 1, so short intervals there average to half the sup
    r = float(hardy.hD_interval_ratio(3.0, [1.0], [1.0 + 1e-6])[0])
    assert r == pytest.approx(2.0, rel=1e-5)


def test_counterexample_growth():
    rep = hardy.counterexample_growth(3.0)
    assert rep.passed
    assert rep.slope > 0.5
    assert abs(rep.contrast_slope) < 0.05 * rep.slope
    assert rep.odd_defect <= 1e-8


@pytest.mark.parametrize("flavor", hardy.FLAVORS)
def test_small_sweep(flavor):
    rep = hardy.h1_to_l1_sweep(flavor, 3.0, n_atoms=3, seed=5)
    assert not rep.failures
    assert math.isfinite(rep.max_norm)
    assert rep.refinement_change <= 0.10
    assert np.all(rep.control > rep.norms.min())


def test_far_tail_decays():
    rows = hardy.far_tail_ratio(3.0)
    assert all(math.isfinite(r["ratio"]) and r["ratio"] < 1.0 for r in rows)


def test_maximal_function_dominates_l1():
    grid = GluedGrid(HalfGrid.build(3.0, GridSpec(h_min=0.05, grade=0.1, h_cap=0.2, r_inner=20.0, x_max=200.0)))
    f = np.exp(-((grid.s - 2.0) ** 2))
    coarse, fine = hardy.dyadic_times(2**-7, 2**7, 2), hardy.dyadic_times(2**-7, 2**7, 4)
    assert set(coarse) <= set(fine)
    m = hardy.maximal_function(3.0, grid, f, coarse)
    assert np.all(m >= f - 1e-15)
    n_coarse = hardy.maximal_h1_norm(3.0, grid, f, coarse)
    n_fine = hardy.maximal_h1_norm(3.0, grid, f, fine)
    assert n_coarse >= np.sum(grid.weights * f) * (1 - 1e-12)
    assert n_fine >= n_coarse * (1 - 1e-9)


def test_compare_norms_small():
    rep = hardy.compare_norms(3.0, n_atoms=8)
    assert rep.passed
    assert rep.summary()["n_atoms"] == 8
