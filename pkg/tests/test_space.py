import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gluedbessel.discrete import DiscreteOperator
from gluedbessel.space import (
    Ball,
    GluedGrid,
    GluedPoint,
    GridError,
    GridSpec,
    HalfGrid,
    HarmonicFamily,
    doubling_constant,
    extend,
    graded_nodes,
    h_D,
    h_hat,
    h_hat_D,
    h_minus,
    h_plus,
    harmonic_eval,
    measure_ball,
    measure_equivalence_constant,
    parity_split,
    read_grid_function,
    restrict,
    rho,
    write_grid_function,
)
from gluedbessel.specfun import DomainError

glued_real = st.one_of(st.floats(1.0, 1e4), st.floats(-1e4, -1.0))


def test_rho_examples():
    assert rho(2.0, -3.0) == 3.0
    assert rho(1.0, -1.0) == 0.0
    assert rho(2.0, 5.0) == 3.0


@given(glued_real, glued_real, glued_real)
def test_rho_is_a_metric(x, y, z):
    assert rho(x, y) == rho(y, x) >= 0.0
    assert rho(x, z) <= rho(x, y) + rho(y, z) + 1e-9
    assert (rho(x, y) == 0.0) == (GluedPoint.from_real(x) == GluedPoint.from_real(y))


def test_junction_is_one_point():
    assert GluedPoint(1, 1.0) == GluedPoint(-1, 1.0)
    assert hash(GluedPoint(1, 1.0)) == hash(GluedPoint(-1, 1.0))
    with pytest.raises(DomainError):
        GluedPoint(1, 0.5)
    with pytest.raises(DomainError):
        GluedPoint.from_real(0.3)


def test_measure_wrapping_ball():
    # [1, 2.5] on the plus side and [1, 1.5] on the minus side
    assert measure_ball(3, Ball(1.5, 1.0)) == pytest.approx(39 / 8 + 19 / 24, rel=1e-14)
    assert measure_ball(3, Ball(1.5, 1.0)) == pytest.approx(17 / 3, rel=1e-14)


@pytest.mark.parametrize("d,c", [(3, 5.0), (4, -7.0), (2.5, 1.0)])
def test_measure_small_radius_density(d, c):
    r = 1e-7
    assert measure_ball(d, Ball(c, r)) / (2 * r * abs(c) ** (d - 1)) == pytest.approx(1.0, rel=1e-6)


@given(st.floats(2.1, 6.0), st.floats(-50, 50), st.floats(1e-3, 100))
def test_measure_matches_quadrature(d, s, r):
    ball = Ball(GluedPoint.from_signed(s), r)
    total = 0.0
    for _, lo, hi in ball.segments():
        total += (hi**d - lo**d) / d
    assert measure_ball(d, ball) == pytest.approx(total, rel=1e-10)


@pytest.mark.parametrize("d", [2.5, 3.0, 4.0])
def test_measure_equivalence_and_doubling(d):
    C, lo, hi = measure_equivalence_constant(d)
    assert math.isfinite(C) and 0 < lo <= hi
    # mu(B(x, r)) = int over an interval of length 2r of |y|^{d-1} sits between r(|x|+r)^{d-1}/d and 2^d times it
    assert C <= 2.0**d * d
    assert doubling_constant(d) <= 2.0**d + 1e-9


def test_harmonic_examples():
    assert h_plus(4, 2.0) == pytest.approx(7 / 8)
    assert h_plus(3, 2.0) == pytest.approx(0.75)
    assert h_plus(3, 1.0) == h_plus(3, -1.0) == 0.5
    assert harmonic_eval("h+", 3, GluedPoint(1, 2.0)) == pytest.approx(0.75)


@given(st.floats(2.05, 8.0), glued_real)
def test_harmonic_identities(d, x):
    assert h_plus(d, x) + h_minus(d, x) == pytest.approx(1.0, abs=1e-15)
    assert h_plus(d, x) - h_minus(d, x) == pytest.approx(h_hat_D(d, x), abs=1e-15)
    assert 0.0 <= h_plus(d, x) <= 1.0


def test_h_d_properties():
    r = np.geomspace(1.0, 1e6, 500)
    v = h_D(3.5, r)
    assert v[0] == 0.0 and np.all(np.diff(v) > 0)
    with pytest.raises(DomainError):
        h_D(3, 0.5)


@pytest.mark.parametrize("d", [2.5, 3.0, 5.0])
def test_h_hat_normalization_and_comp1(d):
    assert h_hat(d, -3.0) == pytest.approx(0.0, abs=1e-15)
    assert h_hat(d, 1e12) == pytest.approx(1.0, abs=1e-6)
    lo, hi = HarmonicFamily(d).comp1_bounds()
    assert 0.0 < lo <= hi <= 1.0
    with pytest.raises(DomainError):
        h_hat(d, -3.5)
    # C^1 across the junction in the signed coordinate
    eps = 1e-6
    left = (h_hat(d, -1.0) - h_hat(d, -(1.0 + eps))) / eps
    right = (h_hat(d, 1.0 + eps) - h_hat(d, 1.0)) / eps
    assert left == pytest.approx(right, rel=1e-4)


@pytest.fixture(scope="module")
def glued():
    return GluedGrid(HalfGrid.build(3.0, GridSpec(h_min=0.02, h_cap=0.2, x_max=200.0)))


def test_parity_split(glued, rng=np.random.default_rng(3)):
    x = glued.x
    fe, fo = parity_split(glued, h_plus(3.0, x))
    assert np.allclose(fe, 0.5, atol=1e-15)
    assert np.allclose(fo, h_hat_D(3.0, x) / 2, atol=1e-15)
    f = rng.standard_normal(x.size)
    fe, fo = parity_split(glued, f)
    assert np.max(np.abs(f - fe - fo)) < 1e-15
    assert np.allclose(fe, fe[::-1]) and np.allclose(fo, -fo[::-1])
    assert np.all(parity_split(glued, fe)[1] == 0.0)


def test_extend_restrict_round_trip(glued):
    x = glued.x
    even = np.cos(x)
    odd = h_hat_D(3.0, x)
    assert np.array_equal(extend(glued, restrict(glued, even), "even"), even)
    assert np.allclose(extend(glued, restrict(glued, odd), "odd"), odd, atol=1e-15)
    with pytest.raises(GridError):
        parity_split(glued, np.ones(x.size + 1))
    with pytest.raises(ValueError):
        extend(glued, restrict(glued, even), "neither")


def test_grid_is_mirrored_and_graded(glued):
    x = glued.x
    # the junction node is stored once, as +1
    assert np.array_equal(np.abs(x), np.abs(x[::-1]))
    assert np.all(x[: glued.junction] < -1.0) and x[glued.junction] == 1.0
    r = graded_nodes(GridSpec(h_min=0.01, x_max=100.0))
    assert r[0] == 1.0 and r[-1] == pytest.approx(100.0)
    assert np.all(np.diff(r) > 0)
    assert np.diff(r)[0] <= 0.011 and np.diff(r)[-1] > 0.5


def test_weak_harmonicity_of_h_plus(glued):
    """Residual of the discrete Dirichlet form of h+ against random bumps."""
    op = DiscreteOperator.glued(glued)
    rng = np.random.default_rng(0)
    h = h_plus(3.0, op.x)
    worst = 0.0
    for _ in range(1000):
        c, w = rng.uniform(-20, 20), rng.uniform(0.5, 5.0)
        g = np.clip(1.0 - np.abs(np.sign(op.x) * (np.abs(op.x) - 1.0) - c) / w, 0.0, None)
        if not g.any():
            continue
        res = op.dirichlet_form(h, g) / np.sqrt(np.sum(op.weights * g**2))
        worst = max(worst, abs(res))
    assert worst < 1e-10


def test_grid_function_csv_round_trip(tmp_path, glued):
    p = tmp_path / "f.csv"
    v = h_plus(3.0, glued.x)
    write_grid_function(p, glued.x, v, header=["d = 3"])
    x2, v2 = read_grid_function(p)
    assert np.array_equal(x2, glued.x) and np.array_equal(v2, v)
