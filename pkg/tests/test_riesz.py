import math

import numpy as np
import pytest
from conftest import read_fixture
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import eigh_tridiagonal

from gluedbessel import riesz
from gluedbessel.discrete import DiscreteOperator
from gluedbessel.space import GluedGrid, GridSpec, HalfGrid, extend, h_D, parity_split, restrict
from gluedbessel.specfun import DomainError

GOLDEN = read_fixture("golden_riesz.csv")
SPEC = GridSpec(h_min=0.02, grade=0.05, h_cap=0.1, r_inner=25.0, stretch=1.05, x_max=2e3)


@pytest.fixture(scope="module")
def glued():
    return GluedGrid(HalfGrid.build(3.0, SPEC))


def far_constant(d):
    """Oracle for ``lim x^d R_N(x, y)`` from mpmath Gamma values."""
    import mpmath as mp

    return float(-2 * mp.gamma((d + 1) / 2) / (mp.sqrt(mp.pi) * mp.gamma(d / 2)))


@pytest.mark.parametrize("row", GOLDEN, ids=lambda r: f"{r['bc']}-{r['x']}-{r['y']}")
def test_golden_kernel(row):
    v = riesz.riesz_kernel(row["bc"], float(row["d"]), float(row["x"]), float(row["y"]))
    e = float(row["expected"])
    assert abs(v - e) <= float(row["tolerance"]) * abs(e)


@given(st.floats(1.0, 40.0), st.floats(1.0, 40.0))
def test_dirichlet_kernel_sign(x, y):
    if abs(x - y) < 0.01:
        return
    v = riesz.riesz_kernel("D", 3.0, x, y, delta_min=0.01)
    if y == 1.0:
        assert v == 0.0  # the Dirichlet kernel vanishes on the boundary in y
    else:
        assert v < 0 if x > y else v > 0


@pytest.mark.parametrize("d", [2.5, 3.0, 4.0])
def test_far_field_limit(d):
    c = far_constant(d)
    for y in (2.0, 5.0):
        x = 1e4
        assert riesz.riesz_kernel("N", d, x, y) * x**d == pytest.approx(c, rel=1e-3)
        # the Dirichlet kernel approaches its limit at rate x^(2-d): extrapolate
        q = 10.0 ** (2.0 - d)
        v1, v2 = (riesz.riesz_kernel("D", d, s, y) * s**d for s in (x, 10 * x))
        assert (v2 - q * v1) / (1 - q) == pytest.approx(c * float(h_D(d, y)), rel=1e-3)


def test_kernel_operator_consistency():
    rows = riesz.kernel_operator_consistency(3.0)
    assert max(r["rel"] for r in rows) <= 0.02


def test_glued_kernel_parity_algebra():
    d = 3.0
    rn, rd = riesz.riesz_kernel("N", d, 2.0, 4.0), riesz.riesz_kernel("D", d, 2.0, 4.0)
    assert riesz.glued_riesz_kernel(d, 2.0, 4.0) == pytest.approx(0.5 * (rn + rd), rel=1e-14)
    assert riesz.glued_riesz_kernel(d, -2.0, -4.0) == pytest.approx(0.5 * (rn + rd), rel=1e-14)
    assert riesz.glued_riesz_kernel(d, 2.0, -4.0) == pytest.approx(0.5 * (rn - rd), rel=1e-14)


def test_diagonal_proximity_and_domain():
    with pytest.raises(riesz.DiagonalProximityError):
        riesz.riesz_kernel("N", 3.0, 2.0, 2.0 + 1e-4)
    with pytest.raises(riesz.DiagonalProximityError):
        riesz.glued_riesz_kernel(3.0, 2.0, 2.0)
    with pytest.raises(DomainError):
        riesz.riesz_kernel("N", 3.0, 0.5, 2.0)
    with pytest.raises(ValueError):
        riesz.riesz_kernel("X", 3.0, 2.0, 3.0)


def test_branch_continuity_reported():
    rows = riesz.branch_continuity("N", 3.0)
    for dl, a, b, s in rows:
        assert math.isfinite(s)
        assert abs(s) < 0.05 * max(abs(a), abs(b)) or dl >= 0.1


def test_fd_crosscheck():
    assert riesz.fd_crosscheck(3.0, n=10) <= 1e-5


def test_derivative_bounds_small():
    rep = riesz.verify_derivative_bounds(3.0, n=4, n_fd=5)
    assert all(math.isfinite(c) for c in rep.C_N + rep.C_D)
    assert rep.fd_max_rel <= 1e-5
    assert rep.n_cells[1] > rep.n_cells[0]


def test_inverse_sqrt_against_eigendecomposition():
    grid = HalfGrid.build(3.0, GridSpec(h_min=0.05, grade=0.1, h_cap=0.2, r_inner=10.0, stretch=1.1, x_max=200.0))
    op = DiscreteOperator.half_line(grid, "dirichlet")
    f = np.exp(-((op.x - 3.0) ** 2))
    u, _ = riesz.inverse_sqrt_converged(op, f, tol=1e-9)
    dd, ee = op.symmetric_tridiagonal()
    lam, vec = eigh_tridiagonal(dd, ee)
    sw = np.sqrt(op.weights)
    ref = vec @ ((vec.T @ (sw * f)) / np.sqrt(lam)) / sw
    assert np.max(np.abs(u - ref)) <= 1e-7 * np.max(np.abs(ref))


def test_glued_operator_preserves_parity(glued):
    f = np.exp(-((glued.s - 2.0) ** 2))
    fe, fo = parity_split(glued, f)
    re = riesz.apply_glued_riesz(3.0, glued, fe)
    ro = riesz.apply_glued_riesz(3.0, glued, fo)
    scale = np.max(np.abs(re))
    assert np.max(np.abs(re - re[::-1])) <= 1e-10 * scale
    assert np.max(np.abs(ro + ro[::-1])) <= 1e-10 * np.max(np.abs(ro))


def test_glued_operator_matches_half_line_decomposition(glued):
    f = np.exp(-((glued.s - 2.0) ** 2)) + 0.5 * np.exp(-((glued.s + 4.0) ** 2))
    a = riesz.apply_glued_riesz(3.0, glued, f)
    b = riesz.apply_glued_riesz_parity(3.0, glued, f)
    assert np.max(np.abs(a - b)) <= 1e-6 * np.max(np.abs(b))
    fe, _ = parity_split(glued, f)
    rn = riesz.apply_riesz("N", 3.0, glued.half, restrict(glued, fe))
    assert np.allclose(extend(glued, rn, "even"), riesz.apply_glued_riesz(3.0, glued, fe), atol=1e-10)


def test_l2_bound_finite():
    hi, lo = riesz.l2_bound(3.0, n_funcs=10)
    assert math.isfinite(hi) and 0 < lo <= hi


def test_lp_growth_increases():
    out = riesz.lp_growth(3.0)
    assert all(b > a for a, b in zip(out["ratio"], out["ratio"][1:]))
    assert out["slope_loglog"] > 0
