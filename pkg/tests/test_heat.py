import math

import numpy as np
import pytest

from gluedbessel import heat
from gluedbessel.discrete import DiscreteOperator, evolve
from gluedbessel.heat import HeatSolver
from gluedbessel.space import GridSpec, HalfGrid, h_D

SPEC = GridSpec(h_min=0.01, h_cap=0.05, x_max=150.0, forced=(2.0, 5.0))


@pytest.fixture(scope="module")
def solver():
    return HeatSolver(3.0, SPEC, tol=1e-8)


@pytest.fixture(scope="module")
def glued_fields(solver):
    ys = solver.snap([2.0, -2.0, 5.0])
    fields, _ = solver.direct(ys, [0.1, 1.0, 10.0])
    return ys, fields


def test_evolve_zero_time_is_identity(solver):
    f = np.random.default_rng(0).standard_normal(solver.op_N.n)
    assert np.array_equal(evolve(solver.op_N, 0.0, f), f)


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_neumann_conserves_mass(solver, t):
    op = solver.op_N
    u = evolve(op, t, op.point_mass(op.index_of(2.0)), tol=1e-8)
    assert np.sum(op.weights * u) == pytest.approx(1.0, abs=1e-6)


def test_dirichlet_survival_decreases_to_h_d():
    op = DiscreteOperator.half_line(HalfGrid.build(3.0, GridSpec(h_min=0.02, h_cap=0.1, x_max=2000.0,
                                                                 forced=(2.0,))), "dirichlet")
    times = [1.0, 10.0, 100.0, 1000.0]
    sols = evolve(op, times, np.ones(op.n), tol=1e-7)
    i = op.index_of(2.0)
    vals = [u[i] for u in sols]
    assert np.all(np.diff(vals) < 0)
    assert vals[-1] == pytest.approx(float(h_D(3.0, 2.0)), rel=0.02)


def test_semigroup_property(solver):
    op = solver.op_glued
    f = op.point_mass(op.index_of(2.0))
    a = evolve(op, 1.5, f, tol=1e-9)
    b = evolve(op, 1.0, evolve(op, 0.5, f, tol=1e-9), tol=1e-9)
    err = np.sqrt(np.sum(op.weights * (a - b) ** 2) / np.sum(op.weights * a**2))
    assert err < 1e-6


@pytest.mark.parametrize("which", ["op_N", "op_D", "op_glued", "op_hat"])
def test_operator_symmetric_and_nonnegative(solver, which):
    op = getattr(solver, which)
    rng = np.random.default_rng(1)
    f, g = rng.standard_normal((2, op.n))
    assert op.inner(f, op.apply(g)) == pytest.approx(op.inner(op.apply(f), g), rel=1e-10)
    lo, _ = op.spectral_bounds()
    assert lo >= -1e-10


def test_kernel_fields_nonnegative_and_symmetric(solver):
    ys = solver.snap([1.5, 2.0, 3.0, -2.0, -3.0])
    fields, _ = solver.direct(ys, [0.5, 5.0])
    for f in fields:
        assert f.min_value() >= -1e-8 * np.max(f.values)
        assert f.symmetry_defect() < 1e-6


def test_glued_symmetry_and_lemma_identity(solver, glued_fields):
    ys, fields = glued_fields
    n_cols, d_cols, _ = solver.halfline([2.0], [0.1, 1.0, 10.0])
    i2 = solver.half.index_of(2.0)
    for f, tn, td in zip(fields, n_cols, d_cols):
        # T_t(x, y) = T_t(-x, -y)
        assert f.at(3.0, 2.0) == pytest.approx(f.at(-3.0, -2.0), rel=1e-6)
        # opposite sides: (T_N - T_D)/2, same side: >= T_D/2 >= 0
        assert f.at(2.0, -2.0) == pytest.approx(0.5 * (tn[i2, 0] - td[i2, 0]), rel=1e-4)
        assert f.at(2.0, -2.0) >= 0.0
        assert f.at(2.0, 2.0) >= 0.5 * td[i2, 0] >= 0.0


def test_domination_of_dirichlet_by_neumann(solver):
    # comparison holds up to the time-stepping tolerance (1e-8 per step)
    ys = [2.0, 5.0, float(solver.half.r[np.argmin(np.abs(solver.half.r - 1.5))])]
    n_cols, d_cols, _ = solver.halfline(ys, [0.1, 1.0, 10.0])
    for tn, td in zip(n_cols, d_cols):
        assert np.all(tn.max(axis=0) > 0)
        assert np.all(td >= -1e-6 * tn.max())
        assert np.all(td <= tn + 1e-6 * tn.max())


def test_glued_kernel_helpers():
    a = heat.glued_kernel(3.0, 1.0, 2.0, -2.0, spec=SPEC)
    b = heat.glued_kernel(3.0, 1.0, 2.0, -2.0, method="direct", spec=SPEC)
    assert a == pytest.approx(b, rel=1e-4)
    with pytest.raises(ValueError):
        heat.glued_kernel(3.0, 0.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        heat.hat_kernel(3.0, 1.0, -4.0, 2.0)


@pytest.mark.parametrize("d", [2.5, 3.0, 4.0])
def test_assembly_identity(d):
    rep = heat.assembly_check(d)
    assert rep.passed, rep.max_rel
    assert max(rep.max_rel) <= 1e-4


def test_truncation_insensitivity():
    t = 10.0
    out = []
    for x_max in (150.0, 300.0):
        s = HeatSolver(3.0, SPEC.with_x_max(x_max), tol=1e-9)
        f, _ = s.direct(s.snap([2.0, -3.0]), [t])
        x = s.glued_grid.x
        inner = np.abs(x) <= 5.0  # graded grids coincide up to the last forced node
        out.append((x[inner], f[0].values[inner]))
    assert np.allclose(out[0][0], out[1][0], rtol=0, atol=1e-12)
    assert np.max(np.abs(out[0][1] - out[1][1])) <= 1e-6 * np.max(np.abs(out[1][1]))


def test_domination_hat_and_gauss3():
    r = heat.domination_check(3.0)
    assert r["max_excess"] <= 1e-6
    assert max(r["edge_values"]) < 0.1 * max(1e-12, 1.0)
    assert math.isfinite(r["gauss3"].C)


def test_gauss2_weighted_sandwich():
    r = heat.gauss2_check(3.0, times=[0.1, 1.0, 10.0])
    assert math.isfinite(r.C) and not r.violations


def test_prefactor_law():
    r = heat.prefactor_law(3.0)
    assert r.passed and abs(r.slope - (2 - 3)) <= 0.15


def test_hitting_density_comparand():
    assert heat.hitting_density_comparand(3.0, 2.0, 1e-4) < 1e-300 or \
        heat.hitting_density_comparand(3.0, 2.0, 1e-4) == 0.0
    assert heat.hitting_density_comparand(3.0, 2.0, 1e-3) < heat.hitting_density_comparand(3.0, 2.0, 1e-1)
    # d = 3: int_0^inf e^{-a/s} s^{-3/2} ds = sqrt(pi/a), a = (y-1)^2/4, so the mass is 2 sqrt(pi)/(1+y)
    for y in (1.5, 2.0, 5.0):
        assert heat.hitting_density_mass(3.0, y) == pytest.approx(2 * math.sqrt(math.pi) / (1 + y), rel=1e-8)
    assert heat.hitting_density_mass(3.0, 2.0, 10.0) < heat.hitting_density_mass(3.0, 2.0)
    with pytest.raises(ValueError):
        heat.hitting_density_comparand(3.0, 0.5, 1.0)


def test_integrals_positive_and_phi_bound():
    assert heat.psi_integral(3.0, 4.0, 2.0, 1.0) > 0
    assert heat.phi_integral(3.0, 4.0, 2.0, 1.0) > 0
    assert heat.pi_integral(3.0, 4.0, 4.0, 2.0, 3.0, 1.0) > 0
    r = heat.phi_bound(3.0)
    assert r.finite


def test_mixed_check_stable_under_tightening():
    m = heat.mixed_check(3.0)
    assert m.passed and m.change <= 0.01
    assert m.psi.finite and m.pi.finite


def test_first_passage_two_sided():
    r = heat.first_passage_consistency(3.0, xs=(2.0, 5.0), ys=(2.0, 3.0), times=(1.0, 10.0))
    assert r.finite and r.n_cells > 0
