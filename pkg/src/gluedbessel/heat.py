"""Heat kernels on the half-line and the glued line, and the checks of their
two-sided Gaussian bounds.

Kernels are computed column by column: the column of ``T_t(., y)`` is
``exp(-tL)`` applied to the discrete point mass ``e_y / w_y`` (see
:mod:`gluedbessel.discrete`).  On the glued line the kernel is available two
ways: by evolving the glued operator directly, and by assembling the
half-line Neumann and Dirichlet kernels,

    T_t(x, y) = (T_{t,N}(|x|,|y|) + sign(xy) T_{t,D}(|x|,|y|)) / 2.

All bound comparisons are done on logarithms so that Gaussian factors such
as ``exp(-x^2/(c t))`` never underflow.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from scipy.integrate import trapezoid

from .discrete import DiscreteOperator, evolve
from .quadrature import gk_adaptive
from .space import (
    GluedGrid,
    GridError,
    GridSpec,
    HalfGrid,
    h_hat_alpha,
    measure_ball_signed,
    signed_coordinate,
)
from .specfun import DimLike, as_dimension

__all__ = [
    "HeatKernelField",
    "BoundShape",
    "HeatSolver",
    "glued_kernel",
    "hat_kernel",
    "assembly_check",
    "verify_bounds",
    "sandwich_check",
    "prefactor_law",
    "weighted_sandwich",
    "domination_check",
    "pi_integral",
    "psi_integral",
    "phi_integral",
    "log_pi_integral",
    "log_psi_integral",
    "log_phi_integral",
    "hitting_density_comparand",
    "hitting_density_mass",
    "first_passage_consistency",
    "pi_consistency",
    "psi_sandwich",
    "phi_bound",
    "MixedReport",
    "mixed_check",
    "DEFAULT_C1",
    "DEFAULT_C2",
]

# Gaussian-constant search sets; the natural scale of exp(-rho^2/(c t)) is c = 4
DEFAULT_C1 = (2.0, 4.0, 8.0, 16.0)
DEFAULT_C2 = tuple(4.0 * f for f in (0.5, 1.0, 2.0, 4.0))

# cells with rho^2/(4t) above this are below the resolution of the time stepping
DEFAULT_EXPONENT_CAP = 16.0


@dataclass
class HeatKernelField:
    """Samples ``values[i, j] = T_t(x[i], y[j])`` (real coordinates)."""

    t: float
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    provenance: str
    d: float

    def at(self, x, y):
        i = int(np.argmin(np.abs(self.x - x)))
        j = int(np.argmin(np.abs(self.y - y)))
        return float(self.values[i, j])

    def square(self):
        """Sub-matrix on rows matching the column points."""
        rows = [int(np.argmin(np.abs(self.x - yj))) for yj in self.y]
        return self.values[rows, :]

    def symmetry_defect(self):
        k = self.square()
        return float(np.max(np.abs(k - k.T)) / max(np.max(np.abs(k)), 1e-300))

    def min_value(self):
        return float(np.min(self.values))


@dataclass(frozen=True)
class BoundShape:
    """``prefactor(x, y, t) / mu(B(x, sqrt t)) * exp(-rho^2 / (c t))``."""

    kind: str  # "same-side" or "opposite-side"
    c_gauss: float
    d: float

    def log_prefactor(self, x, y, t):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "same-side":
            return np.zeros(np.broadcast(x, y, t).shape)
        return np.log(np.abs(x) ** (2.0 - self.d) + np.abs(y) ** (2.0 - self.d)) + 0.0 * np.asarray(t)

    def log_value(self, x, y, t):
        x, y, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(t, float))
        rho = np.abs(signed_coordinate(x) - signed_coordinate(y))
        logmu = np.log(measure_ball_signed(self.d, signed_coordinate(x), np.sqrt(t)))
        return self.log_prefactor(x, y, t) - logmu - rho**2 / (self.c_gauss * t)


# ---------------------------------------------------------------------------
# solver


class HeatSolver:
    """Discrete operators for one dimension and grid, with kernel-column helpers."""

    def __init__(self, d: DimLike, spec: GridSpec | None = None, tol: float = 1e-6):
        self.d = as_dimension(d).d
        spec = spec or GridSpec()
        self.spec = GridSpec(spec.h_min, spec.grade, spec.h_cap, spec.r_inner, spec.stretch, spec.x_max,
                             spec.foci, tuple(sorted(set(spec.forced) | {2.0, 3.0})))
        self.tol = tol

    @cached_property
    def half(self) -> HalfGrid:
        return HalfGrid.build(self.d, self.spec)

    @cached_property
    def glued_grid(self) -> GluedGrid:
        return GluedGrid(self.half)

    @cached_property
    def op_N(self):
        return DiscreteOperator.half_line(self.half, "neumann")

    @cached_property
    def op_D(self):
        return DiscreteOperator.half_line(self.half, "dirichlet")

    @cached_property
    def op_glued(self):
        return DiscreteOperator.glued(self.glued_grid)

    @cached_property
    def op_hat(self):
        return DiscreteOperator.glued(self.glued_grid, cut_minus=3.0)

    def snap(self, points):
        """Nearest glued-grid nodes to the given real points."""
        x = self.glued_grid.x
        return np.array([x[int(np.argmin(np.abs(x - p)))] for p in np.atleast_1d(points)])

    def _columns(self, op, ys, times, schedule=None):
        cols = np.zeros((op.n, len(ys)))
        alive = []
        for j, y in enumerate(ys):
            try:
                cols[:, j] = op.point_mass(op.index_of(y))
                alive.append(j)
            except GridError:
                # point outside the active set (Dirichlet boundary): zero column
                pass
        out, stats = evolve(op, times, cols, tol=self.tol, return_stats=True, schedule=schedule)
        return [op.lift(u) for u in out], stats

    def direct(self, ys, times):
        """Glued kernel columns by direct evolution; rows are ``glued_grid.x``."""
        ys = np.asarray(ys, dtype=float)
        cols, stats = self._columns(self.op_glued, ys, times)
        fields = [HeatKernelField(t, self.glued_grid.x, ys, c, "glued-direct", self.d) for t, c in zip(times, cols)]
        return fields, stats

    def halfline(self, ys_abs, times, schedule=None):
        """``(T_N, T_D)`` columns at ``|y|`` on the half grid (rows ``half.r``)."""
        ys_abs = np.asarray(ys_abs, dtype=float)
        n_cols, sn = self._columns(self.op_N, ys_abs, times, schedule)
        d_cols, sd = self._columns(self.op_D, ys_abs, times, schedule)
        return n_cols, d_cols, (sn, sd)

    def assembled(self, ys, times, schedule=None):
        """Glued kernel columns assembled from the half-line kernels."""
        ys = np.asarray(ys, dtype=float)
        n_cols, d_cols, stats = self.halfline(np.abs(ys), times, schedule)
        gg = self.glued_grid
        xg = gg.x
        idx = np.abs(np.arange(xg.size) - gg.junction)  # half-grid index of |x|
        sgn_x = np.where(xg >= 0, 1.0, -1.0)
        sgn_x[gg.junction] = 0.0  # the Dirichlet kernel vanishes at the junction anyway
        fields = []
        for t, tn, td in zip(times, n_cols, d_cols):
            vals = 0.5 * (tn[idx] + (sgn_x[:, None] * np.sign(ys)[None, :]) * td[idx])
            fields.append(HeatKernelField(t, xg, ys, vals, "glued-assembled", self.d))
        return fields, stats

    def hat(self, ys, times):
        ys = np.asarray(ys, dtype=float)
        cols, stats = self._columns(self.op_hat, ys, times)
        return [HeatKernelField(t, self.glued_grid.x, ys, c, "hat", self.d) for t, c in zip(times, cols)], stats


_SOLVERS: dict = {}


def _solver(d, spec=None, tol=1e-6):
    key = (float(d), spec, tol)
    if key not in _SOLVERS:
        _SOLVERS[key] = HeatSolver(d, spec, tol)
    return _SOLVERS[key]


def glued_kernel(d, t, x, y, method="assembled", spec=None, tol=1e-6):
    """``T_t(x, y)`` on the glued line (``x``, ``y`` snapped to grid nodes)."""
    if t <= 0:
        raise ValueError("t must be positive")
    s = _solver(d, spec, tol)
    yy = s.snap(y)
    fields, _ = (s.assembled if method == "assembled" else s.direct)(yy, [t])
    return fields[0].at(s.snap(x)[0], yy[0])


def hat_kernel(d, t, x, y, spec=None, tol=1e-6):
    """Kernel of the glued operator cut at ``-3`` with an absorbing condition there."""
    if t <= 0:
        raise ValueError("t must be positive")
    for p in (x, y):
        if p < -3.0 or abs(p) < 1.0:
            raise ValueError(f"{p} is not a point of the cut glued line [-3, -1] u [1, inf)")
    s = _solver(d, spec, tol)
    yy = s.snap(y)
    fields, _ = s.hat(yy, [t])
    return fields[0].at(s.snap(x)[0], yy[0])


# ---------------------------------------------------------------------------
# assembly identity


@dataclass
class AssemblyReport:
    d: float
    times: list
    max_rel: list
    max_rel_independent: list
    floor: float
    tolerance: float
    runtime: float
    rows: list = field(default_factory=list)

    @property
    def passed(self):
        return all(v <= self.tolerance for v in self.max_rel)


def assembly_check(d, times=(0.1, 1.0, 10.0), ys=(2.0, -2.0, 1.0, 5.0, -3.0), spec=None, inner=10.0,
                   floor=1e-8, tolerance=1e-4, tol=1e-6):
    """Compare glued-direct and glued-assembled kernels on ``|x| <= inner``.

    The half-line solves replay the time steps chosen by the direct run, so
    the comparison isolates the spatial identity from time-stepping error.
    Relative errors are taken over entries at least ``floor`` times the
    largest entry of their column.  An independently time-stepped assembly
    is reported alongside, normalized by the column maximum.
    """
    t0 = time.perf_counter()
    s = HeatSolver(d, spec, tol)
    ys = s.snap(ys)
    times = list(times)
    direct, stats = s.direct(ys, times)
    replay, _ = s.assembled(ys, times, schedule=stats["schedule"])
    independent, _ = s.assembled(ys, times)
    mask_rows = np.abs(s.glued_grid.x) <= inner
    out, out_ind, rows = [], [], []
    for t, a, b, c in zip(times, direct, replay, independent):
        av, bv, cv = a.values[mask_rows], b.values[mask_rows], c.values[mask_rows]
        colmax = np.max(np.abs(av), axis=0)
        m = np.abs(av) >= floor * colmax
        rel = np.abs(av - bv) / np.where(m, np.abs(av), 1.0)
        out.append(float(np.max(rel[m])))
        out_ind.append(float(np.max(np.abs(av - cv) / colmax)))
        i, j = np.unravel_index(np.argmax(np.where(m, rel, -1.0)), rel.shape)
        rows.append({"t": t, "x": float(a.x[mask_rows][i]), "y": float(ys[j]), "direct": float(av[i, j]),
                     "assembled": float(bv[i, j]), "rel": out[-1], "independent_abs": out_ind[-1]})
    return AssemblyReport(s.d, times, out, out_ind, floor, tolerance, time.perf_counter() - t0, rows)


# ---------------------------------------------------------------------------
# Gaussian sandwich


@dataclass
class SandwichResult:
    c1: float
    c2: float
    C: float
    C_low: float
    C_up: float
    worst_low: tuple
    worst_up: tuple
    n_cells: int
    violations: list


def _log_measure_ball(d, x, r):
    return np.log(measure_ball_signed(d, signed_coordinate(x), r))


def verify_bounds(fields, kinds=("same-side", "opposite-side"), c1_set=DEFAULT_C1, c2_set=DEFAULT_C2,
                  exponent_cap=DEFAULT_EXPONENT_CAP, x_window=20.0):
    """Smallest two-sided constant over the (c1, c2) search sets.

    ``C`` is the least number with ``L/C <= T <= C U`` on every resolvable
    cell, where ``L``/``U`` are the lower/upper :class:`BoundShape` values for
    the regime of the cell.  Cells with ``rho^2/(4t) > exponent_cap`` are not
    resolvable and are skipped; nonpositive kernel values on resolvable cells
    are reported as violations.
    """
    d = fields[0].d
    logT, X, Y, Tt, same = [], [], [], [], []
    violations = []
    for f in fields:
        xx, yy = np.meshgrid(f.x, f.y, indexing="ij")
        rho = np.abs(signed_coordinate(xx) - signed_coordinate(yy))
        m = (np.abs(xx) <= x_window) & (np.abs(yy) <= x_window) & (rho**2 / (4 * f.t) <= exponent_cap)
        v = f.values[m]
        bad = v <= 0
        if np.any(bad):
            for xi, yi, vi in list(zip(xx[m][bad], yy[m][bad], v[bad]))[:10]:
                violations.append((float(xi), float(yi), f.t, float(vi)))
        ok = ~bad
        logT.append(np.log(v[ok]))
        X.append(xx[m][ok])
        Y.append(yy[m][ok])
        Tt.append(np.full(ok.sum(), f.t))
        same.append((xx[m][ok] * yy[m][ok]) > 0)
    logT, X, Y, Tt, same = map(np.concatenate, (logT, X, Y, Tt, same))
    sel = np.zeros_like(same)
    if "same-side" in kinds:
        sel |= same
    if "opposite-side" in kinds:
        sel |= ~same
    logT, X, Y, Tt, same = logT[sel], X[sel], Y[sel], Tt[sel], same[sel]
    # the junction counts as both sides; the prefactor there is 2 either way
    def shape_log(c):
        lo_same = BoundShape("same-side", c, d).log_value(X, Y, Tt)
        lo_opp = BoundShape("opposite-side", c, d).log_value(X, Y, Tt)
        return np.where(same, lo_same, lo_opp)

    best_low = min(((float(np.max(shape_log(c) - logT)), c) for c in c1_set))
    best_up = min(((float(np.max(logT - shape_log(c))), c) for c in c2_set))
    il = int(np.argmax(shape_log(best_low[1]) - logT))
    iu = int(np.argmax(logT - shape_log(best_up[1])))
    C_low, C_up = math.exp(best_low[0]), math.exp(best_up[0])
    return SandwichResult(
        c1=best_low[1], c2=best_up[1], C=max(C_low, C_up), C_low=C_low, C_up=C_up,
        worst_low=(float(X[il]), float(Y[il]), float(Tt[il])),
        worst_up=(float(X[iu]), float(Y[iu]), float(Tt[iu])),
        n_cells=int(logT.size), violations=violations,
    )


def sandwich_grid_spec(x_window=20.0, t_max=100.0, h=0.025):
    """Grid fine enough for ``t >= 0.01`` on ``|x| <= x_window``."""
    x_max = max(40.0, x_window + 10.0 * math.sqrt(t_max)) * 1.25
    return GridSpec(h_min=h / 2.5, grade=0.05, h_cap=h, r_inner=x_window + 5.0, stretch=1.03, x_max=x_max,
                    forced=(1.25, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0))


SANDWICH_COLUMNS = (1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0)


@dataclass
class SandwichReport:
    d: float
    coarse: SandwichResult
    fine: SandwichResult
    change: float
    threshold: float
    runtime: float

    @property
    def passed(self):
        return (self.coarse.C <= self.threshold and self.fine.C <= self.threshold and self.change <= 0.10
                and not self.coarse.violations and not self.fine.violations)


def sandwich_check(d=3.0, times=None, spec=None, threshold=50.0, tol=1e-9, exponent_cap=DEFAULT_EXPONENT_CAP,
                   refine=2.0):
    """Both regimes of the glued Gaussian bounds on ``x, y in +-[1, 20]``, ``t in [0.01, 100]``."""
    t0 = time.perf_counter()
    times = list(times if times is not None else np.geomspace(0.01, 100.0, 13))
    spec = spec or sandwich_grid_spec()
    cols = np.array(sorted(set(SANDWICH_COLUMNS) | {-c for c in SANDWICH_COLUMNS if c > 1.0}))
    results = []
    for sp in (spec, spec.refined(refine)):
        s = HeatSolver(d, sp, tol)
        fields, _ = s.direct(s.snap(cols), times)
        results.append(verify_bounds(fields, exponent_cap=exponent_cap))
    change = abs(results[1].C / results[0].C - 1.0)
    return SandwichReport(float(d), results[0], results[1], change, threshold, time.perf_counter() - t0)


@dataclass
class PrefactorReport:
    d: float
    t: float
    r: np.ndarray
    log_values: np.ndarray
    slope: float
    expected: float
    tolerance: float
    bounded_t1: tuple

    @property
    def passed(self):
        return abs(self.slope - self.expected) <= self.tolerance


def prefactor_law(d=3.0, t=1e4, r=(4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0), tol=1e-7, tolerance=0.15):
    """Slope of ``log T_t(r, -r)`` against ``log r`` at large ``t``.

    For ``r << sqrt(t)`` the Gaussian factor and ``mu(B(r, sqrt t))`` are flat
    in ``r``, leaving the prefactor ``|x|^{2-d} + |y|^{2-d} = 2 r^{2-d}``.
    Also reports, at ``t = 1`` and on resolvable cells, the range of
    ``log T_1(r,-r) + (d-2) log r + rho^2/4 + log mu(B(r, 1))``.
    """
    r = np.asarray(r, dtype=float)
    x_max = 12.0 * math.sqrt(t) + 40.0
    spec = GridSpec(h_min=0.02, grade=0.05, h_cap=0.1, r_inner=25.0, stretch=1.02, x_max=x_max, forced=tuple(r))
    s = HeatSolver(d, spec, tol)
    fields, _ = s.direct(-r, [1.0, t])
    vals = np.array([fields[1].at(ri, -ri) for ri in r])
    slope = float(np.polyfit(np.log(r), np.log(vals), 1)[0])
    # t = 1: prefactor after removing the Gaussian and the volume factor, resolvable cells only
    rho = 2.0 * r - 2.0
    ok = rho**2 / 4.0 <= DEFAULT_EXPONENT_CAP
    v1 = np.array([fields[0].at(ri, -ri) for ri in r[ok]])
    g = (np.log(v1) + (s.d - 2.0) * np.log(r[ok]) + rho[ok] ** 2 / 4.0
         + np.log(measure_ball_signed(s.d, r[ok] - 1.0, 1.0)))
    return PrefactorReport(s.d, t, r, np.log(vals), slope, 2.0 - s.d, tolerance, (float(g.min()), float(g.max())))


# ---------------------------------------------------------------------------
# weighted (h-transformed) bounds and domination


def _power_integral(p, a, b):
    """``int_a^b r^p dr`` vectorized."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if abs(p + 1.0) < 1e-12:
        return np.log(b / a)
    return (b ** (p + 1.0) - a ** (p + 1.0)) / (p + 1.0)


def _weighted_measure(d, A, B, a, b):
    """``int_a^b (A + B r^{2-d})^2 r^{d-1} dr``."""
    return (A * A * _power_integral(d - 1.0, a, b) + 2 * A * B * _power_integral(1.0, a, b)
            + B * B * _power_integral(3.0 - d, a, b))


def measure_hD2_ball(d, x, r):
    """``mu_{h_D^2}(B(x, r))`` for balls of ``X_+`` (truncated at 1)."""
    x = np.asarray(x, dtype=float)
    lo = np.maximum(1.0, x - r)
    hi = x + r
    return _weighted_measure(d, 1.0, -1.0, lo, hi)


def measure_hhat2_ball(d, x, r, cut=3.0):
    """``mu_{h^2}(B(x, r))`` for balls of the cut glued line ``[-cut, -1] u [1, inf)``."""
    a = h_hat_alpha(d)
    s = signed_coordinate(x)
    lo = np.maximum(s - r, -(cut - 1.0))
    hi = s + r
    plus = np.where(hi > 0, _weighted_measure(d, 1.0, -a, 1.0 + np.maximum(lo, 0.0), 1.0 + np.maximum(hi, 0.0)), 0.0)
    q = cut ** (2.0 - d)
    minus = np.where(lo < 0, _weighted_measure(d, -a * q, a, 1.0 + np.maximum(-hi, 0.0), 1.0 + np.maximum(-lo, 0.0)),
                     0.0)
    return plus + minus


def weighted_sandwich(fields, h, measure, c1_set=DEFAULT_C1, c2_set=DEFAULT_C2,
                      exponent_cap=DEFAULT_EXPONENT_CAP, x_window=20.0, h_floor=1e-3):
    """Sandwich of ``T/(h(x)h(y))`` by ``measure(x, sqrt t)^{-1} exp(-|x-y|^2/(c t))``.

    Distances are signed-coordinate distances.  Cells where ``h`` is below
    ``h_floor`` (the absorbing boundary) are skipped.
    """
    logR, logS0, D2, Tt = [], [], [], []
    violations = []
    for f in fields:
        xx, yy = np.meshgrid(f.x, f.y, indexing="ij")
        ok_dom = np.isfinite(f.values)
        hx, hy = np.full(xx.shape, np.nan), np.full(xx.shape, np.nan)
        with np.errstate(all="ignore"):
            try:
                hx = h(xx)
                hy = h(yy)
            except ValueError:
                inside = (xx >= -3.0) & (yy >= -3.0)
                hx = np.where(inside, h(np.where(inside, xx, 1.0)), np.nan)
                hy = np.where(inside, h(np.where(inside, yy, 1.0)), np.nan)
        dist = np.abs(signed_coordinate(xx) - signed_coordinate(yy))
        m = ok_dom & (hx > h_floor) & (hy > h_floor) & (np.abs(xx) <= x_window) & (np.abs(yy) <= x_window)
        m &= dist**2 / (4 * f.t) <= exponent_cap
        v = f.values[m]
        bad = v <= 0
        for xi, yi, vi in list(zip(xx[m][bad], yy[m][bad], v[bad]))[:10]:
            violations.append((float(xi), float(yi), f.t, float(vi)))
        good = ~bad
        logR.append(np.log(v[good]) - np.log(hx[m][good]) - np.log(hy[m][good]))
        logS0.append(-np.log(measure(xx[m][good], math.sqrt(f.t))))
        D2.append(dist[m][good] ** 2)
        Tt.append(np.full(good.sum(), f.t))
    logR, logS0, D2, Tt = map(np.concatenate, (logR, logS0, D2, Tt))
    low = min((float(np.max(logS0 - D2 / (c * Tt) - logR)), c) for c in c1_set)
    up = min((float(np.max(logR - logS0 + D2 / (c * Tt))), c) for c in c2_set)
    C_low, C_up = math.exp(low[0]), math.exp(up[0])
    return SandwichResult(low[1], up[1], max(C_low, C_up), C_low, C_up, (), (), int(logR.size), violations)


def domination_check(d=3.0, times=(0.1, 1.0, 10.0), ys=(-2.0, -1.5, 1.0, 2.0, 5.0), spec=None, tol=1e-7):
    """``T_t >= T^_t`` on the cut line, plus ``T^`` near ``-3`` and the ``gauss3`` sandwich."""
    s = HeatSolver(d, spec or GridSpec(x_max=150.0, forced=(1.5, 2.0, 2.5, 3.0, 5.0)), tol)
    ys = s.snap(ys)
    full, _ = s.direct(ys, list(times))
    cut, _ = s.hat(ys, list(times))
    x = s.glued_grid.x
    dom = (x >= -3.0)
    worst = 0.0
    for a, b in zip(full, cut):
        scale = np.max(np.abs(a.values), axis=0)
        worst = max(worst, float(np.max((b.values[dom] - a.values[dom]) / scale)))
    near = x[(x >= -3.0) & (x < -2.9)]
    edge = [float(np.max(np.abs(f.values[np.isin(x, near)]))) for f in cut]
    ws = weighted_sandwich(cut, lambda z: _h_hat_safe(s.d, z), lambda z, r: measure_hhat2_ball(s.d, z, r))
    return {"max_excess": worst, "edge_values": edge, "edge_points": near.tolist(), "gauss3": ws}


def _h_hat_safe(d, x):
    from .space import h_hat

    x = np.asarray(x, dtype=float)
    inside = x >= -3.0
    return np.where(inside, h_hat(d, np.where(inside, x, 1.0)), np.nan)


def gauss2_check(d=3.0, times=None, spec=None, tol=1e-8):
    """Sandwich of ``T_{t,D}/(h_D h_D)`` by the ``mu_{h_D^2}``-ball shape."""
    from .space import h_D

    times = list(times if times is not None else np.geomspace(0.01, 100.0, 9))
    s = HeatSolver(d, spec or sandwich_grid_spec(), tol)
    ys = np.array([1.25, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0])
    _, d_cols, _ = s.halfline(ys, times)
    fields = [HeatKernelField(t, s.half.r, ys, c, "halfline-D", s.d) for t, c in zip(times, d_cols)]
    return weighted_sandwich(fields, lambda z: h_D(s.d, np.maximum(z, 1.0)),
                             lambda z, r: measure_hD2_ball(s.d, z, r))


# ---------------------------------------------------------------------------
# Pi, Psi, Phi and the hitting-time density


class _LogIntegral:
    """``log int_lo^hi exp(g(s)) ds`` by G7K15 after removing the peak of ``g``."""

    @staticmethod
    def run(logf, lo, hi, rtol, breaks=()):
        if hi <= lo:
            return -math.inf
        probe = np.concatenate([np.linspace(lo, hi, 257)[1:-1], lo + (hi - lo) * np.geomspace(1e-12, 1e-2, 60),
                                hi - (hi - lo) * np.geomspace(1e-12, 1e-2, 60)])
        with np.errstate(all="ignore"):
            vals = logf(probe)
        vals = vals[np.isfinite(vals)]
        if vals.size == 0:
            return -math.inf
        shift = float(np.max(vals))
        peak = float(probe[np.isfinite(logf(probe))][np.argmax(vals)]) if vals.size else lo

        def f(s):
            with np.errstate(all="ignore"):
                v = np.exp(logf(s) - shift)
            return np.where(np.isfinite(v), v, 0.0)

        pts = sorted({p for p in (*breaks, peak) if lo < p < hi})
        res = gk_adaptive(f, lo, hi, rtol=rtol, atol=0.0, breaks=pts, max_intervals=20000)
        if res.value <= 0:
            return -math.inf
        return shift + math.log(res.value)


def _log_exp_decay_tail(log_g, a, u0, rtol):
    """``log int_{u0}^inf exp(log_g(u)) du`` where the integrand decays like ``exp(-a u)``."""
    span = 60.0 / a if a > 0 else 1e6
    u1 = u0 + span
    main = _LogIntegral.run(log_g, u0, u1, rtol)
    return main


def log_psi_integral(d, c4, y, t, rtol=1e-8):
    """``log Psi(y, t)``, ``Psi = int_0^{t/2} s^{-3/2} (s + y)^{(3-d)/2} exp(-y^2/(c4 s)) ds``.

    Evaluated in ``u = 1/s`` on ``[2/t, inf)``: the integrand becomes
    ``u^{-1/2} (1/u + y)^{(3-d)/2} exp(-y^2 u / c4)``.
    """
    dd = as_dimension(d).d
    a = y * y / c4

    def g(u):
        return -0.5 * np.log(u) + 0.5 * (3.0 - dd) * np.log(1.0 / u + y) - a * u

    return _log_exp_decay_tail(g, a, 2.0 / t, rtol)


def psi_integral(d, c4, y, t, rtol=1e-8):
    return math.exp(log_psi_integral(d, c4, y, t, rtol))


def log_phi_integral(d, c1, x, t, rtol=1e-8):
    """``log Phi(x, t)``, ``Phi = int_0^{t/2} s^{-1/2} (x + sqrt s)^{1-d} exp(-x^2/(c1 s)) ds`` (``u = 1/s``)."""
    dd = as_dimension(d).d
    a = x * x / c1

    def g(u):
        return -1.5 * np.log(u) + (1.0 - dd) * np.log(x + 1.0 / np.sqrt(u)) - a * u

    return _log_exp_decay_tail(g, a, 2.0 / t, rtol)


def phi_integral(d, c1, x, t, rtol=1e-8):
    return math.exp(log_phi_integral(d, c1, x, t, rtol))


def log_pi_integral(d, c1, c2, x, y, t, rtol=1e-8):
    """``log Pi_{c1,c2}(x, y, t)``.

    ``Pi = int_0^t (t-s)^{-1/2} (x + sqrt(t-s))^{1-d} (y-1)/y s^{-3/2} (s+y)^{(3-d)/2}
    exp(-(x-1)^2/(c1 (t-s)) - (y-1)^2/(c2 s)) ds``.
    The half ``[0, t/2]`` is integrated in ``u = 1/s`` and ``[t/2, t]`` in
    ``v = sqrt(t - s)``, which removes both endpoint singularities.
    """
    dd = as_dimension(d).d
    if y <= 1.0:
        return -math.inf
    a = (x - 1.0) ** 2 / c1
    b = (y - 1.0) ** 2 / c2
    pre = math.log((y - 1.0) / y)

    def g_u(u):
        s = 1.0 / u
        ts = t - s
        return (-0.5 * np.log(ts) + (1.0 - dd) * np.log(x + np.sqrt(ts)) - 0.5 * np.log(u)
                + 0.5 * (3.0 - dd) * np.log(s + y) - a / ts - b * u)

    def g_v(v):
        s = t - v * v
        return (math.log(2.0) + (1.0 - dd) * np.log(x + v) - 1.5 * np.log(s)
                + 0.5 * (3.0 - dd) * np.log(s + y) - a / (v * v) - b / s)

    left = _log_exp_decay_tail(g_u, b, 2.0 / t, rtol) if b > 0 else -math.inf
    right = _LogIntegral.run(g_v, 0.0, math.sqrt(t / 2.0), rtol)
    return pre + float(np.logaddexp(left, right))


def pi_integral(d, c1, c2, x, y, t, rtol=1e-8):
    return math.exp(log_pi_integral(d, c1, c2, x, y, t, rtol))


def log_hitting_density_comparand(d, y, s):
    dd = as_dimension(d).d
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        return (np.log(y - 1.0) + (dd - 3.0) * np.log(y) - np.log1p(y ** (dd - 2.0))
                - (y - 1.0) ** 2 / (4.0 * s) - 0.5 * (dd - 3.0) * np.log(s + y) - 1.5 * np.log(s))


def hitting_density_comparand(d, y, s):
    """``(y-1) y^{d-3} / (1 + y^{d-2}) exp(-(y-1)^2/(4s)) (s+y)^{(3-d)/2} s^{-3/2}``."""
    if y <= 1.0:
        raise ValueError("y must exceed 1")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise ValueError("s must be positive")
    out = np.exp(log_hitting_density_comparand(d, y, s_arr))
    return float(out) if out.ndim == 0 else out


def hitting_density_mass(d, y, s_max=math.inf, rtol=1e-10):
    """``int_0^{s_max} hitting_density_comparand ds`` (in ``u = 1/s``)."""
    dd = as_dimension(d).d
    a = (y - 1.0) ** 2 / 4.0
    const = math.log(y - 1.0) + (dd - 3.0) * math.log(y) - math.log1p(y ** (dd - 2.0))

    def g(u):
        return -0.5 * np.log(u) - 0.5 * (dd - 3.0) * np.log(1.0 / u + y) - a * u

    u0 = 0.0 if math.isinf(s_max) else 1.0 / s_max
    if u0 == 0.0:
        # int_0^1 separately: u^{-1/2} singularity handled by u = w^2
        def g0(w):
            return math.log(2.0) - 0.5 * (dd - 3.0) * np.log(1.0 / (w * w) + y) - a * w * w

        head = _LogIntegral.run(g0, 0.0, 1.0, rtol)
        tail = _log_exp_decay_tail(g, a, 1.0, rtol)
        return math.exp(const + float(np.logaddexp(head, tail)))
    return math.exp(const + _log_exp_decay_tail(g, a, u0, rtol))


# ---------------------------------------------------------------------------
# consistency reports


@dataclass
class RatioReport:
    name: str
    C: float
    ratio_min: float
    ratio_max: float
    constants: dict
    n_cells: int
    rows: list = field(default_factory=list)

    @property
    def finite(self):
        return math.isfinite(self.C) and self.C > 0


def _kernel_table(d, xs, ys, times, tol=1e-8, spec=None):
    """``T_t(x, -y)`` for x, y >= 1 on a grid with all points as nodes."""
    pts = sorted(set(xs) | set(ys))
    x_max = max(60.0, max(pts) + 12.0 * math.sqrt(max(times)))
    spec = spec or GridSpec(h_min=0.01, grade=0.05, h_cap=0.05, r_inner=max(pts) + 5, stretch=1.03, x_max=x_max,
                            forced=tuple(p for p in pts if p > 1.0))
    s = HeatSolver(d, spec, tol)
    fields, _ = s.direct(-np.asarray(ys, dtype=float), list(times))
    table = {}
    for t, f in zip(times, fields):
        for x in xs:
            for y in ys:
                table[(x, y, t)] = f.at(x, -y)
    return table


PI_GRID_X = (1.25, 2.0, 3.0, 5.0, 10.0, 20.0)
PI_GRID_Y = (1.25, 2.0, 3.0, 5.0, 10.0, 20.0)
PI_GRID_T = (0.1, 1.0, 10.0, 100.0)


def pi_consistency(d=3.0, xs=PI_GRID_X, ys=PI_GRID_Y, times=PI_GRID_T, c_set=DEFAULT_C1, rtol=1e-8,
                   exponent_cap=DEFAULT_EXPONENT_CAP, table=None):
    """Two-sided comparison ``Pi_{c1',c2'} <~ T_t(x,-y) <~ Pi_{c1'',c2''}``.

    For every pair of constants from ``c_set`` the log-ratio range is computed;
    the lower pair minimizes ``sup Pi/T`` and the upper pair ``sup T/Pi``.
    """
    table = table if table is not None else _kernel_table(d, xs, ys, times)
    cells = [(x, y, t) for (x, y, t) in table
             if (x + y - 2.0) ** 2 / (4 * t) <= exponent_cap and table[(x, y, t)] > 0]
    logT = np.array([math.log(table[c]) for c in cells])
    pairs = [(a, b) for a in c_set for b in c_set]
    logPi = np.array([[log_pi_integral(d, a, b, x, y, t, rtol) for (x, y, t) in cells] for (a, b) in pairs])
    low = np.max(logPi - logT, axis=1)  # Pi/T <= C_low
    up = np.max(logT - logPi, axis=1)  # T/Pi <= C_up
    il, iu = int(np.argmin(low)), int(np.argmin(up))
    C = math.exp(max(low[il], up[iu]))
    rows = [{"x": x, "y": y, "t": t, "T": table[(x, y, t)], "Pi_low": math.exp(logPi[il, k]),
             "Pi_up": math.exp(logPi[iu, k])} for k, (x, y, t) in enumerate(cells)]
    return RatioReport("mixedKernelBound", C, math.exp(-low[il]), math.exp(up[iu]),
                       {"c1_lower": pairs[il][0], "c2_lower": pairs[il][1],
                        "c1_upper": pairs[iu][0], "c2_upper": pairs[iu][1]}, len(cells), rows)


PSI_GRID_Y = (2.0, 3.0, 5.0, 10.0, 20.0, 50.0)
PSI_GRID_T = tuple(np.geomspace(0.1, 1000.0, 9))


def psi_sandwich(d=3.0, c4=4.0, ys=PSI_GRID_Y, times=PSI_GRID_T, c5=None, rtol=1e-8):
    """``c y^{2-d} exp(-y^2/(c5 t)) <= Psi(y,t) <= C y^{2-d}`` with ``c5 = c4/4``.

    Smaller ``c5`` only weakens the lower bound, so ``c5`` is pinned to
    ``c4/4`` and the fitted ``c`` and ``C`` are reported.
    """
    dd = as_dimension(d).d
    c5 = c4 / 4.0 if c5 is None else c5
    cells = [(y, t) for y in ys for t in times]
    g = np.array([log_psi_integral(dd, c4, y, t, rtol) + (dd - 2.0) * math.log(y) for (y, t) in cells])
    C_up = math.exp(float(np.max(g)))
    c_low = math.exp(float(np.min([gv + y * y / (c5 * t) for gv, (y, t) in zip(g, cells)])))
    C = max(C_up, 1.0 / c_low)
    rows = [{"y": y, "t": t, "y^(d-2) Psi": math.exp(gv)} for gv, (y, t) in zip(g, cells)]
    return RatioReport("psi_est", C, c_low, C_up, {"c4": c4, "c5": c5, "c": c_low, "C": C_up}, len(cells), rows)


def phi_bound(d=3.0, c1=4.0, xs=(2.0, 3.0, 5.0, 10.0, 20.0, 50.0), times=PSI_GRID_T, rtol=1e-8):
    """Fitted ``C`` in ``Phi(x,t) <= C x^{2-d} exp(-x^2/(c1 t))``."""
    dd = as_dimension(d).d
    cells = [(x, t) for x in xs for t in times]
    g = np.array([log_phi_integral(dd, c1, x, t, rtol) + (dd - 2.0) * math.log(x) + x * x / (c1 * t)
                  for (x, t) in cells])
    C = math.exp(float(np.max(g)))
    return RatioReport("Phi", C, math.exp(float(np.min(g))), C, {"c1": c1}, len(cells))


def _neumann_from_one(d, xs, t_max, tol=1e-8, n_tau=600):
    """``T_{tau,N}(x, 1)`` for the given x on a fine grid of ``tau in (0, t_max]``."""
    spec = GridSpec(h_min=0.005, grade=0.05, h_cap=0.05, r_inner=max(xs) + 5, stretch=1.03,
                    x_max=max(60.0, max(xs) + 12.0 * math.sqrt(t_max)), forced=tuple(x for x in xs if x > 1.0))
    s = HeatSolver(d, spec, tol)
    taus = np.unique(np.concatenate([np.geomspace(1e-5, t_max, n_tau), np.linspace(0.0, t_max, n_tau)[1:]]))
    cols, _ = s._columns(s.op_N, [1.0], list(taus))
    rows = [s.half.index_of(x) for x in xs]
    vals = np.array([[c[i, 0] for i in rows] for c in cols])  # (tau, x)
    return taus, vals


def first_passage_consistency(d=3.0, xs=PI_GRID_X, ys=PI_GRID_Y, times=PI_GRID_T, exponent_cap=DEFAULT_EXPONENT_CAP,
                      table=None):
    """``T_t(x,-y)`` against ``int_0^t T_{t-s,N}(x,1) q(y,s) ds`` with ``q`` the comparand density."""
    table = table if table is not None else _kernel_table(d, xs, ys, times)
    out = []
    for t in times:
        taus, vals = _neumann_from_one(d, xs, t)
        taus = np.concatenate([[0.0], taus])
        vals = np.vstack([np.zeros(len(xs)), vals])
        s = t - taus  # hitting time
        for iy, y in enumerate(ys):
            q = np.where(s > 0, np.exp(log_hitting_density_comparand(d, y, np.maximum(s, 1e-300))), 0.0)
            for ix, x in enumerate(xs):
                conv = float(trapezoid(vals[:, ix] * q, taus))
                T = table[(x, y, t)]
                if (x + y - 2.0) ** 2 / (4 * t) <= exponent_cap and T > 0 and conv > 0:
                    out.append({"x": x, "y": y, "t": t, "T": T, "conv": conv, "ratio": T / conv})
    ratios = np.array([r["ratio"] for r in out])
    C = float(max(ratios.max(), 1.0 / ratios.min()))
    return RatioReport("first_passage", C, float(ratios.min()), float(ratios.max()), {}, len(out), out)


@dataclass
class MixedReport:
    """Psi sandwich and Pi consistency at a base and a tightened quadrature tolerance."""

    d: float
    psi: RatioReport
    psi_tight: RatioReport
    pi: RatioReport
    pi_tight: RatioReport
    rtol: float
    tighten: float
    stability: float
    runtime: float

    @property
    def change(self):
        return max(abs(self.psi_tight.C / self.psi.C - 1.0), abs(self.pi_tight.C / self.pi.C - 1.0))

    @property
    def passed(self):
        finite = all(r.finite for r in (self.psi, self.psi_tight, self.pi, self.pi_tight))
        return finite and self.change <= self.stability


def mixed_check(d=3.0, rtol=1e-8, tighten=10.0, stability=0.01, table=None):
    """Both ratio reports at ``rtol`` and ``rtol / tighten`` on one kernel table."""
    t0 = time.perf_counter()
    table = table if table is not None else _kernel_table(d, PI_GRID_X, PI_GRID_Y, PI_GRID_T)
    tight = rtol / tighten
    return MixedReport(float(as_dimension(d).d), psi_sandwich(d, rtol=rtol), psi_sandwich(d, rtol=tight),
                       pi_consistency(d, rtol=rtol, table=table), pi_consistency(d, rtol=tight, table=table),
                       rtol, tighten, stability, time.perf_counter() - t0)
