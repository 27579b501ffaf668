"""Riesz transforms ``R = d/dx L^{-1/2}`` on the half-line and the glued line.

Kernels.  The resolvent of ``L_N + lam^2`` has kernel
``lam^{d-2} psi_lam(min(x,y)) k(lam max(x,y))`` with respect to ``mu`` (and
``tau`` in place of ``psi`` for ``L_D``), and
``L^{-1/2} = (2/pi) int_0^inf (L + lam^2)^{-1} dlam``.  Differentiating in x,

    R(x, y) = (2/pi) int_0^inf lam^{d-2} psi'_lam(x) k(lam y) dlam,   x < y,
    R(x, y) = (2/pi) int_0^inf lam^{d-1} psi_lam(y) k'(lam x) dlam,   y < x.

The integrands are assembled from log-magnitudes (see :mod:`specfun`) and
integrated by adaptive Gauss-Kronrod on panels split at ``1/max(x,y)`` and
``1/min(x,y)``, up to ``Lambda = 40/|x-y|`` plus a floor.

Operators.  On a grid, ``L^{-1/2} f`` is the same ``k``-integral of
tridiagonal resolvent solves, taken in ``k = e^v`` by the trapezoid rule, and
the derivative is a 4th-order five-point stencil on the mirrored grid.

On the glued line the derivative is taken along the outward direction of each
end (``d/d|x|``), so that even functions map to even functions and

    R~(x, y) = (R_N(|x|,|y|) + sign(xy) R_D(|x|,|y|)) / 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun as sf
from .discrete import DiscreteOperator
from .quadrature import QuadratureError, gk_adaptive
from .space import GluedGrid, GridSpec, HalfGrid, h_D
from .specfun import as_dimension

__all__ = [
    "DiagonalProximityError",
    "RieszKernelEval",
    "riesz_kernel",
    "riesz_kernel_dy",
    "glued_riesz_kernel",
    "ResolventQuadrature",
    "apply_riesz",
    "apply_glued_riesz",
    "apply_glued_riesz_parity",
    "inverse_sqrt",
    "inverse_sqrt_converged",
    "stencil_derivative",
    "verify_derivative_bounds",
    "lp_growth",
    "l2_bound",
    "kernel_operator_consistency",
    "branch_continuity",
]

TWO_OVER_PI = 2.0 / math.pi


class DiagonalProximityError(ValueError):
    """Kernel requested closer to the diagonal than ``delta_min``."""


def _log_k(d, z):
    return sf.log_k(d, z)


def _log_kp(d, z):
    return sf.log_kp_abs(d, z)


@dataclass(frozen=True)
class RieszKernelEval:
    """Kernel evaluator for one dimension with its quadrature policy."""

    d: float
    rtol: float = 1e-10
    delta_min: float = 1e-3
    cutoff: float = 40.0

    def __post_init__(self):
        object.__setattr__(self, "d", as_dimension(self.d).d)

    def lam_max(self, x, y):
        return self.cutoff / abs(x - y) + 50.0 / min(x, y)

    def breaks(self, x, y):
        """Panel edges: the scales ``1/max``, ``1/min``, ``1/|x-y|`` and a
        geometric fill (ratio <= 4) so that no panel is much longer than the
        decay length ``1/|x-y|`` of the integrand beyond it."""
        dist = abs(x - y)
        pts = [1.0 / max(x, y), 1.0 / min(x, y), 1.0 / dist]
        lo, hi = min(pts), self.lam_max(x, y)
        n = max(1, int(math.ceil(math.log(hi / lo) / math.log(4.0))))
        pts += list(np.geomspace(lo, hi, n + 1)[1:-1])
        pts += [k / dist for k in (2.0, 5.0, 10.0, 20.0)]
        return sorted(set(pts))

    def _check(self, x, y):
        for v in (x, y):
            if not (math.isfinite(v) and v >= 1.0):
                raise sf.DomainError(f"kernel arguments must be finite and >= 1, got {v}")
        if abs(x - y) < self.delta_min * (1 - 1e-9):
            raise DiagonalProximityError(f"|x - y| = {abs(x - y):.3g} below delta_min = {self.delta_min}")

    def log_integrand(self, bc, x, y, lam, deriv=False):
        """``(sign, log|f|)`` of the lambda-integrand (without ``2/pi``).

        ``deriv=True`` gives the integrand of ``d/dy R(x, y)``.
        """
        d = self.d
        if x < y:
            if bc == "N":
                la = sf.log_psi_prime(d, lam, x)
            else:
                la = sf.log_tau_prime(d, lam, x)
            if deriv:
                return -1, (d - 1.0) * np.log(lam) + la + _log_kp(d, lam * y)
            return 1, (d - 2.0) * np.log(lam) + la + _log_k(d, lam * y)
        if bc == "N":
            lb = sf.log_psi_prime(d, lam, y) if deriv else sf.log_psi(d, lam, y)
        else:
            lb = sf.log_tau_prime(d, lam, y) if deriv else sf.log_tau(d, lam, y)
        # psi'_lam(y) = d/dy psi_lam(y) already carries the chain-rule lambda
        return -1, (d - 1.0) * np.log(lam) + lb + _log_kp(d, lam * x)

    def integrate(self, bc, x, y, deriv=False, rtol=None):
        self._check(x, y)
        if bc not in ("N", "D"):
            raise ValueError(f"bc must be 'N' or 'D', got {bc!r}")
        rtol = self.rtol if rtol is None else rtol
        sign, _ = self.log_integrand(bc, x, y, np.array([1.0]), deriv)
        lmax = self.lam_max(x, y)

        def f(lam):
            _, lv = self.log_integrand(bc, x, y, lam, deriv)
            return np.exp(lv)

        res = gk_adaptive(f, 0.0, lmax, rtol=rtol, breaks=self.breaks(x, y), max_intervals=4000)
        return sign * TWO_OVER_PI * res.value, TWO_OVER_PI * res.error


_EVALS: dict = {}


def _evaluator(d, rtol=1e-10, delta_min=1e-3):
    key = (float(d), rtol, delta_min)
    if key not in _EVALS:
        _EVALS[key] = RieszKernelEval(float(d), rtol, delta_min)
    return _EVALS[key]


def riesz_kernel(bc, d, x, y, rtol=1e-10, delta_min=1e-3, return_error=False):
    """``R_N(x, y)`` (``bc='N'``) or ``R_D(x, y)`` (``bc='D'``) for ``x != y``."""
    val, err = _evaluator(d, rtol, delta_min).integrate(bc, float(x), float(y), False)
    return (val, err) if return_error else val


def riesz_kernel_dy(bc, d, x, y, rtol=1e-10, delta_min=1e-3):
    """``d/dy R(x, y)`` by differentiating under the lambda-integral."""
    return _evaluator(d, rtol, delta_min).integrate(bc, float(x), float(y), True)[0]


def glued_riesz_kernel(d, x, y, rtol=1e-10, delta_min=1e-3):
    """``R~(x, y)`` for real ``|x|, |y| >= 1`` (radial derivative convention)."""
    from .space import as_point

    px, py = as_point(x), as_point(y)
    if abs(px.s - py.s) < delta_min:
        raise DiagonalProximityError("points too close")
    rn = riesz_kernel("N", d, px.r, py.r, rtol, delta_min)
    rd = riesz_kernel("D", d, px.r, py.r, rtol, delta_min)
    return 0.5 * (rn + px.side * py.side * rd)


# ---------------------------------------------------------------------------
# grid operators


def fd_weights(x0, nodes, m=1):
    """Fornberg weights for the ``m``-th derivative at ``x0``."""
    n = len(nodes)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


class _Stencil:
    """Five-point first-derivative stencils on a node array (one-sided at the ends)."""

    def __init__(self, s):
        n = s.size
        lo = np.clip(np.arange(n) - 2, 0, n - 5)
        self.idx = lo[:, None] + np.arange(5)
        # Taylor conditions in the local scale t = (s_j - s_i)/h_i
        h = np.maximum(np.abs(s[self.idx] - s[:, None]).max(axis=1), 1e-300)
        t = (s[self.idx] - s[:, None]) / h[:, None]
        V = t[:, None, :] ** np.arange(5)[None, :, None]
        rhs = np.zeros((n, 5))
        rhs[:, 1] = 1.0
        self.w = np.linalg.solve(V, rhs[..., None])[..., 0] / h[:, None]

    def __call__(self, u):
        u = np.asarray(u)
        if u.ndim == 1:
            return np.sum(self.w * u[self.idx], axis=1)
        return np.einsum("ik,ik...->i...", self.w, u[self.idx])


_STENCILS: dict = {}


def stencil_derivative(s, u):
    """4th-order derivative of samples ``u`` at nodes ``s`` (one-sided at the ends)."""
    s = np.ascontiguousarray(s, dtype=float)
    key = s.tobytes()
    st = _STENCILS.get(key)
    if st is None:
        if len(_STENCILS) > 32:
            _STENCILS.clear()
        st = _STENCILS[key] = _Stencil(s)
    return st(u)


@dataclass
class ResolventQuadrature:
    """Trapezoid rule in ``v = log k`` for ``(2/pi) int_0^inf (L + k^2)^{-1} dk``."""

    dv: float = 0.3
    v_min: float = -22.0
    v_max: float = 22.0

    def nodes(self):
        v = np.arange(self.v_min, self.v_max + 0.5 * self.dv, self.dv)
        k = np.exp(v)
        return k, TWO_OVER_PI * self.dv * k

    def refined(self):
        return ResolventQuadrature(self.dv / 2, self.v_min, self.v_max)

    @classmethod
    def for_operator(cls, op: DiscreteOperator, dv=0.3, margin=20.0):
        lo, hi = op.spectral_bounds()
        lo = max(lo, 1e-300)
        return cls(dv, 0.5 * math.log(lo) - margin, 0.5 * math.log(hi) + margin)


def inverse_sqrt(op: DiscreteOperator, f, quad: ResolventQuadrature):
    """``L^{-1/2} f`` by resolvent quadrature."""
    f = np.asarray(f, dtype=float)
    out = np.zeros_like(f)
    k, w = quad.nodes()
    for kj, wj in zip(k, w):
        out += wj * op.solve_shifted(kj * kj, f)
    return out


def _rel_change(op, new, old):
    w = op.weights.reshape((-1,) + (1,) * (new.ndim - 1))
    num = np.sqrt(np.sum(w * (new - old) ** 2, axis=0))
    den = np.sqrt(np.sum(w * new**2, axis=0))
    return float(np.max(num / np.maximum(den, 1e-300)))


def inverse_sqrt_converged(op, f, dv=0.6, tol=1e-6, max_refine=6):
    """Halve the trapezoid step until ``L^{-1/2} f`` changes by less than ``tol``.

    The change is the weighted-L2 relative difference, maximized over columns.
    Each halving reuses the previous sum and only solves at the new midpoints.
    """
    quad = ResolventQuadrature.for_operator(op, dv)
    u = inverse_sqrt(op, f, quad)
    change = math.inf
    for _ in range(max_refine):
        k = np.exp(np.arange(quad.v_min + quad.dv / 2, quad.v_max, quad.dv))
        mid = np.zeros_like(u)
        for kj in k:
            mid += kj * op.solve_shifted(kj * kj, f)
        quad = quad.refined()
        u2 = 0.5 * u + TWO_OVER_PI * quad.dv * mid
        change = _rel_change(op, u2, u)
        u = u2
        if change <= tol:
            return u, quad
    raise QuadratureError(f"resolvent quadrature did not converge to {tol} (last change {change:.3g})")


def _mirror(half: HalfGrid, u_half, parity):
    s_half = half.r - 1.0
    s = np.concatenate([-s_half[:0:-1], s_half])
    sign = 1.0 if parity == "even" else -1.0
    return s, np.concatenate([sign * u_half[:0:-1], u_half])


def apply_riesz(bc, d, grid: HalfGrid, f, tol=1e-6, dv=0.6, return_u=False):
    """``R_N f`` or ``R_D f`` on a half-line grid (``f`` sampled at ``grid.r``).

    ``f`` may carry extra columns.  The far end is absorbing.  Near ``x = 1``
    the stencil uses ghost values from the even (Neumann) or odd (Dirichlet)
    reflection.
    """
    f = np.asarray(f, dtype=float)
    if f.shape[0] != grid.n:
        raise ValueError("f must be sampled on the grid nodes")
    op = DiscreteOperator.half_line(grid, "neumann" if bc == "N" else "dirichlet")
    active = slice(0, op.n) if bc == "N" else slice(1, op.n + 1)
    u_act, _ = inverse_sqrt_converged(op, f[active], dv=dv, tol=tol)
    u = np.zeros(f.shape)
    u[active] = u_act
    s, um = _mirror(grid, u, "even" if bc == "N" else "odd")
    du = stencil_derivative(s, um)[grid.n - 1:]
    return (du, u) if return_u else du


def apply_glued_riesz(d, grid: GluedGrid, f, tol=1e-6, dv=0.6, return_u=False):
    """``R~ f`` on the glued grid by the glued operator itself (radial derivative).

    At the junction the radial derivatives of the two ends differ in sign;
    the node there gets their average.
    """
    f = np.asarray(f, dtype=float)
    op = DiscreteOperator.glued(grid)
    u = np.zeros(f.shape)
    u_act, _ = inverse_sqrt_converged(op, f[1:-1], dv=dv, tol=tol)
    u[1:-1] = u_act
    s = grid.s
    sgn = np.sign(s).reshape((-1,) + (1,) * (f.ndim - 1))
    du = stencil_derivative(s, u) * sgn
    return (du, u) if return_u else du


def apply_glued_riesz_parity(d, grid: GluedGrid, f, tol=1e-6, dv=0.6):
    """``R~ f = (R_N f_e|)_even + (R_D f_o|)_odd`` through the half-line operators."""
    from .space import extend, parity_split, restrict

    fe, fo = parity_split(grid, f)
    rn = apply_riesz("N", d, grid.half, restrict(grid, fe), tol, dv)
    rd = apply_riesz("D", d, grid.half, restrict(grid, fo), tol, dv)
    out = extend(grid, rn, "even") + extend(grid, rd, "odd")
    return out


# ---------------------------------------------------------------------------
# verification


@dataclass
class DerivativeBoundReport:
    d: float
    C_N: list
    C_D: list
    worst_N: list
    worst_D: list
    change_N: float
    change_D: float
    fd_max_rel: float
    n_cells: list
    rows: list = field(default_factory=list)

    @property
    def passed(self):
        finite = all(math.isfinite(c) for c in self.C_N + self.C_D)
        return finite and self.change_N <= 0.10 and self.change_D <= 0.10 and self.fd_max_rel <= 1e-5


def _cells(n, lo=1.0, hi=30.0, gap=0.1):
    g = np.geomspace(lo, hi, n)
    deltas = np.concatenate([np.geomspace(gap, hi - lo, n)])
    cells = set()
    for x in g:
        for dlt in deltas:
            for y in (x + dlt, x - dlt):
                if lo < y <= hi:
                    cells.add((float(x), float(y)))
    return sorted(cells)


def derivative_bound_values(d, cells, rtol=1e-10):
    """``(|dR_N| x^{d-1}(x-y)^2, |d(R_D/h_D)| h_D(y) |x-y|^2 x max^{d-2})`` per cell."""
    ev = _evaluator(d, rtol)
    dd = ev.d
    out = []
    for x, y in cells:
        dn = ev.integrate("N", x, y, True)[0]
        dD = ev.integrate("D", x, y, True)[0]
        rD = ev.integrate("D", x, y, False)[0]
        hy = float(h_D(dd, y))
        hpy = (dd - 2.0) * y ** (1.0 - dd)
        dq = dD / hy - rD * hpy / hy**2
        bn = abs(dn) * x ** (dd - 1.0) * (x - y) ** 2
        bd = abs(dq) * hy * (x - y) ** 2 * x * max(x, y) ** (dd - 2.0)
        out.append((bn, bd))
    return np.array(out)


def verify_derivative_bounds(d, n=10, refine=2, n_fd=50, seed=0, rtol=1e-10):
    """Empirical constants of both derivative bounds on a grid and its refinement."""
    C_N, C_D, wN, wD, counts = [], [], [], [], []
    for level in range(2):
        cells = _cells(n * refine**level, lo=1.0, hi=30.0)
        vals = derivative_bound_values(d, cells, rtol)
        iN, iD = int(np.argmax(vals[:, 0])), int(np.argmax(vals[:, 1]))
        C_N.append(float(vals[iN, 0]))
        C_D.append(float(vals[iD, 1]))
        wN.append(cells[iN])
        wD.append(cells[iD])
        counts.append(len(cells))
    fd = fd_crosscheck(d, n_fd, seed, rtol)
    return DerivativeBoundReport(
        float(d), C_N, C_D, wN, wD, abs(C_N[1] / C_N[0] - 1.0), abs(C_D[1] / C_D[0] - 1.0), fd, counts)


def fd_crosscheck(d, n=50, seed=0, rtol=1e-12):
    """Max relative gap between analytic and finite-difference ``d/dy R`` at random cells."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    ev = _evaluator(d, rtol)
    for _ in range(n):
        x = float(np.exp(rng.uniform(0.0, math.log(30.0))))
        while True:
            y = float(np.exp(rng.uniform(0.0, math.log(30.0))))
            if abs(x - y) >= 0.5 and y > 1.1:
                break
        bc = "N" if rng.random() < 0.5 else "D"
        h = min(1e-3, abs(x - y) / 50.0, (y - 1.0) / 4.0)
        vals = [ev.integrate(bc, x, y + k * h, False)[0] for k in (-2, -1, 1, 2)]
        fd = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
        an = ev.integrate(bc, x, y, True)[0]
        worst = max(worst, abs(fd - an) / abs(an))
    return worst


def branch_continuity(bc, d, x=3.0, deltas=(1e-1, 1e-2, 1e-3)):
    """``(delta, R(x, x+delta) + R(x, x-delta))`` along a decreasing sequence.

    The kernel is antisymmetric to leading order at the diagonal, so the
    symmetric sum measures the mismatch of the two branches.
    """
    out = []
    for dl in deltas:
        a = riesz_kernel(bc, d, x, x + dl, delta_min=min(dl, 1e-3))
        b = riesz_kernel(bc, d, x, x - dl, delta_min=min(dl, 1e-3))
        out.append((dl, a, b, a + b))
    return out


def l2_bound(d, bc="N", n_funcs=100, seed=0, spec=None):
    """``max ||R f||_2 / ||f||_2`` over random smooth functions on ``[1, 20]``."""
    spec = spec or GridSpec(h_min=0.02, grade=0.05, h_cap=0.1, r_inner=25.0, stretch=1.05, x_max=2e3)
    grid = HalfGrid.build(d, spec)
    rng = np.random.default_rng(seed)
    w = grid.weights
    ratios = []
    r = grid.r
    for _ in range(n_funcs):
        c = rng.uniform(1.5, 15.0)
        wid = rng.uniform(0.3, 4.0)
        coef = rng.standard_normal(4)
        f = np.exp(-(((r - c) / wid) ** 2)) * np.polynomial.legendre.legval(np.clip((r - c) / (3 * wid), -1, 1), coef)
        if bc == "D":
            f[0] = 0.0
        rf = apply_riesz(bc, d, grid, f)
        ratios.append(math.sqrt(np.sum(w * rf**2) / np.sum(w * f**2)))
    return float(np.max(ratios)), float(np.min(ratios))


def lp_growth(d=3.0, p=None, Ms=(10.0, 100.0, 1000.0), bc="D"):
    """``||R f_M||_p / ||f_M||_p`` for ``f_M = 1_[2, M]``, with the fitted slope in ``log M``."""
    dd = as_dimension(d).d
    p = dd + 1.0 if p is None else p
    out = []
    for M in Ms:
        spec = GridSpec(h_min=0.005, grade=0.05, h_cap=0.05 * max(1.0, M / 100), r_inner=M + 5.0, stretch=1.05,
                        x_max=max(200.0, 50.0 * M), foci=(1.0, 2.0, M), forced=(2.0, float(M)))
        grid = HalfGrid.build(dd, spec)
        f = ((grid.r >= 2.0) & (grid.r <= M)).astype(float)
        rf = apply_riesz(bc, dd, grid, f)
        w = grid.weights
        win = grid.r <= 10.0 * M
        num = np.sum(w[win] * np.abs(rf[win]) ** p) ** (1.0 / p)
        den = np.sum(w * f**p) ** (1.0 / p)
        out.append(num / den)
    slope = float(np.polyfit(np.log(Ms), np.log(out), 1)[0])
    return {"M": list(Ms), "ratio": out, "slope_loglog": slope, "p": p}


def kernel_operator_consistency(d=3.0, bc="N", y0=3.0, eps=0.02, xs=(1.5, 2.0, 5.0, 8.0, 15.0)):
    """Kernel values against ``R`` applied to a narrow normalized bump at ``y0``."""
    dd = as_dimension(d).d
    spec = GridSpec(h_min=eps / 40, grade=0.02, h_cap=0.05, r_inner=25.0, stretch=1.04, x_max=5e3,
                    foci=(1.0, y0), forced=tuple(sorted({y0 - eps, y0 + eps, *xs})))
    grid = HalfGrid.build(dd, spec)
    r = grid.r
    bump = np.where(np.abs(r - y0) <= eps, np.cos(np.pi * (r - y0) / (2 * eps)) ** 2, 0.0)
    bump /= np.sum(grid.weights * bump)
    rf = apply_riesz(bc, dd, grid, bump)
    rows = []
    for x in xs:
        i = grid.index_of(x)
        k = riesz_kernel(bc, dd, x, y0)
        rows.append({"x": x, "kernel": k, "operator": float(rf[i]), "rel": abs(rf[i] - k) / abs(k)})
    return rows
