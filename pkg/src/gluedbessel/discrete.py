"""Finite-volume discretization of ``Lf = -(x^{d-1} f')' / x^{d-1}``.

Node ``i`` carries the cell weight ``w_i = int_cell |x|^{d-1} dx`` and
neighboring nodes are coupled through the exact conductance

    g_{i+1/2} = 1 / int_{r_i}^{r_{i+1}} s^{1-d} ds,

so ``W L = S`` with ``S`` a symmetric stiffness matrix.  Constants are in the
kernel of the Neumann operator and ``x^{2-d}`` is exactly discrete-harmonic
away from the boundary.  All boundary variants reduce to a symmetric
tridiagonal pencil ``(S, W)``.

Time stepping is Crank-Nicolson with Richardson step-doubling error control.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack

from .space import GluedGrid, GridError, HalfGrid

__all__ = ["DiscreteOperator", "StepFailure", "evolve", "BOUNDARY_CONDITIONS"]

BOUNDARY_CONDITIONS = ("neumann", "dirichlet", "glued", "hat")


class StepFailure(RuntimeError):
    """Adaptive time stepping could not meet its tolerance within the step budget."""


def _conductance(d, a, b):
    # 1 / int_a^b s^{1-d} ds
    if abs(d - 2.0) < 1e-14:
        return 1.0 / np.log(b / a)
    return (2.0 - d) / (b ** (2.0 - d) - a ** (2.0 - d))


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Symmetric tridiagonal pencil ``S u = lambda W u`` on a node set.

    ``x`` holds the real coordinates of the active (unknown) nodes;
    ``weights`` their mu-weights; ``diag``/``off`` the stiffness matrix.
    The far end of every grid is absorbing (its node is removed).
    """

    x: np.ndarray
    weights: np.ndarray
    diag: np.ndarray
    off: np.ndarray
    bc: str
    d: float
    grid: object = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.x.size

    # -- construction -------------------------------------------------------

    @classmethod
    def half_line(cls, grid: HalfGrid, bc: str = "neumann") -> "DiscreteOperator":
        """``L_N`` (reflecting at 1) or ``L_D`` (absorbing at 1) on ``[1, x_max)``."""
        d, r = grid.d, grid.r
        w = grid.weights
        g = _conductance(d, r[:-1], r[1:])
        diag = np.zeros(r.size)
        diag[:-1] += g
        diag[1:] += g
        off = -g
        if bc == "neumann":
            sl = slice(0, r.size - 1)
        elif bc == "dirichlet":
            sl = slice(1, r.size - 1)
        else:
            raise ValueError(f"half-line boundary condition must be neumann or dirichlet, got {bc!r}")
        return cls(r[sl].copy(), w[sl].copy(), diag[sl].copy(), off[sl][:-1].copy(), bc, d, grid)

    @classmethod
    def glued(cls, grid: GluedGrid, cut_minus: float | None = None) -> "DiscreteOperator":
        """``L~`` on the glued grid; ``cut_minus=3`` gives ``L^`` (absorbing at -3)."""
        d = grid.d
        r = grid.half.r
        g_half = _conductance(d, r[:-1], r[1:])
        g = np.concatenate([g_half[::-1], g_half])
        x = grid.x
        w = grid.weights
        diag = np.zeros(x.size)
        diag[:-1] += g
        diag[1:] += g
        lo = 1
        bc = "glued"
        if cut_minus is not None:
            i = grid.index_of(-float(cut_minus))
            lo = i + 1
            bc = "hat"
        sl = slice(lo, x.size - 1)
        return cls(x[sl].copy(), w[sl].copy(), diag[sl].copy(), -g[sl][:-1].copy(), bc, d, grid,
                   {"cut_minus": cut_minus})

    # -- algebra ------------------------------------------------------------

    def apply(self, f):
        """``L f`` for ``f`` of shape ``(n,)`` or ``(n, m)``."""
        f = np.asarray(f, dtype=float)
        sf = self.diag.reshape((-1,) + (1,) * (f.ndim - 1)) * f
        off = self.off.reshape((-1,) + (1,) * (f.ndim - 1))
        sf[:-1] += off * f[1:]
        sf[1:] += off * f[:-1]
        return sf / self.weights.reshape((-1,) + (1,) * (f.ndim - 1))

    def dirichlet_form(self, f, g):
        """``sum_i g_i (L f)_i w_i``, the discrete ``int f' g' dmu``."""
        return float(np.sum(np.asarray(g) * self.apply(f) * self.weights))

    def inner(self, f, g):
        return np.sum(np.asarray(f) * np.asarray(g) * self.weights.reshape((-1,) + (1,) * (np.ndim(f) - 1)), axis=0)

    def symmetric_tridiagonal(self):
        """``(diag, off)`` of ``W^{-1/2} S W^{-1/2}``."""
        sw = np.sqrt(self.weights)
        return self.diag / self.weights, self.off / (sw[:-1] * sw[1:])

    def spectral_bounds(self):
        """Smallest and largest eigenvalues of ``L``."""
        from scipy.linalg import eigvalsh_tridiagonal

        dd, ee = self.symmetric_tridiagonal()
        lo = eigvalsh_tridiagonal(dd, ee, select="i", select_range=(0, 0))[0]
        hi = eigvalsh_tridiagonal(dd, ee, select="i", select_range=(self.n - 1, self.n - 1))[0]
        return float(lo), float(hi)

    def max_eigenvalue_bound(self) -> float:
        """Gershgorin bound on the spectrum of ``L``."""
        dd, ee = self.symmetric_tridiagonal()
        rad = np.zeros_like(dd)
        rad[:-1] += np.abs(ee)
        rad[1:] += np.abs(ee)
        return float(np.max(dd + rad))

    def solve_shifted(self, shift, f):
        """``(L + shift) u = f`` (shift >= 0; the Neumann case needs shift > 0)."""
        f = np.asarray(f, dtype=float)
        w = self.weights.reshape((-1,) + (1,) * (f.ndim - 1))
        dfac, efac, info = lapack.dpttrf(self.diag + shift * self.weights, self.off)
        if info != 0:
            raise np.linalg.LinAlgError(f"shifted system not positive definite (info={info})")
        u, info = lapack.dpttrs(dfac, efac, f * w)
        if info != 0:
            raise np.linalg.LinAlgError(f"tridiagonal solve failed (info={info})")
        return u

    def point_mass(self, index):
        e = np.zeros(self.n)
        e[index] = 1.0 / self.weights[index]
        return e

    def index_of(self, x, tol=1e-9) -> int:
        i = int(np.argmin(np.abs(self.x - x)))
        if abs(self.x[i] - x) > tol * max(1.0, abs(x)):
            raise GridError(f"{x} is not an active node of this operator (nearest {self.x[i]})")
        return i

    def lift(self, u):
        """Embed active-node values into the full grid (zeros on removed nodes)."""
        full = np.asarray(self.grid.r if isinstance(self.grid, HalfGrid) else self.grid.x)
        out = np.zeros((full.size,) + np.shape(u)[1:])
        start = int(np.argmin(np.abs(full - self.x[0])))
        out[start:start + self.n] = u
        return out


class _CNStepper:
    """Crank-Nicolson step ``(W + dt/2 S) u' = (W - dt/2 S) u`` with cached factorizations."""

    def __init__(self, op: DiscreteOperator):
        self.op = op
        self._cache = {}

    def _factor(self, dt):
        key = float(dt)
        fac = self._cache.get(key)
        if fac is None:
            op = self.op
            dfac, efac, info = lapack.dpttrf(op.weights + 0.5 * dt * op.diag, 0.5 * dt * op.off)
            if info != 0:
                raise StepFailure(f"Crank-Nicolson matrix not positive definite at dt={dt}")
            if len(self._cache) > 64:
                self._cache.clear()
            fac = self._cache[key] = (dfac, efac)
        return fac

    def step(self, u, dt):
        op = self.op
        w = op.weights[:, None]
        su = op.diag[:, None] * u
        su[:-1] += op.off[:, None] * u[1:]
        su[1:] += op.off[:, None] * u[:-1]
        rhs = w * u - 0.5 * dt * su
        dfac, efac = self._factor(dt)
        out, info = lapack.dpttrs(dfac, efac, rhs)
        return out


def _wnorm(op, u):
    return np.sqrt(np.sum(op.weights[:, None] * u * u, axis=0))


def evolve(op: DiscreteOperator, t, f, tol=1e-6, dt0=None, max_steps=200_000, return_stats=False,
           schedule=None):
    """``exp(-t L) f`` by adaptive Crank-Nicolson.

    ``t`` may be a scalar or an increasing sequence of output times; ``f`` is
    ``(n,)`` or ``(n, m)``.  Each step is compared with two half steps; the
    relative weighted-L2 difference (per column, maximum over columns) must
    not exceed ``tol``.  The accepted value is the two-half-step result.  The
    first step is ``0.25/lambda_max`` so that the stiff modes of point-mass
    data are resolved before the step grows.

    ``schedule`` replays the accepted step sizes of an earlier run (as found
    in ``stats["schedule"]``) without error control, so two operators can be
    propagated by the same time discretization.
    """
    f = np.asarray(f, dtype=float)
    vec = f.ndim == 1
    u = f.reshape(op.n, -1).copy()
    times = np.atleast_1d(np.asarray(t, dtype=float))
    scalar_t = np.ndim(t) == 0
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be nonnegative and nondecreasing")
    stepper = _CNStepper(op)
    outputs = []
    if schedule is not None:
        k = 0
        for target in times:
            while k < len(schedule) and schedule[k][0] < target:
                _, h = schedule[k]
                u = stepper.step(stepper.step(u, h / 2), h / 2)
                k += 1
            outputs.append(u.copy())
        res = [o[:, 0] if vec else o for o in outputs]
        out = res[0] if scalar_t else res
        return (out, {"steps": k, "rejected": 0, "schedule": schedule}) if return_stats else out

    if dt0 is None:
        dt0 = 0.25 / op.max_eigenvalue_bound()
    dt = dt0
    now = 0.0
    n_steps = n_rejected = 0
    taken = []
    for target in times:
        while now < target:
            if n_steps + n_rejected > max_steps:
                raise StepFailure(f"step budget {max_steps} exhausted at t={now:.6g} (target {target:.6g})")
            h = min(dt, target - now)
            if h <= 1e-15 * max(1.0, target):
                raise StepFailure(f"step size underflow at t={now:.6g}")
            big = stepper.step(u, h)
            half = stepper.step(stepper.step(u, h / 2), h / 2)
            scale = np.maximum(_wnorm(op, half), 1e-300)
            err = float(np.max(_wnorm(op, half - big) / scale)) / 3.0
            if err <= tol:
                # no extrapolation: (4 R(h/2)^2 - R(h))/3 -> 5/3 on stiff modes
                u = half
                taken.append((now, h))
                now = target if h == target - now else now + h
                n_steps += 1
                fac = 2.0 if err == 0 else min(2.0, max(0.5, 0.9 * (tol / err) ** (1.0 / 3.0)))
                if h == dt:
                    dt = h * fac
            else:
                n_rejected += 1
                dt = h * max(0.2, 0.9 * (tol / err) ** (1.0 / 3.0))
        outputs.append(u.copy())
    res = [o[:, 0] if vec else o for o in outputs]
    out = res[0] if scalar_t else res
    if return_stats:
        return out, {"steps": n_steps, "rejected": n_rejected, "dt_final": dt, "schedule": taken}
    return out
