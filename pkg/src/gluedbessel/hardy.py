"""Atoms, the H^1 -> L^1 behavior of the Riesz transforms, and maximal norms.

Three atom flavors are supported:

``CW``
    mean zero, ``int a dmu = 0`` (for ``R_N`` on the half-line).
``hD``
    ``int a h_D dmu = 0`` (for ``R_D`` on the half-line).
``two-harmonic``
    ``int a h_+ dmu = int a h_- dmu = 0`` (for ``R~`` on the glued line).

An atom is a grid function supported in a ball with ``||a||_2 <= mu(B)^{-1/2}``.
Random atoms are drawn as Legendre series with independent normal
coefficients, so the same draw resolves to the same function on any grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .discrete import DiscreteOperator, evolve
from .riesz import apply_glued_riesz, apply_riesz, riesz_kernel
from .space import (
    MINUS,
    PLUS,
    Ball,
    GluedGrid,
    GluedPoint,
    GridSpec,
    HalfGrid,
    h_D,
    h_minus,
    h_plus,
    measure_ball,
    measure_interval,
)
from .specfun import as_dimension

__all__ = [
    "FLAVORS",
    "AtomError",
    "Atom",
    "atom_grid_spec",
    "make_atom",
    "project_out",
    "reverse_holder_check",
    "h1_to_l1_sweep",
    "counterexample_growth",
    "maximal_h1_norm",
    "compare_norms",
    "far_tail_ratio",
]

FLAVORS = ("CW", "hD", "two-harmonic")
OPERATOR = {"CW": "N", "hD": "D", "two-harmonic": "glued"}
LEGENDRE_TERMS = 8
WINDOW = 1e3


class AtomError(ValueError):
    """The ball holds too few grid nodes to carry the cancellation constraints."""


def project_out(values, weights, constraints, passes=2):
    """Remove the ``mu``-weighted projection of ``values`` onto ``span(constraints)``."""
    sw = np.sqrt(weights)
    q, _ = np.linalg.qr(sw[:, None] * constraints)
    v = sw * values
    for _ in range(passes):
        v = v - q @ (q.T @ v)
    return v / sw


def _constraints(flavor, d, x):
    if flavor == "CW":
        return np.ones((x.size, 1))
    if flavor == "hD":
        return np.asarray(h_D(d, x), dtype=float)[:, None]
    if flavor == "two-harmonic":
        return np.column_stack([h_plus(d, x), h_minus(d, x)])
    raise ValueError(f"unknown atom flavor {flavor!r}; expected one of {FLAVORS}")


@dataclass
class Atom:
    flavor: str
    d: float
    ball: Ball
    grid: object
    values: np.ndarray
    seed: int
    raw: np.ndarray = field(repr=False, default=None)

    @property
    def glued(self) -> bool:
        return isinstance(self.grid, GluedGrid)

    @property
    def x(self):
        return self.grid.x if self.glued else self.grid.r

    @property
    def weights(self):
        return self.grid.weights

    @property
    def measure(self) -> float:
        return ball_measure(self.d, self.ball, self.glued)

    def l2_norm(self):
        return float(np.sqrt(np.sum(self.weights * self.values**2)))

    def l1_norm(self):
        return float(np.sum(self.weights * np.abs(self.values)))

    def cancellation_residuals(self):
        c = _constraints(self.flavor, self.d, self.x)
        return np.abs(c.T @ (self.weights * self.values))

    def support_mask(self):
        return ball_mask(self.ball, self.x, self.glued)


def ball_measure(d, ball: Ball, glued: bool) -> float:
    if glued:
        return measure_ball(d, ball)
    lo, hi = half_support(ball)
    return float(measure_interval(d, lo, hi))


def half_support(ball: Ball):
    """``[lo, hi]`` of ``B`` intersected with the half-line ``[1, inf)``."""
    c = ball.center.r
    return max(1.0, c - ball.radius), c + ball.radius


def ball_mask(ball: Ball, x, glued: bool):
    if glued:
        s = np.sign(x) * (np.abs(x) - 1.0)
        return ball.contains_signed(s)
    lo, hi = half_support(ball)
    return (x >= lo) & (x <= hi)


def _ball_endpoints(ball: Ball, glued: bool):
    if glued:
        return sorted({v for _, lo, hi in ball.segments() for v in (lo, hi)})
    return sorted(set(half_support(ball)))


def atom_grid_spec(ball: Ball, glued: bool, x_max=1e5) -> GridSpec:
    """Grid resolving the ball edges with at least ~50 cells across the radius."""
    ends = _ball_endpoints(ball, glued)
    h_min = min(0.02, ball.radius / 50.0)
    top = max(ends)
    return GridSpec(h_min=h_min, grade=0.05, h_cap=min(0.1, max(ball.radius / 10.0, h_min)),
                    r_inner=max(25.0, 2.0 * top), stretch=1.03, x_max=x_max,
                    foci=tuple(sorted({1.0, *ends})), forced=tuple(v for v in ends if v > 1.0))


def _draw(ball: Ball, x, glued, seed):
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal(LEGENDRE_TERMS)
    s = np.sign(x) * (np.abs(x) - 1.0) if glued else x - 1.0
    t = np.clip((s - ball.center.s) / ball.radius, -1.0, 1.0)
    return np.polynomial.legendre.legval(t, coef)


def make_atom(flavor, d, ball: Ball, seed, grid=None, spec: GridSpec | None = None, project=True) -> Atom:
    """Random atom of the given flavor on ``ball``; deterministic given ``seed``.

    ``project=False`` skips the cancellation projection (a control bump with
    the same size normalization).
    """
    dd = as_dimension(d).d
    glued = flavor == "two-harmonic" if grid is None else isinstance(grid, GluedGrid)
    if not glued and ball.center.side != PLUS:
        raise ValueError("half-line atoms need a ball centered on the plus side")
    if grid is None:
        half = HalfGrid.build(dd, spec or atom_grid_spec(ball, glued))
        grid = GluedGrid(half) if glued else half
    x = grid.x if glued else grid.r
    w = grid.weights
    mask = ball_mask(ball, x, glued)
    n_con = 2 if flavor == "two-harmonic" else 1
    if int(mask.sum()) < n_con + 1:
        raise AtomError(f"ball {ball} holds {int(mask.sum())} grid nodes; need at least {n_con + 1}")
    raw = _draw(ball, x[mask], glued, seed)
    vals = project_out(raw, w[mask], _constraints(flavor, dd, x[mask])) if project else raw
    mu = ball_measure(dd, ball, glued)
    norm = math.sqrt(np.sum(w[mask] * vals**2))
    if norm == 0.0:
        raise AtomError("projected draw vanished")
    out = np.zeros(x.size)
    out[mask] = vals / (norm * math.sqrt(mu))
    full_raw = np.zeros(x.size)
    full_raw[mask] = raw
    return Atom(flavor, dd, ball, grid, out, int(seed), full_raw)


# ---------------------------------------------------------------------------
# reverse Hoelder


@dataclass
class ReverseHolderReport:
    d: float
    n: int
    constant: float
    constant_half: float
    constant_reseeded: float
    far_max: float
    worst: tuple

    @property
    def change(self):
        return abs(self.constant_reseeded / self.constant - 1.0)

    @property
    def passed(self):
        return math.isfinite(self.constant) and self.change <= 0.10 and self.far_max <= 2.0


def hD_interval_ratio(d, a, b):
    """``sup_[a,b] h_D / (mu([a,b])^{-1} int_a^b h_D dmu)`` for arrays ``a < b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # int h_D dmu = int (x^{d-1} - x) dx, with x^{d-1} - x = x expm1((d-2) log x);
    # 32-point Gauss-Legendre in log x is exact to round-off on these ranges
    t, w = np.polynomial.legendre.leggauss(32)
    la, lb = np.log(a)[:, None], np.log(b)[:, None]
    u = (la + lb) / 2 + (lb - la) / 2 * t
    x = np.exp(u)
    integrand = x * np.expm1((d - 2.0) * u) * x  # extra x from dx = x du
    num = ((lb - la) / 2 * (integrand @ w[:, None]))[:, 0]
    mu = measure_interval(d, a, b)
    return np.asarray(h_D(d, b)) * mu / num


def reverse_holder_check(d=3.0, n=10_000, seed=0, lo=1.0, hi=1e3) -> ReverseHolderReport:
    """Reverse Hoelder constant of ``h_D`` over random intervals in ``[lo, hi]``."""
    dd = as_dimension(d).d

    def sample(k, s):
        rng = np.random.default_rng(s)
        e = np.exp(rng.uniform(math.log(lo), math.log(hi), size=(k, 2)))
        e.sort(axis=1)
        keep = e[:, 1] > e[:, 0] * (1 + 1e-12)
        return e[keep, 0], e[keep, 1]

    a, b = sample(n, seed)
    r = hD_interval_ratio(dd, a, b)
    i = int(np.argmax(r))
    a2, b2 = sample(n, seed + 1)
    r2 = hD_interval_ratio(dd, a2, b2)
    far = a >= 2.0
    return ReverseHolderReport(dd, int(a.size), float(r[i]), float(np.max(r[: a.size // 2])),
                               float(np.max(r2)), float(np.max(r[far])) if far.any() else math.nan,
                               (float(a[i]), float(b[i])))


# ---------------------------------------------------------------------------
# H^1 -> L^1


def _window_l1(atom_or_grid, values, glued, window):
    grid = atom_or_grid
    x = grid.x if glued else grid.r
    w = grid.weights
    inside = np.abs(x) <= window
    return np.sum(w[inside, None] * np.abs(values[inside].reshape(inside.sum(), -1)), axis=0)


def riesz_image(atom: Atom, extra=None):
    """Riesz transform matching the atom flavor, applied to the atom (and extra columns)."""
    cols = atom.values if extra is None else np.column_stack([atom.values, *extra])
    if atom.glued:
        return apply_glued_riesz(atom.d, atom.grid, cols)
    return apply_riesz(OPERATOR[atom.flavor], atom.d, atom.grid, cols)


class FarField:
    """``int |R f| dmu`` beyond the grid window by kernel integration against ``f``.

    ``f`` enters only through its moments against Lagrange polynomials in
    ``log y`` at ``p`` Chebyshev nodes per half-line trace, so the kernel
    table is reused when the same function is resampled on a finer grid.
    ``kind`` is ``'N'``, ``'D'`` or ``'glued'``; ``traces`` are
    ``(side, lo, hi)`` pieces of the support and ``x_edges`` the panels in
    ``|x|`` (Gauss-Legendre in ``log x`` on each).
    """

    def __init__(self, kind, d, traces, x_edges, p=6, n_x=8, rtol=1e-8, panel_width=1.0):
        self.kind, self.d = kind, float(d)
        self.glued = kind == "glued"
        t, wt = np.polynomial.legendre.leggauss(n_x)
        lx = np.log(np.asarray(x_edges, dtype=float))
        self.n_panels = lx.size - 1
        self.u = ((lx[:-1, None] + lx[1:, None]) / 2 + (lx[1:, None] - lx[:-1, None]) / 2 * t).ravel()
        self.wu = ((lx[1:, None] - lx[:-1, None]) / 2 * wt).ravel()
        xs = np.exp(self.u)
        cheb = np.cos(np.pi * (np.arange(p) + 0.5) / p)
        # each trace is cut into panels of width <= panel_width in log y
        self.traces = []
        for side, lo, hi in traces:
            m = max(1, int(math.ceil((math.log(hi) - math.log(lo)) / panel_width)))
            e = np.exp(np.linspace(math.log(lo), math.log(hi), m + 1))
            e[0], e[-1] = lo, hi
            self.traces += [(side, float(a), float(b)) for a, b in zip(e[:-1], e[1:])]
        self.nodes = []
        self.table = {}
        kinds = ("N", "D") if self.glued else (kind,)
        for ti, (_, lo, hi) in enumerate(self.traces):
            ly = (math.log(lo) + math.log(hi)) / 2 + (math.log(hi) - math.log(lo)) / 2 * cheb
            self.nodes.append(ly)
            y = np.exp(ly)
            for bc in kinds:
                self.table[(ti, bc)] = np.array([[riesz_kernel(bc, d, x, yy, rtol=rtol) for yy in y] for x in xs])

    @classmethod
    def for_ball(cls, flavor, d, ball: Ball, window=WINDOW, span=12.0, **kw):
        if flavor == "two-harmonic":
            traces = ball.segments()
        else:
            traces = [(PLUS, *half_support(ball))]
        return cls(OPERATOR[flavor], d, traces, [window, window * math.exp(span)], **kw)

    def _moments(self, grid, values):
        x = grid.x if self.glued else grid.r
        w = grid.weights
        out = []
        ends = {}
        for side, lo, hi in self.traces:
            ends[side] = max(ends.get(side, 0.0), hi)
        for (side, lo, hi), ly in zip(self.traces, self.nodes):
            r = side * x
            if self.glued:
                r = r.copy()
                r[grid.junction] = 1.0
            top = (r <= hi + 1e-12) if hi == ends[side] else (r < hi)
            on = (r >= lo - 1e-12) & top
            wv = w[on] * values[on]
            if self.glued and lo == 1.0:
                # the junction node belongs to both traces; split its weight
                wv[np.flatnonzero(on) == grid.junction] *= 0.5
            lx = np.log(np.abs(x[on]))
            basis = np.ones((ly.size, lx.size))
            for j in range(ly.size):
                for m in range(ly.size):
                    if m != j:
                        basis[j] *= (lx - ly[m]) / (ly[j] - ly[m])
            out.append(basis @ wv)
        return out

    def panels(self, grid, values):
        """L1 contribution of each x-panel (both ends of the glued line summed)."""
        mom = self._moments(grid, values)
        xs = np.exp(self.u)
        f_all = np.zeros(xs.size)
        for xside in ((PLUS, MINUS) if self.glued else (PLUS,)):
            ra = np.zeros(xs.size)
            for ti, (side, _, _) in enumerate(self.traces):
                if self.glued:
                    sgn = 1.0 if side == xside else -1.0
                    k = 0.5 * (self.table[(ti, "N")] + sgn * self.table[(ti, "D")])
                else:
                    k = self.table[(ti, self.kind)]
                ra += k @ mom[ti]
            f_all += np.abs(ra) * xs**self.d
        contrib = (self.wu * f_all).reshape(self.n_panels, -1).sum(axis=1)
        return contrib, f_all

    def norm(self, grid, values):
        """Far-field L1 norm and the last-node integrand (remainder scale)."""
        contrib, f_all = self.panels(grid, values)
        return float(contrib.sum()), float(f_all[-1])


@dataclass
class SweepReport:
    which: str
    d: float
    n_atoms: int
    norms: np.ndarray
    norms_fine: np.ndarray
    control: np.ndarray
    far: np.ndarray
    remainder: float
    failures: list
    centers: np.ndarray
    radii: np.ndarray

    @property
    def max_norm(self):
        return float(np.nanmax(self.norms))

    @property
    def max_norm_fine(self):
        return float(np.nanmax(self.norms_fine))

    @property
    def refinement_change(self):
        return abs(self.max_norm_fine / self.max_norm - 1.0)

    @property
    def half_sample_change(self):
        half = float(np.nanmax(self.norms[: self.n_atoms // 2]))
        return abs(self.max_norm / half - 1.0)

    @property
    def control_median(self):
        return float(np.nanmedian(self.control))

    @property
    def separation(self):
        """Median control norm over the largest atom norm."""
        return self.control_median / self.max_norm

    @property
    def passed(self):
        return (math.isfinite(self.max_norm) and self.refinement_change <= 0.10
                and self.separation >= 10.0 and not self.failures)

    def summary(self):
        q = np.nanpercentile(self.norms, [50, 90, 100])
        return {
            "which": self.which, "d": self.d, "n_atoms": self.n_atoms,
            "max": self.max_norm, "max_fine": self.max_norm_fine,
            "refinement_change": self.refinement_change, "half_sample_change": self.half_sample_change,
            "median": float(q[0]), "p90": float(q[1]),
            "control_median": self.control_median, "control_min": float(np.nanmin(self.control)),
            "separation": self.separation, "far_max": float(np.nanmax(self.far)),
            "remainder": self.remainder, "failures": len(self.failures), "passed": self.passed,
        }


def sample_balls(which, n, seed, centers=(1.0, 1e2), radii=(0.05, 50.0)):
    """Seeded ball ensemble: log-uniform centers and radii; random side on the glued line."""
    rng = np.random.default_rng(seed)
    c = np.exp(rng.uniform(math.log(centers[0]), math.log(centers[1]), n))
    r = np.exp(rng.uniform(math.log(radii[0]), math.log(radii[1]), n))
    side = rng.choice([PLUS, MINUS], n) if which == "two-harmonic" else np.full(n, PLUS)
    seeds = rng.integers(0, 2**63 - 1, n)
    return [Ball(GluedPoint(int(sd), float(cc)), float(rr)) for sd, cc, rr in zip(side, c, r)], seeds


def h1_to_l1_sweep(which="two-harmonic", d=3.0, n_atoms=200, seed=0, window=WINDOW, refine=True,
                   progress=None) -> SweepReport:
    """``||R a||_1`` over a seeded atom ensemble of one flavor, with controls.

    Each atom is paired with the unprojected draw on the same ball (the
    control bump).  Atom norms include the far field beyond ``window``;
    control norms are measured on ``|x| <= window``.
    """
    if which not in FLAVORS:
        raise ValueError(f"unknown flavor {which!r}")
    dd = as_dimension(d).d
    glued = which == "two-harmonic"
    balls, seeds = sample_balls(which, n_atoms, seed)
    norms = np.full(n_atoms, np.nan)
    fine = np.full(n_atoms, np.nan)
    control = np.full(n_atoms, np.nan)
    far = np.full(n_atoms, np.nan)
    rem = 0.0
    failures = []
    for i, (ball, sd) in enumerate(zip(balls, seeds)):
        try:
            spec = atom_grid_spec(ball, glued)
            atom = make_atom(which, dd, ball, sd, spec=spec)
            ctl = make_atom(which, dd, ball, sd, grid=atom.grid, project=False)
            img = riesz_image(atom, [ctl.values])
            near = _window_l1(atom.grid, img, glued, window)
            ff = FarField.for_ball(which, dd, ball, window)
            far_i, rem_i = ff.norm(atom.grid, atom.values)
            norms[i] = near[0] + far_i
            control[i] = near[1]
            far[i] = far_i
            rem = max(rem, rem_i)
            if refine:
                atom2 = make_atom(which, dd, ball, sd, spec=spec.refined(2.0))
                img2 = riesz_image(atom2)
                fine[i] = _window_l1(atom2.grid, img2, glued, window)[0] + ff.norm(atom2.grid, atom2.values)[0]
        except (ValueError, ArithmeticError, RuntimeError) as exc:
            failures.append((i, repr(exc)))
        if progress:
            progress(i, n_atoms)
    if not refine:
        fine = norms.copy()
    return SweepReport(which, dd, n_atoms, norms, fine, control, far, rem, failures,
                       np.array([b.center.x for b in balls]), np.array([b.radius for b in balls]))


def far_tail_ratio(d=3.0, center=20.0, radii=(0.1, 0.3, 1.0, 3.0), seed=0):
    """``||R_D a||_{L1((5B)^c)}`` over ``r int_{|x-y0|>5r} |x-y0|^{-2} dx`` for hD-atoms."""
    dd = as_dimension(d).d
    rows = []
    for r in radii:
        ball = Ball(GluedPoint(PLUS, center), r)
        atom = make_atom("hD", dd, ball, seed)
        img = riesz_image(atom)
        x = atom.grid.r
        out = (np.abs(x - center) > 5 * r) & (x <= WINDOW)
        tail = float(np.sum(atom.weights[out] * np.abs(img[out])))
        tail += FarField.for_ball("hD", dd, ball).norm(atom.grid, atom.values)[0]
        lo = max(1.0, center - 5 * r)
        # r * (int_1^{y0-5r} + int_{y0+5r}^inf) |x-y0|^{-2} dx
        shape = r * ((1.0 / (5 * r) - 1.0 / (center - 1.0)) if lo > 1.0 else 0.0) + r / (5 * r)
        rows.append({"radius": r, "tail": tail, "shape": shape, "ratio": tail / shape})
    return rows


# ---------------------------------------------------------------------------
# the counterexample


@dataclass
class GrowthReport:
    M: list
    norms: list
    slope: float
    intercept: float
    r2: float
    contrast: list
    contrast_slope: float
    odd_defect: float

    @property
    def passed(self):
        return self.slope > 0 and self.r2 >= 0.9


def _line_fit(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return float(coef[0]), float(coef[1]), float(r2)


def _two_interval_grid(d, x_max=1e5):
    spec = GridSpec(h_min=0.005, grade=0.05, h_cap=0.05, r_inner=30.0, stretch=1.03, x_max=x_max,
                    foci=(1.0, 2.0, 3.0), forced=(2.0, 3.0))
    return GluedGrid(HalfGrid.build(d, spec))


def counterexample_growth(d=3.0, M_list=(10.0, 1e2, 1e3, 1e4), near_edge=10.0, seed=0) -> GrowthReport:
    """``||R~ g||_{L1(|x| <= M)}`` for ``g = 1_[2,3] - 1_[-3,-2]`` (normalized), against log M.

    Inside ``|x| <= near_edge`` the transform comes from the grid operator;
    beyond it from kernel integration.  The contrast function is a
    two-harmonic atom supported on the same two intervals.
    """
    dd = as_dimension(d).d
    grid = _two_interval_grid(dd)
    x, w = grid.x, grid.weights
    on = (np.abs(x) >= 2.0) & (np.abs(x) <= 3.0)
    g = np.where(on, np.sign(x), 0.0)
    g /= math.sqrt(np.sum(w * g**2) * np.sum(w[on]))
    coef = np.random.default_rng(seed).standard_normal(LEGENDRE_TERMS)
    raw = np.polynomial.legendre.legval((np.abs(x[on]) - 2.5) / 0.5, coef) * np.sign(x[on])
    c = project_out(raw, w[on], _constraints("two-harmonic", dd, x[on]))
    h = np.zeros_like(x)
    h[on] = c
    h /= math.sqrt(np.sum(w * h**2) * np.sum(w[on]))
    img = apply_glued_riesz(dd, grid, np.column_stack([g, h]))
    inside = np.abs(x) <= near_edge
    near = np.sum(w[inside, None] * np.abs(img[inside]), axis=0)
    odd_defect = float(np.max(np.abs(img[:, 0] + img[::-1, 0])) / np.max(np.abs(img[:, 0])))
    edges = [near_edge] + [M for M in M_list if M > near_edge]
    ff = FarField("glued", dd, [(PLUS, 2.0, 3.0), (MINUS, 2.0, 3.0)], edges, p=8)
    fg = np.concatenate([[0.0], np.cumsum(ff.panels(grid, g)[0])])
    fh = np.concatenate([[0.0], np.cumsum(ff.panels(grid, h)[0])])
    k = [int(np.sum(np.asarray(edges[1:]) <= M)) for M in M_list]
    norms = [float(near[0] + fg[j]) for j in k]
    contrast = [float(near[1] + fh[j]) for j in k]
    logs = np.log(M_list)
    slope, icpt, r2 = _line_fit(logs, norms)
    cslope, _, _ = _line_fit(logs, contrast)
    return GrowthReport(list(M_list), norms, slope, icpt, r2, contrast, cslope, odd_defect)


# ---------------------------------------------------------------------------
# maximal function


def dyadic_times(t_min=1e-4, t_max=1e4, per_octave=4):
    k0 = math.floor(per_octave * math.log2(t_min))
    k1 = math.ceil(per_octave * math.log2(t_max))
    return 2.0 ** (np.arange(k0, k1 + 1) / per_octave)


def maximal_function(d, grid: GluedGrid, f, t_grid=None, tol=1e-6):
    """``sup_t |T_t f|`` pointwise on the glued grid (``t = 0`` included)."""
    t_grid = dyadic_times() if t_grid is None else np.asarray(t_grid, float)
    op = DiscreteOperator.glued(grid)
    f = np.asarray(f, dtype=float)
    sol = evolve(op, list(t_grid), f[1:-1], tol=tol)
    m = np.abs(f).copy()
    for u in sol:
        m[1:-1] = np.maximum(m[1:-1], np.abs(u))
    return m


def maximal_h1_norm(d, grid: GluedGrid, f, t_grid=None, window=None, tol=1e-6):
    """``||sup_t |T_t f| ||_{L1}`` (over ``|x| <= window`` when given); columns allowed."""
    m = maximal_function(d, grid, f, t_grid, tol)
    x, w = grid.x, grid.weights
    inside = np.ones(x.size, bool) if window is None else np.abs(x) <= window
    return np.sum(w[inside].reshape((-1,) + (1,) * (m.ndim - 1)) * m[inside], axis=0)


@dataclass
class NormComparison:
    d: float
    ratios: np.ndarray
    windows: tuple
    atom_by_window: np.ndarray
    control_by_window: np.ndarray
    sum_ratio: float
    t_refine_change: float

    @property
    def constant(self):
        return float(np.max(self.ratios))

    @property
    def atom_growth(self):
        return float(np.max(self.atom_by_window[-1] / self.atom_by_window[0]))

    @property
    def control_growth(self):
        return float(np.median(self.control_by_window[-1] / self.control_by_window[0]))

    @property
    def tail_separation(self):
        """Median control mass over median atom mass between the first and last window."""
        atom = np.median(self.atom_by_window[-1] - self.atom_by_window[0])
        ctrl = np.median(self.control_by_window[-1] - self.control_by_window[0])
        return float(ctrl / atom)

    @property
    def passed(self):
        return (math.isfinite(self.constant) and self.sum_ratio <= self.constant
                and self.t_refine_change <= 0.10 and self.tail_separation >= 2.0)

    def summary(self):
        return {"constant": self.constant, "tail_separation": self.tail_separation, "sum_ratio": self.sum_ratio,
                "t_refine_change": self.t_refine_change, "atom_growth": self.atom_growth,
                "control_growth": self.control_growth, "d": self.d, "n_atoms": int(self.ratios.size),
                "passed": self.passed}


def compare_norms(d=3.0, n_atoms=100, seed=0, windows=(10.0, 30.0, 100.0), t_grid=None) -> NormComparison:
    """Maximal-function norms of two-harmonic atoms near the junction, with CW controls.

    Atoms have atomic norm <= 1, so the maximal norm itself is the ratio.
    The control is the mean-zero projection of the same draw, which keeps
    ``int f dmu = 0`` but not ``int f h_D^ dmu = 0``.
    """
    dd = as_dimension(d).d
    t_grid = dyadic_times() if t_grid is None else t_grid
    spec = GridSpec(h_min=0.02, grade=0.05, h_cap=0.1, r_inner=30.0, stretch=1.04, x_max=2e3)
    grid = GluedGrid(HalfGrid.build(dd, spec))
    rng = np.random.default_rng(seed)
    atoms, ctrls = [], []
    while len(atoms) < n_atoms:
        c = float(rng.uniform(-6.0, 6.0))
        r = float(np.exp(rng.uniform(math.log(0.3), math.log(4.0))))
        ball = Ball(GluedPoint.from_signed(c), r)
        sd = int(rng.integers(0, 2**63 - 1))
        try:
            atoms.append(make_atom("two-harmonic", dd, ball, sd, grid=grid).values)
            ctrls.append(make_atom("CW", dd, ball, sd, grid=grid).values)
        except ValueError:
            continue
    A = np.column_stack(atoms)
    Cm = np.column_stack(ctrls)
    m_atoms = maximal_function(dd, grid, A, t_grid)
    m_ctrl = maximal_function(dd, grid, Cm, t_grid)
    x, w = grid.x, grid.weights

    def win(m, W):
        inside = np.abs(x) <= W
        return np.sum(w[inside, None] * m[inside], axis=0)

    ratios = win(m_atoms, max(windows))
    atom_w = np.array([win(m_atoms, W) for W in windows])
    ctrl_w = np.array([win(m_ctrl, W) for W in windows])
    lam = rng.standard_normal((n_atoms, 5))
    sums = A @ lam
    m_sums = win(maximal_function(dd, grid, sums, t_grid), max(windows))
    sum_ratio = float(np.max(m_sums / np.sum(np.abs(lam), axis=0)))
    finer = dyadic_times(per_octave=8)
    m8 = win(maximal_function(dd, grid, A[:, :10], finer), max(windows))
    change = float(np.max(np.abs(m8 / ratios[:10] - 1.0)))
    return NormComparison(dd, ratios, tuple(windows), atom_w, ctrl_w, sum_ratio, change)
