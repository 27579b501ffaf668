"""The glued line X~ = (-inf, -1] u [1, inf) with the points -1 and 1 identified.

Points are stored as ``(side, r)`` with ``r = |x| >= 1``.  The signed
coordinate ``s = side * (r - 1)`` is an isometry of ``(X~, rho)`` onto the real
line, so balls, grids and the junction are all handled in ``s``.
The measure is ``dmu = |x|^{d-1} dx``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .specfun import DomainError, DimLike, as_dimension

__all__ = [
    "GluedPoint",
    "Ball",
    "rho",
    "measure_ball",
    "measure_interval",
    "measure_equivalence_constant",
    "doubling_constant",
    "HarmonicFamily",
    "harmonic_eval",
    "h_hat_alpha",
    "GridSpec",
    "HalfGrid",
    "GluedGrid",
    "graded_nodes",
    "parity_split",
    "extend",
    "write_grid_function",
    "read_grid_function",
    "GridError",
]

PLUS = 1
MINUS = -1


class GridError(ValueError):
    """Grid functions that do not fit the grid they are used with."""


def _side(side) -> int:
    if side in (1, "+", "plus", PLUS):
        return PLUS
    if side in (-1, "-", "minus", MINUS):
        return MINUS
    raise DomainError(f"side must be plus or minus, got {side!r}")


@dataclass(frozen=True, eq=False)
class GluedPoint:
    """A point of X~ given by its side and ``r = |x| >= 1``."""

    side: int
    r: float

    def __post_init__(self):
        r = float(self.r)
        if not math.isfinite(r) or r < 1.0:
            raise DomainError(f"|x| must be finite and >= 1, got {self.r}")
        object.__setattr__(self, "side", _side(self.side))
        object.__setattr__(self, "r", r)

    @classmethod
    def from_real(cls, x: float) -> "GluedPoint":
        x = float(x)
        if abs(x) < 1.0 or not math.isfinite(x):
            raise DomainError(f"{x} is not a point of the glued line")
        return cls(PLUS if x > 0 else MINUS, abs(x))

    @classmethod
    def from_signed(cls, s: float) -> "GluedPoint":
        return cls(PLUS if s >= 0 else MINUS, 1.0 + abs(s))

    @property
    def x(self) -> float:
        return self.side * self.r

    @property
    def s(self) -> float:
        return self.side * (self.r - 1.0)

    @property
    def is_junction(self) -> bool:
        return self.r == 1.0

    def __eq__(self, other):
        if not isinstance(other, GluedPoint):
            return NotImplemented
        return self.s == other.s

    def __hash__(self):
        return hash(self.s + 0.0)

    def __neg__(self):
        return GluedPoint(-self.side, self.r)

    def __repr__(self):
        return f"GluedPoint({'+' if self.side > 0 else '-'}{self.r:g})"


def as_point(x) -> GluedPoint:
    return x if isinstance(x, GluedPoint) else GluedPoint.from_real(x)


def signed_coordinate(x):
    """Vectorized ``s = sign(x)(|x| - 1)`` for real ``|x| >= 1``."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * (np.abs(x) - 1.0)


def from_signed_coordinate(s):
    s = np.asarray(s, dtype=float)
    return np.where(s >= 0, 1.0 + s, -(1.0 - s))


def rho(x, y) -> float:
    """Glued distance: ``|x - y|`` on one side and ``|x - y| - 2`` across."""
    return abs(as_point(x).s - as_point(y).s)


@dataclass(frozen=True)
class Ball:
    """``B(center, radius) = {x : rho(x, center) < radius}``."""

    center: GluedPoint
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError(f"ball radius must be positive and finite, got {self.radius}")

    @property
    def s_interval(self):
        c = self.center.s
        return c - self.radius, c + self.radius

    @property
    def wraps(self) -> bool:
        lo, hi = self.s_interval
        return lo < 0.0 < hi

    def segments(self):
        """Traces on each half-line as ``[(side, r_lo, r_hi), ...]``."""
        lo, hi = self.s_interval
        out = []
        if hi > 0:
            out.append((PLUS, 1.0 + max(lo, 0.0), 1.0 + hi))
        if lo < 0:
            out.append((MINUS, 1.0 + max(-hi, 0.0), 1.0 - lo))
        return out

    def contains_signed(self, s):
        lo, hi = self.s_interval
        s = np.asarray(s, dtype=float)
        return (s >= lo) & (s <= hi)


def measure_interval(d: DimLike, a, b):
    """``int_a^b r^{d-1} dr`` for ``1 <= a <= b`` (vectorized, cancellation-safe)."""
    dd = as_dimension(d).d if not isinstance(d, (int, float)) else float(d)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    # a^d/d * (exp(d log(b/a)) - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a**dd / dd * np.expm1(dd * np.log(b / a))
    return np.where(b > a, out, 0.0)


def measure_ball(d: DimLike, ball: Ball) -> float:
    """Exact ``mu(B)`` summed over the half-line traces of ``B``."""
    return float(sum(measure_interval(d, lo, hi) for _, lo, hi in ball.segments()))


def measure_ball_signed(d: DimLike, center_s, radius):
    """Vectorized ``mu(B)`` from signed-coordinate centers."""
    c = np.asarray(center_s, dtype=float)
    r = np.asarray(radius, dtype=float)
    lo, hi = c - r, c + r
    plus = measure_interval(d, 1.0 + np.maximum(lo, 0.0), 1.0 + np.maximum(hi, 0.0))
    minus = measure_interval(d, 1.0 + np.maximum(-hi, 0.0), 1.0 + np.maximum(-lo, 0.0))
    return plus + minus


def measure_equivalence_constant(d: DimLike, n=10_000, seed=0, s_max=1e4, r_range=(1e-4, 1e4)):
    """Empirical ``C`` with ``mu(B(x,r)) / (r (|x|+r)^{d-1}) in [1/C, C]``.

    Returns ``(C, min_ratio, max_ratio)`` over ``n`` random balls with log-uniform
    ``|s|`` and radius.
    """
    dd = as_dimension(d).d
    rng = np.random.default_rng(seed)
    s = np.exp(rng.uniform(np.log(1e-4), np.log(s_max), n)) * rng.choice([-1.0, 1.0], n)
    r = np.exp(rng.uniform(np.log(r_range[0]), np.log(r_range[1]), n))
    m = measure_ball_signed(dd, s, r)
    ratio = m / (r * (np.abs(s) + 1.0 + r) ** (dd - 1.0))
    lo, hi = float(ratio.min()), float(ratio.max())
    return max(hi, 1.0 / lo), lo, hi


def doubling_constant(d: DimLike, n=10_000, seed=1, s_max=1e4):
    """Empirical sup of ``mu(B(x,2r)) / mu(B(x,r))`` over random balls."""
    dd = as_dimension(d).d
    rng = np.random.default_rng(seed)
    s = np.exp(rng.uniform(np.log(1e-4), np.log(s_max), n)) * rng.choice([-1.0, 1.0], n)
    r = np.exp(rng.uniform(np.log(1e-4), np.log(1e4), n))
    return float(np.max(measure_ball_signed(dd, s, 2 * r) / measure_ball_signed(dd, s, r)))


# ---------------------------------------------------------------------------
# harmonic functions


def h_hat_alpha(d: DimLike) -> float:
    """Coefficient of ``h^`` on ``X^ = X~ n [-3, inf)``.

    ``h^ = 1 - alpha r^{2-d}`` on the plus side and
    ``alpha (r^{2-d} - 3^{2-d})`` on the minus side; value and derivative in
    the signed coordinate match at the junction, ``h^(-3) = 0`` and
    ``h^(+inf) = 1``.
    """
    dd = as_dimension(d).d
    return 1.0 / (2.0 - 3.0 ** (2.0 - dd))


def _signed_parts(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) < 1.0) or not np.all(np.isfinite(x)):
        raise DomainError("points must satisfy |x| >= 1")
    return np.sign(x), np.abs(x)


def h_plus(d, x):
    dd = as_dimension(d).d
    sgn, r = _signed_parts(x)
    q = r ** (2.0 - dd) / 2.0
    return np.where(sgn > 0, 1.0 - q, q)


def h_minus(d, x):
    return 1.0 - h_plus(d, x)


def h_D(d, x):
    dd = as_dimension(d).d
    x = np.asarray(x, dtype=float)
    if np.any(x < 1.0):
        raise DomainError("h_D lives on [1, inf)")
    return -np.expm1((2.0 - dd) * np.log(x))


def h_hat_D(d, x):
    sgn, r = _signed_parts(x)
    return np.where(sgn > 0, 1.0, -1.0) * h_D(d, r)


def h_hat_N(d, x):
    _signed_parts(x)
    return np.ones_like(np.asarray(x, dtype=float))


def h_hat(d, x):
    dd = as_dimension(d).d
    sgn, r = _signed_parts(x)
    if np.any((sgn < 0) & (r > 3.0)):
        raise DomainError("h^ lives on [-3, -1] u [1, inf)")
    a = h_hat_alpha(dd)
    q = r ** (2.0 - dd)
    return np.where(sgn > 0, 1.0 - a * q, a * (q - 3.0 ** (2.0 - dd)))


_HARMONIC = {
    "h_plus": h_plus,
    "h+": h_plus,
    "h_minus": h_minus,
    "h-": h_minus,
    "h_hat_D": h_hat_D,
    "h_hat_N": h_hat_N,
    "h_D": h_D,
    "h_N": lambda d, x: np.ones_like(np.asarray(x, dtype=float)),
    "h_hat": h_hat,
}


def harmonic_eval(which: str, d: DimLike, x):
    """Closed-form harmonic functions; ``x`` is a real (or array) with ``|x| >= 1``."""
    try:
        fn = _HARMONIC[which]
    except KeyError:
        raise DomainError(f"unknown harmonic function {which!r}; choose from {sorted(_HARMONIC)}") from None
    if isinstance(x, GluedPoint):
        x = x.x
    out = fn(d, x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class HarmonicFamily:
    """All harmonic functions for one dimension, as callables of a real ``x``."""

    d: float

    def __call__(self, which, x):
        return harmonic_eval(which, self.d, x)

    def h_plus(self, x):
        return h_plus(self.d, x)

    def h_minus(self, x):
        return h_minus(self.d, x)

    def h_hat_D(self, x):
        return h_hat_D(self.d, x)

    def h_hat_N(self, x):
        return h_hat_N(self.d, x)

    def h_D(self, x):
        return h_D(self.d, x)

    def h_hat(self, x):
        return h_hat(self.d, x)

    def comp1_bounds(self, n=20001, r_max=1e6):
        """``(min, max)`` of ``h^`` over ``[-2, -1] u [1, r_max]``."""
        x = np.concatenate([-np.linspace(1.0, 2.0, n), np.geomspace(1.0, r_max, n)])
        v = h_hat(self.d, x)
        return float(v.min()), float(v.max())


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    """Half-line grid: spacing ``h_min`` at the foci growing linearly with
    slope ``grade`` up to ``h_cap`` inside ``r <= r_inner``, then geometric
    growth by ``stretch`` per node out to ``x_max``."""

    h_min: float = 0.02
    grade: float = 0.05
    h_cap: float = 0.1
    r_inner: float = 25.0
    stretch: float = 1.03
    x_max: float = 400.0
    foci: tuple = (1.0,)
    forced: tuple = ()

    def refined(self, factor=2.0) -> "GridSpec":
        """Spacing divided by ``factor`` everywhere (geometric ratio rooted)."""
        return GridSpec(
            h_min=self.h_min / factor,
            grade=self.grade / factor,
            h_cap=self.h_cap / factor,
            r_inner=self.r_inner,
            stretch=self.stretch ** (1.0 / factor),
            x_max=self.x_max,
            foci=self.foci,
            forced=self.forced,
        )

    def with_x_max(self, x_max) -> "GridSpec":
        return GridSpec(self.h_min, self.grade, self.h_cap, self.r_inner, self.stretch, x_max, self.foci, self.forced)


def _spacing(spec: GridSpec, r):
    """Target node spacing ``h(r)`` (vectorized)."""
    r = np.asarray(r, dtype=float)
    if spec.foci:
        dist = np.min(np.abs(r[..., None] - np.asarray(spec.foci, dtype=float)), axis=-1)
    else:
        dist = np.full(r.shape, np.inf)
    h = np.minimum(spec.h_cap, spec.h_min + spec.grade * dist)
    # beyond r_inner, h grows by the factor ``stretch`` from one node to the next
    far = spec.h_cap + (spec.stretch - 1.0) * (r - spec.r_inner)
    return np.where(r > spec.r_inner, np.maximum(h, far), h)


def _fine_mesh(spec: GridSpec, sub=16):
    """Sample points whose local spacing is at most ``h/sub`` everywhere.

    Each piece of ``h`` is affine in ``r``, so the recursion
    ``r_{k+1} = r_k + h(r_k)/sub`` has a closed geometric form on it.
    """
    lo, hi = 1.0, float(spec.x_max)
    pieces = [np.arange(lo, min(hi, spec.r_inner) + spec.h_cap / sub, spec.h_cap / sub)]
    if spec.grade > 0:
        c = spec.h_min / spec.grade
        q = 1.0 + spec.grade / sub
        reach = (spec.h_cap - spec.h_min) / spec.grade
        k = np.arange(int(math.ceil(math.log((reach + c) / c) / math.log(q))) + 2)
        dist = c * (q**k - 1.0)
        for f in spec.foci:
            pieces += [f + dist, f - dist]
    if hi > spec.r_inner and spec.stretch > 1.0:
        c = spec.h_cap / (spec.stretch - 1.0)
        q = 1.0 + (spec.stretch - 1.0) / sub
        k = np.arange(int(math.ceil(math.log((hi - spec.r_inner + c) / c) / math.log(q))) + 2)
        pieces.append(spec.r_inner + c * (q**k - 1.0))
    elif hi > spec.r_inner:
        pieces.append(np.arange(spec.r_inner, hi + spec.h_cap / sub, spec.h_cap / sub))
    fine = np.concatenate(pieces)
    return np.unique(fine[(fine > lo) & (fine < hi)])


def graded_nodes(spec: GridSpec) -> np.ndarray:
    """Nodes ``1 = r_0 < ... < r_{n-1} = x_max`` with every forced point a node.

    Between consecutive anchors the node index is the (rounded-up) integral
    of ``1/h(r)``, so spacing follows ``h`` smoothly and lands on the anchors.
    """
    if spec.x_max <= 1.0:
        raise GridError("x_max must exceed 1")
    if not (0 < spec.h_min <= spec.h_cap) or spec.stretch < 1.0:
        raise GridError("invalid grid spacing parameters")
    anchors = np.array(sorted({1.0, float(spec.x_max), *(float(p) for p in spec.forced if 1.0 < p < spec.x_max)}))
    fine = np.union1d(_fine_mesh(spec), anchors)
    inv_h = 1.0 / _spacing(spec, fine)
    phi = np.concatenate([[0.0], np.cumsum(np.diff(fine) * (inv_h[1:] + inv_h[:-1]) / 2)])
    cut = np.searchsorted(fine, anchors)
    nodes = [np.array([1.0])]
    for i0, i1 in zip(cut[:-1], cut[1:]):
        p0, p1 = phi[i0], phi[i1]
        m = max(1, int(math.ceil(p1 - p0 - 1e-9)))
        seg = np.interp(np.linspace(p0, p1, m + 1), phi[i0:i1 + 1], fine[i0:i1 + 1])
        seg[-1] = fine[i1]
        nodes.append(seg[1:])
    return np.concatenate(nodes)


@dataclass(frozen=True)
class HalfGrid:
    """Nodes on ``[1, x_max]`` with exact finite-volume ``mu`` weights."""

    r: np.ndarray
    d: float

    @classmethod
    def build(cls, d: DimLike, spec: GridSpec) -> "HalfGrid":
        return cls(graded_nodes(spec), as_dimension(d).d)

    @property
    def n(self) -> int:
        return self.r.size

    @property
    def midpoints(self) -> np.ndarray:
        return (self.r[:-1] + self.r[1:]) / 2

    @property
    def cell_edges(self) -> np.ndarray:
        return np.concatenate([[self.r[0]], self.midpoints, [self.r[-1]]])

    @property
    def weights(self) -> np.ndarray:
        e = self.cell_edges
        return measure_interval(self.d, e[:-1], e[1:])

    def index_of(self, r, tol=1e-9) -> int:
        i = int(np.argmin(np.abs(self.r - r)))
        if abs(self.r[i] - r) > tol * max(1.0, abs(r)):
            raise GridError(f"{r} is not a grid node (nearest {self.r[i]})")
        return i


@dataclass(frozen=True)
class GluedGrid:
    """Mirror image of a :class:`HalfGrid` across the junction.

    Node order follows the signed coordinate: index ``j = n - 1`` is the
    junction, indices above it are on the plus side.
    """

    half: HalfGrid

    @property
    def n_half(self) -> int:
        return self.half.n

    @property
    def junction(self) -> int:
        return self.half.n - 1

    @property
    def s(self) -> np.ndarray:
        t = self.half.r - 1.0
        return np.concatenate([-t[:0:-1], t])

    @property
    def x(self) -> np.ndarray:
        return from_signed_coordinate(self.s)

    @property
    def weights(self) -> np.ndarray:
        w = self.half.weights
        return np.concatenate([w[:0:-1], [2.0 * w[0]], w[1:]])

    @property
    def d(self) -> float:
        return self.half.d

    def index_of(self, x, tol=1e-9) -> int:
        p = as_point(x)
        i = self.half.index_of(p.r, tol)
        return self.junction + p.side * i if i else self.junction


def _check_symmetric(grid: GluedGrid, f):
    f = np.asarray(f, dtype=float)
    if f.shape[0] != 2 * grid.n_half - 1:
        raise GridError(f"grid function has {f.shape[0]} nodes, glued grid has {2 * grid.n_half - 1}")
    return f


def parity_split(grid: GluedGrid, f):
    """Even and odd parts ``f_e(x) = (f(x) + f(-x))/2``, ``f_o = f - f_e``."""
    f = _check_symmetric(grid, f)
    flipped = f[::-1]
    fe = (f + flipped) / 2
    return fe, f - fe


def restrict(grid: GluedGrid, f):
    """Plus-side trace (junction included) of a glued grid function."""
    f = _check_symmetric(grid, f)
    return f[grid.junction:]


def extend(grid: GluedGrid, g, parity: str):
    """Even or odd extension of a half-line grid function to the glued grid."""
    g = np.asarray(g, dtype=float)
    if g.shape[0] != grid.n_half:
        raise GridError(f"half-line function has {g.shape[0]} nodes, grid has {grid.n_half}")
    if parity == "even":
        return np.concatenate([g[:0:-1], g])
    if parity == "odd":
        if np.any(g[0] != 0.0):
            g = g.copy()
            g[0] = 0.0
        return np.concatenate([-g[:0:-1], g])
    raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")


def write_grid_function(path, x, values, header: Sequence[str] = ()):
    """CSV with columns ``node, side, value`` (``node`` is ``|x|``)."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["node", "side", "value"])
        for xi, vi in zip(x, values):
            w.writerow([repr(abs(float(xi))), "plus" if xi >= 0 else "minus", repr(float(vi))])


def read_grid_function(path):
    xs, vs = [], []
    with open(path, newline="") as fh:
        rows = (line for line in fh if not line.startswith("#"))
        for row in csv.DictReader(rows):
            sgn = 1.0 if row["side"] == "plus" else -1.0
            xs.append(sgn * float(row["node"]))
            vs.append(float(row["value"]))
    return np.asarray(xs), np.asarray(vs)
