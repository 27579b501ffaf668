"""Monte Carlo for the Bessel diffusion on the half-line and the glued line.

The generator ``L = -d^2/dx^2 - (d-1)/x d/dx`` corresponds to the SDE

    dX = sqrt(2) dW + (d - 1)/X dt,

so the ``sqrt(2)`` in the noise is forced by the normalization of ``L``
(``e^{-tL}`` is the transition semigroup).  Paths live in the radius
``r = |x| >= 1``; the glued process additionally carries a side, resampled
uniformly at every passage through the junction ``r = 1``.

The stepping loop is compiled (``_core``) when the extension is built and
falls back to a vectorized numpy version (``_fallback``) otherwise; both
produce the same paths from the same counter-based random stream.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ..specfun import as_dimension

if os.environ.get("GLUEDBESSEL_PURE_PYTHON"):
    from . import _fallback as _backend
else:
    try:
        from . import _core as _backend
    except ImportError:  # extension not built
        from . import _fallback as _backend

from . import _fallback

__all__ = [
    "BACKEND",
    "RNG_ALGORITHM",
    "OCCUPATION_DT",
    "ProcessConfig",
    "PathEnsemble",
    "ExitStats",
    "SurvivalStats",
    "HittingReport",
    "OccupationReport",
    "simulate",
    "exit_probability",
    "survival_probability",
    "pde_survival",
    "side_frequency",
    "hitting_histogram",
    "occupation_histogram",
    "concentration_fraction",
    "step_size_check",
    "get_backend",
]

BACKEND = _backend.BACKEND
RNG_ALGORITHM = "Philox4x32-10, key = seed, counter = (step, path_lo, path_hi, 0)"
BOUNDARIES = {"reflect": 0, "kill": 1, "glue": 2}

# base step for time-resolved laws (occupation); exit events tolerate the default
OCCUPATION_DT = 2.5e-4

# status codes returned by the steppers
RUNNING_OUT, ESCAPED, KILLED, CENSORED = 0, 1, 2, 3


def get_backend(name=None):
    """Stepper module: ``'cython'``, ``'numpy'`` or ``None`` for the default."""
    if name is None:
        return _backend
    if name == "numpy":
        return _fallback
    if name == "cython":
        from . import _core

        return _core
    raise ValueError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class ProcessConfig:
    """Simulation settings.

    ``dt`` is the base step: away from the junction a step is
    ``dt * r^(2 + growth)``; near it the step is at most ``(r - 1)^2 / 4``
    and never below ``dt_min``.  ``growth > 0`` coarsens the far field,
    whose influence on exit events decays like ``r^(2-d)``.  Paths stop at
    ``t_max``, at ``r >= r_escape``, when killed, or after ``max_steps``
    (censored).
    """

    d: float = 3.0
    dt: float = 4e-3
    growth: float = 0.5
    dt_min: float = 1e-6
    n_paths: int = 100_000
    seed: int = 0
    t_max: float = math.inf
    r_escape: float = 1e3
    boundary: str = "glue"
    max_steps: int = 1_000_000
    chunk: int = 1 << 15
    workers: int = 1

    def __post_init__(self):
        dd = as_dimension(self.d).d
        if dd <= 2.0:
            raise ValueError("the simulation needs a transient dimension d > 2")
        object.__setattr__(self, "d", dd)
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {sorted(BOUNDARIES)}, got {self.boundary!r}")
        if not (self.dt > 0 and 0 < self.dt_min <= 0.25):
            raise ValueError("dt and dt_min must be positive (dt_min <= 1/4)")
        if self.n_paths < 1 or self.chunk < 1 or self.workers < 1:
            raise ValueError("n_paths, chunk and workers must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.growth < 0:
            raise ValueError("growth must be nonnegative")
        if not (self.t_max > 0 and self.r_escape > 1):
            raise ValueError("t_max must be positive and r_escape > 1")

    def with_(self, **kw) -> "ProcessConfig":
        return replace(self, **kw)

    def echo(self) -> dict:
        return {"d": self.d, "dt": self.dt, "dt_min": self.dt_min, "growth": self.growth,
                "n_paths": self.n_paths, "seed": self.seed, "t_max": self.t_max, "r_escape": self.r_escape, "boundary": self.boundary,
                "max_steps": self.max_steps, "backend": BACKEND, "rng": RNG_ALGORITHM}


@dataclass
class PathEnsemble:
    """Terminal states of a path ensemble; ``x = side * r``."""

    config: ProcessConfig
    x0: float
    side: np.ndarray
    r: np.ndarray
    t: np.ndarray
    status: np.ndarray
    first_hit: np.ndarray
    n_hits: np.ndarray
    n_plus: np.ndarray
    steps: np.ndarray
    backend: str

    @property
    def x(self) -> np.ndarray:
        return self.side * self.r

    @property
    def n(self) -> int:
        return self.r.size

    def count(self, status) -> int:
        return int(np.count_nonzero(self.status == status))

    @property
    def n_censored(self) -> int:
        return self.count(CENSORED)


def _start(config: ProcessConfig, x0):
    x0 = float(x0)
    r0 = abs(x0)
    if r0 < 1.0:
        raise ValueError(f"x0 = {x0} is not in the state space (|x0| >= 1)")
    if config.boundary != "glue" and x0 < 0:
        raise ValueError("half-line processes start on the plus side")
    return r0, (1 if x0 >= 0 else -1)


def simulate(config: ProcessConfig, x0, backend=None) -> PathEnsemble:
    """Run ``config.n_paths`` paths from ``x0``; deterministic per (seed, path index).

    Chunks run on ``config.workers`` threads (the compiled loop releases the
    GIL); the result does not depend on the number of workers.
    """
    mod = get_backend(backend)
    r0, side0 = _start(config, x0)

    def run(off):
        m = min(config.chunk, config.n_paths - off)
        return mod.run_paths(config.d, r0, side0, m, off, int(config.seed), config.dt, config.dt_min,
                             BOUNDARIES[config.boundary], config.r_escape, config.t_max,
                             int(config.max_steps), config.growth)

    offsets = range(0, config.n_paths, config.chunk)
    if config.workers > 1 and len(offsets) > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            parts = list(pool.map(run, offsets))
    else:
        parts = [run(off) for off in offsets]
    out = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    return PathEnsemble(config, float(x0), out["side"].astype(np.int8), out["r"], out["t"], out["status"],
                        out["first_hit"], out["n_hits"], out["n_plus"], out["steps"], mod.BACKEND)


def _se(p, n):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n) if n else math.nan


def _escape_before_junction(d, r, R):
    """Probability that the radial diffusion from ``r`` reaches ``R`` before ``1``."""
    return -math.expm1((2.0 - d) * math.log(r)) / -math.expm1((2.0 - d) * math.log(R))


# ---------------------------------------------------------------------------
# exit and survival


@dataclass
class ExitStats:
    """Exit through ``+R`` versus ``-R`` on the glued line."""

    n_exit_plus: int
    n_exit_minus: int
    n_censored: int
    estimate: float
    se: float
    expected: float
    expected_finite: float
    x0: float
    d: float
    r_escape: float

    @property
    def n_eff(self):
        return self.n_exit_plus + self.n_exit_minus

    @property
    def truncation(self):
        """Bias of the finite barrier: ``P(+R before -R) - h_+(x0)``."""
        return self.expected_finite - self.expected

    @property
    def z(self):
        return (self.estimate - self.expected) / self.se if self.se > 0 else math.inf

    @property
    def censor_rate(self):
        return self.n_censored / max(self.n_eff + self.n_censored, 1)

    @property
    def censor_flag(self):
        return self.censor_rate > 0.01

    @property
    def passed(self):
        return abs(self.estimate - self.expected) <= 3.0 * self.se and not self.censor_flag


def _h_plus(d, x0):
    q = abs(x0) ** (2.0 - d) / 2.0
    return 1.0 - q if x0 > 0 else q


def exit_probability(config: ProcessConfig, x0, r_escape=None, backend=None) -> ExitStats:
    """Probability of reaching ``+R`` before ``-R``, compared with ``h_+(x0)``."""
    cfg = config.with_(boundary="glue", t_max=math.inf, r_escape=r_escape or config.r_escape)
    ens = simulate(cfg, x0, backend)
    esc = ens.status == ESCAPED
    n_plus = int(np.count_nonzero(esc & (ens.side > 0)))
    n_minus = int(np.count_nonzero(esc & (ens.side < 0)))
    n_eff = n_plus + n_minus
    p = n_plus / n_eff if n_eff else math.nan
    d, R = cfg.d, cfg.r_escape
    h = _h_plus(d, x0) if abs(x0) > 1.0 else 0.5
    # finite barrier: own side first with prob q, otherwise a fair coin at the junction
    q = _escape_before_junction(d, abs(x0), R) if abs(x0) > 1.0 else 0.0
    fin = q + (1.0 - q) / 2.0 if x0 > 1.0 else (1.0 - q) / 2.0
    return ExitStats(n_plus, n_minus, ens.count(CENSORED), p, _se(p, n_eff), h, fin, float(x0), d, R)


@dataclass
class SurvivalStats:
    """Killed-process survival against ``h_D`` (``t_max = inf``) or the Dirichlet heat flow."""

    n_survived: int
    n_killed: int
    n_censored: int
    estimate: float
    se: float
    expected: float
    expected_finite: float
    t: float

    @property
    def z(self):
        return (self.estimate - self.expected) / self.se if self.se > 0 else math.inf

    @property
    def passed(self):
        return abs(self.estimate - self.expected) <= 3.0 * self.se


def pde_survival(d, x0, t, tol=1e-8):
    """``int T_{t,D}(x0, y) dmu(y)`` by evolving the constant 1 under the Dirichlet operator."""
    from ..discrete import DiscreteOperator, evolve
    from ..space import GridSpec, HalfGrid

    x_max = max(400.0, abs(x0) + 40.0 * math.sqrt(t) + 10.0)
    spec = GridSpec(h_min=0.005, h_cap=0.05, x_max=x_max, forced=(float(x0),))
    op = DiscreteOperator.half_line(HalfGrid.build(d, spec), "dirichlet")
    u = evolve(op, t, np.ones(op.n), tol=tol)
    return float(u[op.index_of(float(x0))])


def survival_probability(config: ProcessConfig, x0, t=math.inf, backend=None) -> SurvivalStats:
    """Fraction of killed paths not absorbed at the junction by time ``t``.

    With ``t = inf`` reaching ``r_escape`` counts as survival and the target
    is ``h_D(x0)``; the finite-barrier value is reported alongside.
    """
    cfg = config.with_(boundary="kill", t_max=t)
    ens = simulate(cfg, x0, backend)
    killed = ens.count(KILLED)
    cens = ens.count(CENSORED)
    n = ens.n - cens
    surv = n - killed
    p = surv / n if n else math.nan
    d = cfg.d
    if math.isinf(t):
        expected = -math.expm1((2.0 - d) * math.log(x0))
        finite = _escape_before_junction(d, x0, cfg.r_escape)
    else:
        expected = finite = pde_survival(d, x0, t)
    return SurvivalStats(surv, killed, cens, p, _se(p, n), expected, finite, t)


@dataclass
class SideFrequency:
    n_hits: int
    n_plus: int

    @property
    def frequency(self):
        return self.n_plus / self.n_hits

    @property
    def se(self):
        return _se(0.5, self.n_hits)

    @property
    def passed(self):
        return abs(self.frequency - 0.5) <= 3.0 * self.se


def side_frequency(ens: PathEnsemble) -> SideFrequency:
    """Fraction of junction passages followed by a plus-side excursion."""
    return SideFrequency(int(ens.n_hits.sum()), int(ens.n_plus.sum()))


# ---------------------------------------------------------------------------
# hitting times


@dataclass
class HittingReport:
    """Hitting times of the junction against the comparison density shape."""

    y0: float
    d: float
    n_paths: int
    n_hits: int
    hit_fraction: float
    hit_fraction_se: float
    hit_fraction_expected: float
    hit_fraction_finite: float
    ks: float
    first_bin_count: int
    first_bin_edge: float
    bin_edges: np.ndarray
    counts: np.ndarray
    shape_mass: np.ndarray
    scale: float
    n_censored: int

    @property
    def insufficient(self):
        return self.n_hits < 1000

    @property
    def passed(self):
        return (not self.insufficient and self.ks <= 0.02
                and abs(self.hit_fraction - self.hit_fraction_expected) <= 3.0 * self.hit_fraction_se
                and self.first_bin_count == 0)


def _comparand_cdf(d, y0, s_max, n=600):
    """Cumulative mass of the comparison density on a log grid, normalized at ``s_max``."""
    from ..heat import hitting_density_mass

    s = np.geomspace(1e-4, s_max, n)
    mass = np.array([hitting_density_mass(d, y0, v) for v in s])
    total = hitting_density_mass(d, y0)
    return s, mass, total


def hitting_histogram(config: ProcessConfig, y0, first_bin=0.01, n_bins=40, backend=None) -> HittingReport:
    """Distribution of the first junction hitting time from ``y0 > 1``.

    The killed process runs until absorption or ``r_escape``.  The empirical
    CDF of the recorded hitting times is compared in shape with the
    comparison density (normalized to unit mass); the total hit fraction is
    compared with ``y0^{2-d}``.
    """
    if not y0 > 1.0:
        raise ValueError("y0 must exceed 1")
    cfg = config.with_(boundary="kill", t_max=math.inf)
    ens = simulate(cfg, y0, backend)
    d = cfg.d
    cens = ens.count(CENSORED)
    n = ens.n - cens
    tau = np.sort(ens.t[ens.status == KILLED])
    k = tau.size
    p = k / n if n else math.nan
    expected = y0 ** (2.0 - d)
    finite = 1.0 - _escape_before_junction(d, y0, cfg.r_escape)
    ks = math.nan
    edges = np.geomspace(first_bin, max(first_bin * 10, tau[-1] if k else 1.0) * 1.0001, n_bins + 1)
    edges = np.concatenate([[0.0], edges])
    counts = np.histogram(tau, edges)[0] if k else np.zeros(edges.size - 1, int)
    shape = np.full(edges.size - 1, math.nan)
    scale = math.nan
    if k:
        s_grid, mass, total = _comparand_cdf(d, y0, max(tau[-1], 1.0) * 1.01)
        cdf = np.interp(np.log(np.maximum(tau, s_grid[0])), np.log(s_grid), mass / total)
        i = np.arange(1, k + 1)
        ks = float(max(np.max(np.abs(i / k - cdf)), np.max(np.abs((i - 1) / k - cdf))))
        edge_cdf = np.interp(np.log(np.maximum(edges, s_grid[0])), np.log(s_grid), mass / total)
        edge_cdf[0] = 0.0
        shape = np.diff(edge_cdf)
        # the one fitted multiplicative constant: hits per unit comparison mass
        scale = k / (n * total)
    first = int(np.count_nonzero(tau <= first_bin))
    return HittingReport(float(y0), d, ens.n, k, p, _se(p, n), expected, finite, ks, first, first_bin, edges,
                         counts, shape, scale, cens)


# ---------------------------------------------------------------------------
# occupation


@dataclass
class OccupationReport:
    """Histogram of ``X_t`` against the heat kernel ``T_t(x0, .)``."""

    x0: float
    t: float
    d: float
    n_paths: int
    edges: np.ndarray  # signed coordinate s = sign(x)(|x| - 1)
    counts: np.ndarray
    pde_mass: np.ndarray
    rel_error: np.ndarray
    min_count: int
    chi2: float
    opposite_mc: float
    opposite_se: float
    opposite_pde: float
    outside_pde: float

    @property
    def well_populated(self):
        return self.counts >= self.min_count

    @property
    def max_rel_error(self):
        m = self.well_populated
        return float(np.max(np.abs(self.rel_error[m]))) if m.any() else math.nan

    @property
    def opposite_z(self):
        return (self.opposite_mc - self.opposite_pde) / self.opposite_se

    @property
    def passed(self):
        return self.max_rel_error <= 0.05 and abs(self.opposite_z) <= 3.0


def _kernel_column(d, x0, t, tol=1e-8):
    from ..heat import HeatSolver
    from ..space import GridSpec

    x_max = max(400.0, abs(x0) + 40.0 * math.sqrt(t) + 10.0)
    solver = HeatSolver(d, GridSpec(h_min=0.005, h_cap=0.025, x_max=x_max, forced=(abs(float(x0)),)), tol=tol)
    fields, _ = solver.direct([float(x0)], [t])
    gg = solver.glued_grid
    return gg.s, gg.weights, fields[0].values[:, 0], gg.junction


def occupation_histogram(config: ProcessConfig, x0, t, n_bins=20, min_count=500, tail=0.005,
                         backend=None) -> OccupationReport:
    """Compare the law of the glued ``X_t`` with the heat kernel on kernel-quantile bins.

    Bin edges sit at the cell edges of the kernel grid where the kernel's
    cumulative mass crosses equally spaced levels in ``[tail, 1 - tail]``,
    so every bin carries about ``(1 - 2 tail)/n_bins`` of the mass.
    """
    cfg = config.with_(boundary="glue", t_max=float(t), r_escape=math.inf)
    ens = simulate(cfg, x0, backend)
    d = cfg.d
    s, w, k, j = _kernel_column(d, x0, t)
    mass = w * k
    cum_edges = np.concatenate([[-np.inf], 0.5 * (s[:-1] + s[1:]), [np.inf]])
    F = np.concatenate([[0.0], np.cumsum(mass)])
    total = F[-1]
    levels = np.linspace(tail, 1.0 - tail, n_bins + 1) * total
    idx = np.unique(np.searchsorted(F, levels))
    idx = idx[(idx > 0) & (idx < F.size - 1)]
    edges = cum_edges[idx]
    pde = np.diff(F[idx]) / total
    # the junction cell is split evenly between the sides
    opp = float((np.sum(mass[:j]) + 0.5 * mass[j]) / total)
    sx = ens.side * (ens.r - 1.0)
    counts = np.histogram(sx, edges)[0]
    n = ens.n
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = counts / (n * pde) - 1.0
        chi2 = float(np.sum((counts - n * pde) ** 2 / (n * pde)))
    p_opp = float(np.count_nonzero(ens.side < 0)) / n
    return OccupationReport(float(x0), float(t), d, n, edges, counts, pde, rel, min_count, chi2, p_opp,
                            _se(max(opp, 1.0 / n), n), opp, float(1.0 - pde.sum()))


def concentration_fraction(config: ProcessConfig, x0, t, width=5.0, backend=None):
    """Fraction of glued paths within ``width * sqrt(2 t)`` of ``x0`` (signed coordinate) at time ``t``."""
    cfg = config.with_(boundary="glue", t_max=float(t), r_escape=math.inf)
    ens = simulate(cfg, x0, backend)
    s0 = math.copysign(abs(x0) - 1.0, x0)
    sx = ens.side * (ens.r - 1.0)
    return float(np.mean(np.abs(sx - s0) <= width * math.sqrt(2.0 * t)))


@dataclass
class StepSizeReport:
    coarse: ExitStats
    fine: ExitStats
    reference_se: float

    @property
    def change(self):
        return abs(self.fine.estimate - self.coarse.estimate)

    @property
    def change_se(self):
        return math.hypot(self.coarse.se, self.fine.se)

    @property
    def passed(self):
        return self.change < self.reference_se


def step_size_check(config: ProcessConfig, x0, n_reference=100_000, backend=None) -> StepSizeReport:
    """Exit estimates at ``dt`` and ``dt/2``; the change must stay below the
    standard error of an ``n_reference``-path estimate.

    The two runs use independent streams, so ``config.n_paths`` should be a
    large multiple of ``n_reference`` for the change to be resolved.
    """
    coarse = exit_probability(config, x0, backend=backend)
    fine = exit_probability(config.with_(dt=config.dt / 2, dt_min=config.dt_min / 2,
                                         seed=(int(config.seed) + 1) % 2**64), x0, backend=backend)
    return StepSizeReport(coarse, fine, _se(coarse.expected, n_reference))
