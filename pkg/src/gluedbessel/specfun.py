"""Modified Bessel functions and the radial functions built from them.

For a dimension parameter ``d`` write ``a = d/2 - 1`` for the Bessel order and

    l(z) = z^{-a} I_a(z),   k(z) = z^{-a} K_a(z),   kt(z) = z^{d-2} k(z) = z^a K_a(z),
    A = l/k,   B = l'/k',
    tau_lam(z) = l(lam z) - A(lam) k(lam z),
    psi_lam(z) = l(lam z) - B(lam) k(lam z).

``l`` and ``k`` solve ``f'' + (d-1)/z f' = f`` and have Wronskian
``l'k - k'l = z^{1-d}``.  Differentiating the ratios gives

    A'(s) = s^{d-3} / kt(s)^2,      B'(s) = -s^{1-d} / k'(s)^2,

so ``tau`` and ``psi'`` can be written as positive integrals,

    tau_lam(z)  = k(lam z) lam^{d-2} int_1^z u^{d-3} / kt(lam u)^2 du,
    psi'_lam(z) = lam |k'(lam z)| lam^{2-d} int_1^z u^{1-d} / k'(lam u)^2 du,

which is how both are evaluated when ``lam (z - 1)`` is small and the direct
subtraction would cancel.

Every quantity grows or decays like ``exp(+-z)``, so the vector routines work
with natural logarithms of magnitudes (``log_*`` functions).  Signs are fixed
and known: ``l, l', k, A, kt, tau, tau', psi, psi'`` are nonnegative and
``k', B, kt'`` are negative.  The scalar public API returns :class:`ScaledValue`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "Dimension",
    "ScaledValue",
    "BesselConstants",
    "bessel_i",
    "bessel_k",
    "small_l",
    "small_k",
    "small_l_prime",
    "small_k_prime",
    "k_tilde",
    "k_tilde_prime",
    "ratio_A",
    "ratio_B",
    "tau",
    "tau_prime",
    "psi",
    "psi_prime",
    "verify_asymptotics",
]


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


@dataclass(frozen=True)
class Dimension:
    """The measure exponent ``d`` of ``|x|^{d-1} dx``.

    ``relaxed=True`` admits ``0 < d <= 2`` for Neumann-only work.
    """

    d: float
    relaxed: bool = False

    def __post_init__(self):
        d = float(self.d)
        if not math.isfinite(d):
            raise DomainError(f"dimension must be finite, got {self.d!r}")
        if self.relaxed:
            if d <= 0:
                raise DomainError(f"dimension must be positive, got {d}")
        elif d <= 2:
            raise DomainError(f"dimension must exceed 2, got {d} (use relaxed=True for d > 0)")
        object.__setattr__(self, "d", d)

    @property
    def order(self) -> float:
        return self.d / 2.0 - 1.0

    @property
    def nu(self) -> float:
        return self.d - 2.0 if self.d < 3.0 else 1.0

    @property
    def integer_order(self) -> bool:
        return float(self.order).is_integer()


DimLike = Union[float, int, Dimension]


def as_dimension(d: DimLike) -> Dimension:
    return d if isinstance(d, Dimension) else Dimension(float(d))


@dataclass(frozen=True)
class ScaledValue:
    """A real number stored as ``sign * exp(log_mag)``.

    Values built from a plain float keep that float in ``exact`` so the
    round trip is exact; ``exp(log x)`` alone loses about ``|log x|`` ulps.
    """

    sign: int
    log_mag: float
    exact: float | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        sign = int(self.sign)
        if sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")
        log_mag = float(self.log_mag)
        if sign == 0:
            log_mag = -math.inf
        elif log_mag == -math.inf:
            sign = 0
        object.__setattr__(self, "sign", sign)
        object.__setattr__(self, "log_mag", log_mag)

    @classmethod
    def from_float(cls, x: float) -> "ScaledValue":
        x = float(x)
        if x == 0.0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)), x)

    @classmethod
    def zero(cls) -> "ScaledValue":
        return cls(0, -math.inf)

    @property
    def value(self) -> float:
        """Plain float (may overflow to inf or underflow to 0)."""
        if self.sign == 0:
            return 0.0
        if self.exact is not None:
            return self.exact
        try:
            return self.sign * math.exp(self.log_mag)
        except OverflowError:
            return self.sign * math.inf

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> "ScaledValue":
        return ScaledValue(-self.sign, self.log_mag, None if self.exact is None else -self.exact)

    def __mul__(self, other) -> "ScaledValue":
        other = _coerce_scaled(other)
        return ScaledValue(self.sign * other.sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ScaledValue":
        other = _coerce_scaled(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero ScaledValue")
        return ScaledValue(self.sign * other.sign, self.log_mag - other.log_mag)

    def __add__(self, other) -> "ScaledValue":
        other = _coerce_scaled(other)
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        hi, lo = (self, other) if self.log_mag >= other.log_mag else (other, self)
        ratio = math.exp(lo.log_mag - hi.log_mag)
        if hi.sign == lo.sign:
            return ScaledValue(hi.sign, hi.log_mag + math.log1p(ratio))
        if ratio == 1.0:
            return ScaledValue.zero()
        return ScaledValue(hi.sign, hi.log_mag + math.log1p(-ratio))

    __radd__ = __add__

    def __sub__(self, other) -> "ScaledValue":
        return self + (-_coerce_scaled(other))


def _coerce_scaled(x) -> ScaledValue:
    return x if isinstance(x, ScaledValue) else ScaledValue.from_float(x)


def _scaled(sign: int, logv) -> ScaledValue:
    logv = float(logv)
    if logv == -math.inf:
        return ScaledValue.zero()
    return ScaledValue(sign, logv)


@dataclass(frozen=True)
class BesselConstants:
    """Leading coefficients of ``l, l', k, k', kt`` at zero and infinity.

    ``c_l`` is the limit ``l(0+) = 2^{-a} / Gamma(a + 1)`` for ``l = z^{-a} I_a``.
    ``c_k`` follows from ``K_a(z) ~ Gamma(a) 2^{a-1} z^{-a}``, giving
    ``k(z) ~ 2^{d/2-2} Gamma(d/2-1) z^{2-d}``.  ``d_k`` is the coefficient of
    ``z^nu`` in ``kt(z) = c_k + d_k z^nu + ...``; it comes from the ``I_a`` part
    of ``K_a = pi (I_{-a} - I_a) / (2 sin(a pi))`` and equals
    ``-pi / (2^{a+1} sin(a pi) Gamma(a+1))`` when ``nu = d - 2`` (``2 < d <= 3``).
    For ``d > 3`` the expansion of ``kt`` has no ``z^1`` term, so ``d_k = 0``.
    """

    d: float
    c_l: float
    c_lp: float
    c_k: float
    c_kp: float
    d_k: float
    ct_l: float = field(default=(2.0 * math.pi) ** -0.5)
    ct_k: float = field(default=math.sqrt(math.pi / 2.0))

    @classmethod
    def for_dimension(cls, d: DimLike) -> "BesselConstants":
        dim = as_dimension(d)
        a = dim.order
        c_l = 2.0 ** (-a) / math.gamma(a + 1.0)
        c_lp = 2.0 ** (-a - 1.0) / math.gamma(a + 2.0)
        c_k = 2.0 ** (a - 1.0) * math.gamma(a)
        c_kp = 2.0**a * math.gamma(a + 1.0)
        if dim.d <= 3.0:
            d_k = -math.pi / (2.0 ** (a + 1.0) * math.sin(a * math.pi) * math.gamma(a + 1.0))
        else:
            d_k = 0.0
        return cls(d=dim.d, c_l=c_l, c_lp=c_lp, c_k=c_k, c_kp=c_kp, d_k=d_k)


# ---------------------------------------------------------------------------
# log-domain vector kernels


def _check_z(z, strict=True):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError("argument must be finite")
    if strict and np.any(z <= 0):
        raise DomainError("argument must be positive")
    return z


# the AMOS routines behind scipy's ive/kve return nan above about 2**31;
# past this switch point three Hankel terms are exact to round-off
_HANKEL_SWITCH = 1e7


def _hankel_log_series(order, z, sign):
    mu = 4.0 * order * order
    a1 = (mu - 1.0) / 8.0
    a2 = a1 * (mu - 9.0) / 16.0
    a3 = a2 * (mu - 25.0) / 24.0
    return np.log1p(sign * a1 / z + a2 / z**2 + sign * a3 / z**3)


def log_bessel_i(order, z):
    """log I_order(z) for z > 0 (vectorized)."""
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(special.ive(order, z)) + z
        big = z > _HANKEL_SWITCH
        if np.any(big):
            zb = z[big] if z.ndim else z
            val = zb - 0.5 * np.log(2.0 * np.pi * zb) + _hankel_log_series(order, zb, -1.0)
            if z.ndim:
                out[big] = val
            else:
                out = val
    return out


def log_bessel_k(order, z):
    """log K_order(z) for z > 0 (vectorized)."""
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(special.kve(order, z)) - z
        big = z > _HANKEL_SWITCH
        if np.any(big):
            zb = z[big] if z.ndim else z
            val = -zb + 0.5 * np.log(np.pi / (2.0 * zb)) + _hankel_log_series(order, zb, 1.0)
            if z.ndim:
                out[big] = val
            else:
                out = val
    return out


def log_l(d, z):
    a = as_dimension(d).order
    return -a * np.log(z) + log_bessel_i(a, z)


def log_lp(d, z):
    a = as_dimension(d).order
    return -a * np.log(z) + log_bessel_i(a + 1.0, z)


def log_k(d, z):
    a = as_dimension(d).order
    return -a * np.log(z) + log_bessel_k(a, z)


def log_kp_abs(d, z):
    a = as_dimension(d).order
    return -a * np.log(z) + log_bessel_k(a + 1.0, z)


def log_kt(d, z):
    a = as_dimension(d).order
    return a * np.log(z) + log_bessel_k(a, z)


def log_ktp_abs(d, z):
    # (z^a K_a)' = -z^a K_{a-1} = -z^a K_{1-a}
    a = as_dimension(d).order
    return a * np.log(z) + log_bessel_k(abs(a - 1.0), z)


def log_A(d, lam):
    return log_l(d, lam) - log_k(d, lam)


def log_B_abs(d, lam):
    return log_lp(d, lam) - log_kp_abs(d, lam)


_GL16 = np.polynomial.legendre.leggauss(16)


def _log_panel_integral(logf, lower, upper, n_panels):
    """log of int_lower^upper exp(logf(v)) dv by composite 16-point Gauss-Legendre.

    ``lower``/``upper`` are arrays of equal shape; ``logf`` maps an array of
    shape ``lower.shape + (m,)`` to log-integrand values.
    """
    x, w = _GL16
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    t = ((edges[:-1, None] + edges[1:, None]) / 2 + (edges[1:, None] - edges[:-1, None]) / 2 * x).ravel()
    wt = (np.repeat(np.diff(edges), x.size) / 2) * np.tile(w, n_panels)
    span = upper - lower
    v = lower[..., None] + span[..., None] * t
    lf = logf(v)
    peak = np.max(lf, axis=-1)
    s = np.sum(wt * np.exp(lf - peak[..., None]), axis=-1)
    return peak + np.log(s) + np.log(span)


def _n_panels(span_max, rate):
    return int(min(64, max(1, math.ceil(span_max * max(1.0, rate) / 2.0))))


def log_tau(d, lam, z):
    """log tau_lam(z) for lam > 0, z >= 1; -inf at z = 1."""
    dim = as_dimension(d)
    lam, z = np.broadcast_arrays(np.asarray(lam, float), np.asarray(z, float))
    out = np.full(lam.shape, -np.inf)
    gap = lam * (z - 1.0)
    small = (z > 1.0) & (gap <= 1.0)
    big = (z > 1.0) & ~small
    if np.any(big):
        lb, zb = lam[big], z[big]
        diff = log_A(dim, lb) - log_A(dim, lb * zb)
        out[big] = log_l(dim, lb * zb) + np.log(-np.expm1(diff))
    if np.any(small):
        ls, zs = lam[small], z[small]
        top = np.log(zs)
        n = _n_panels(float(np.max(top)), abs(dim.d - 2.0))
        logint = _log_panel_integral(
            lambda v: (dim.d - 2.0) * v - 2.0 * log_kt(dim, ls[:, None] * np.exp(v)),
            np.zeros_like(top),
            top,
            n,
        )
        out[small] = log_k(dim, ls * zs) + (dim.d - 2.0) * np.log(ls) + logint
    return out


def log_tau_prime(d, lam, z):
    """log tau'_lam(z) (derivative in z); tau' > 0 for z >= 1."""
    dim = as_dimension(d)
    lam, z = np.broadcast_arrays(np.asarray(lam, float), np.asarray(z, float))
    arg = lam * z
    return np.log(lam) + np.logaddexp(log_lp(dim, arg), log_A(dim, lam) + log_kp_abs(dim, arg))


def log_psi(d, lam, z):
    dim = as_dimension(d)
    lam, z = np.broadcast_arrays(np.asarray(lam, float), np.asarray(z, float))
    arg = lam * z
    return np.logaddexp(log_l(dim, arg), log_B_abs(dim, lam) + log_k(dim, arg))


def log_psi_prime(d, lam, z):
    """log psi'_lam(z); psi' >= 0 with psi'_lam(1) = 0."""
    dim = as_dimension(d)
    lam, z = np.broadcast_arrays(np.asarray(lam, float), np.asarray(z, float))
    out = np.full(lam.shape, -np.inf)
    gap = lam * (z - 1.0)
    small = (z > 1.0) & (gap <= 1.0)
    big = (z > 1.0) & ~small
    if np.any(big):
        lb, zb = lam[big], z[big]
        diff = log_B_abs(dim, lb) - log_B_abs(dim, lb * zb)
        out[big] = np.log(lb) + log_lp(dim, lb * zb) + np.log(-np.expm1(diff))
    if np.any(small):
        ls, zs = lam[small], z[small]
        top = np.log(zs)
        n = _n_panels(float(np.max(top)), abs(dim.d - 2.0))
        logint = _log_panel_integral(
            lambda v: (2.0 - dim.d) * v - 2.0 * log_kp_abs(dim, ls[:, None] * np.exp(v)),
            np.zeros_like(top),
            top,
            n,
        )
        out[small] = np.log(ls) + log_kp_abs(dim, ls * zs) + (2.0 - dim.d) * np.log(ls) + logint
    return out


# ---------------------------------------------------------------------------
# scalar public API


def _scalar_arg(z, name="z"):
    try:
        z = float(z)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be a real number") from exc
    if not math.isfinite(z):
        raise DomainError(f"{name} must be finite, got {z}")
    if z <= 0:
        raise DomainError(f"{name} must be positive, got {z}")
    return z


def _order_arg(order):
    order = float(order)
    if not math.isfinite(order) or order < 0:
        raise DomainError(f"order must be finite and nonnegative, got {order}")
    return order


def bessel_i(order: float, z: float) -> ScaledValue:
    """Modified Bessel function of the first kind, I_order(z)."""
    order, z = _order_arg(order), _scalar_arg(z)
    return _scaled(1, log_bessel_i(order, z))


def bessel_k(order: float, z: float) -> ScaledValue:
    """Modified Bessel function of the second kind, K_order(z)."""
    order, z = _order_arg(order), _scalar_arg(z)
    return _scaled(1, log_bessel_k(order, z))


def small_l(d: DimLike, z: float) -> ScaledValue:
    return _scaled(1, log_l(d, _scalar_arg(z)))


def small_l_prime(d: DimLike, z: float) -> ScaledValue:
    return _scaled(1, log_lp(d, _scalar_arg(z)))


def small_k(d: DimLike, z: float) -> ScaledValue:
    return _scaled(1, log_k(d, _scalar_arg(z)))


def small_k_prime(d: DimLike, z: float) -> ScaledValue:
    return _scaled(-1, log_kp_abs(d, _scalar_arg(z)))


def k_tilde(d: DimLike, z: float) -> ScaledValue:
    return _scaled(1, log_kt(d, _scalar_arg(z)))


def k_tilde_prime(d: DimLike, z: float) -> ScaledValue:
    return _scaled(-1, log_ktp_abs(d, _scalar_arg(z)))


def ratio_A(d: DimLike, lam: float) -> ScaledValue:
    """A(lam) = l(lam)/k(lam) > 0."""
    return _scaled(1, log_A(d, _scalar_arg(lam, "lam")))


def ratio_B(d: DimLike, lam: float) -> ScaledValue:
    """B(lam) = l'(lam)/k'(lam) < 0."""
    return _scaled(-1, log_B_abs(d, _scalar_arg(lam, "lam")))


def _lam_z(lam, z):
    lam = _scalar_arg(lam, "lam")
    try:
        z = float(z)
    except (TypeError, ValueError) as exc:
        raise DomainError("z must be a real number") from exc
    if not math.isfinite(z) or z < 1.0:
        raise DomainError(f"z must be finite and >= 1, got {z}")
    return lam, z


def tau(d: DimLike, lam: float, z: float) -> ScaledValue:
    lam, z = _lam_z(lam, z)
    if z == 1.0:
        return ScaledValue.zero()
    return _scaled(1, log_tau(d, lam, z))


def tau_prime(d: DimLike, lam: float, z: float) -> ScaledValue:
    lam, z = _lam_z(lam, z)
    return _scaled(1, log_tau_prime(d, lam, z))


def psi(d: DimLike, lam: float, z: float) -> ScaledValue:
    lam, z = _lam_z(lam, z)
    return _scaled(1, log_psi(d, lam, z))


def psi_prime(d: DimLike, lam: float, z: float) -> ScaledValue:
    lam, z = _lam_z(lam, z)
    if z == 1.0:
        return ScaledValue.zero()
    return _scaled(1, log_psi_prime(d, lam, z))


# ---------------------------------------------------------------------------
# asymptotics table check


@dataclass
class AsymptoticRow:
    function: str
    regime: str
    quantity: str
    predicted: float
    fitted: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class AsymptoticsReport:
    d: float
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self):
        return [r for r in self.rows if not r.passed]

    def to_records(self):
        return [
            {
                "d": self.d,
                "function": r.function,
                "regime": r.regime,
                "quantity": r.quantity,
                "predicted": r.predicted,
                "fitted": r.fitted,
                "tolerance": r.tolerance,
                "passed": r.passed,
                "note": r.note,
            }
            for r in self.rows
        ]


def _fit_line(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def verify_asymptotics(d: DimLike, small=(1e-5, 1e-3), large=(50.0, 500.0), n=41) -> AsymptoticsReport:
    """Fit the small- and large-argument behavior of every tabulated function.

    Small z: least-squares slope of ``log|f|`` against ``log z``; tolerance 0.01.
    Large z: slope of ``log|f| - p log z`` against ``z`` (the exponential
    rate, tolerance 0.01) and the leading coefficient, extrapolated to
    ``1/z -> 0`` by a quadratic fit (tolerance 1%).  Signs are checked at every sample.
    Rows that fail are reported, never raised.
    """
    dim = as_dimension(d)
    dd = dim.d
    c = BesselConstants.for_dimension(dim)
    zs = np.geomspace(small[0], small[1], n)
    zl = np.linspace(large[0], large[1], n)
    lzs = np.log(zs)
    half = (1.0 - dd) / 2.0

    table = [
        # name, log|f|, sign, small exponent, small coeff, large rate, large power, large coeff
        ("l", lambda z: log_l(dim, z), 1, 0.0, c.c_l, 1.0, half, c.ct_l),
        ("l'", lambda z: log_lp(dim, z), 1, 1.0, c.c_lp, 1.0, half, c.ct_l),
        ("k", lambda z: log_k(dim, z), 1, 2.0 - dd, c.c_k, -1.0, half, c.ct_k),
        ("k'", lambda z: log_kp_abs(dim, z), -1, 1.0 - dd, c.c_kp, -1.0, half, c.ct_k),
        ("A", lambda z: log_A(dim, z), 1, dd - 2.0, c.c_l / c.c_k, 2.0, 0.0, c.ct_l / c.ct_k),
        ("B", lambda z: log_B_abs(dim, z), -1, dd, c.c_lp / c.c_kp, 2.0, 0.0, c.ct_l / c.ct_k),
        ("kt", lambda z: log_kt(dim, z), 1, 0.0, c.c_k, -1.0, (dd - 3.0) / 2.0, c.ct_k),
        ("kt'", lambda z: log_ktp_abs(dim, z), -1, None, None, -1.0, (dd - 3.0) / 2.0, c.ct_k),
    ]
    rows = []
    for name, logf, sign, s_exp, s_coef, rate, power, l_coef in table:
        try:
            vs = logf(zs)
            vl = logf(zl)
            finite = np.all(np.isfinite(vs)) and np.all(np.isfinite(vl))
            rows.append(AsymptoticRow(name, "all", "sign", sign, sign if finite else 0, 0.0, bool(finite),
                                      "sign fixed by construction; finiteness checked"))
            if s_exp is not None:
                slope, intercept = _fit_line(lzs, vs)
                rows.append(AsymptoticRow(name, "small", "exponent", s_exp, slope, 0.01,
                                          abs(slope - s_exp) <= 0.01))
                coef = math.exp(float(vs[0]) - s_exp * float(lzs[0]))
                rows.append(AsymptoticRow(name, "small", "coefficient", s_coef, coef, 0.01,
                                          abs(coef / s_coef - 1.0) <= 0.01))
            else:
                bound = float(np.max(vs - (dim.nu - 1.0) * lzs))
                rows.append(AsymptoticRow(name, "small", "bound z^(nu-1)", dim.nu - 1.0, math.exp(bound),
                                          math.inf, math.isfinite(bound), "fitted constant C in |f| <= C z^(nu-1)"))
            resid = vl - power * np.log(zl)
            slope, _ = _fit_line(zl, resid)
            rows.append(AsymptoticRow(name, "large", "rate", rate, slope, 0.01, abs(slope - rate) <= 0.01))
            # leading coefficient = limit of f z^{-p} e^{-rate z}; extrapolate in 1/z
            scaled = np.exp(resid - rate * zl)
            coef = float(np.polyval(np.polyfit(1.0 / zl, scaled, 2), 0.0))
            rows.append(AsymptoticRow(name, "large", "coefficient", l_coef, coef, 0.01,
                                      abs(coef / l_coef - 1.0) <= 0.01))
        except Exception as exc:  # a broken row must not abort the report
            rows.append(AsymptoticRow(name, "all", "evaluation", math.nan, math.nan, 0.0, False, repr(exc)))

    # Wronskian l'k - k'l = z^{1-d}
    z_all = np.concatenate([zs, np.geomspace(1e-3, 50, n), zl])
    w = np.exp(log_lp(dim, z_all) + log_k(dim, z_all) - (1 - dd) * np.log(z_all)) + np.exp(
        log_kp_abs(dim, z_all) + log_l(dim, z_all) - (1 - dd) * np.log(z_all)
    )
    werr = float(np.max(np.abs(w - 1.0)))
    rows.append(AsymptoticRow("l'k-k'l", "all", "z^(d-1) * Wronskian", 1.0, 1.0 + werr, 1e-10, werr <= 1e-10))

    # d_k: coefficient of z^nu in kt - c_k
    if dd <= 3.0:
        lo = np.geomspace(1e-6, 1e-4, n)
        resid = np.exp(log_kt(dim, lo)) - c.c_k
        slope, intercept = _fit_line(np.log(lo), np.log(np.abs(resid)))
        coef = -math.exp(float(np.log(abs(resid[0])) - dim.nu * np.log(lo[0])))
        rows.append(AsymptoticRow("kt", "small", "d_k exponent", dim.nu, slope, 0.01, abs(slope - dim.nu) <= 0.01))
        rows.append(AsymptoticRow("kt", "small", "d_k", c.d_k, coef, 0.02, abs(coef / c.d_k - 1.0) <= 0.02))
    else:
        note = "fit skipped: integer Bessel order (logarithmic terms)" if dim.integer_order else \
            "fit skipped: no z^nu term for d > 3 (d_k = 0)"
        rows.append(AsymptoticRow("kt", "small", "d_k", 0.0, 0.0, 0.0, True, note))
    return AsymptoticsReport(d=dd, rows=rows)
