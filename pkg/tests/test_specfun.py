import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import read_fixture
from gluedbessel import specfun as sf
from gluedbessel.specfun import BesselConstants, Dimension, DomainError, ScaledValue

GOLDEN = read_fixture("golden_specfun.csv")


def evaluate(row):
    d, name, arg = float(row["d"]), row["function"], row["argument"]
    if name in ("bessel_i", "bessel_k"):
        return getattr(sf, name)(d / 2 - 1, float(arg))
    if ":" in arg:
        lam, z = (float(v) for v in arg.split(":"))
        return getattr(sf, name)(d, lam, z)
    return getattr(sf, name)(d, float(arg))


def test_golden_table_size():
    assert len(GOLDEN) >= 50
    orders = {float(r["d"]) / 2 - 1 for r in GOLDEN}
    assert min(orders) == 0.5 and max(orders) == 3.0


@pytest.mark.parametrize("row", GOLDEN, ids=lambda r: f"{r['function']}-d{r['d']}-{r['argument']}")
def test_golden_values(row):
    v = evaluate(row)
    expected = mp.mpf(row["expected"])
    assert v.sign == int(mp.sign(expected))
    # compare logarithms so that e^{500}-sized values need no plain float
    assert abs(v.log_mag - float(mp.log(abs(expected)))) <= float(row["tolerance"])


@pytest.mark.parametrize("order,z", [(1.0, 1.0), (0.5, 1.0), (2.0, 7.5), (0.5, 650.0), (3.0, 1e-6)])
def test_bessel_against_mpmath(order, z):
    mp.mp.dps = 40
    assert sf.bessel_i(order, z).log_mag == pytest.approx(float(mp.log(mp.besseli(order, z))), abs=1e-10)
    assert sf.bessel_k(order, z).log_mag == pytest.approx(float(mp.log(mp.besselk(order, z))), abs=1e-10)


def test_half_integer_closed_forms():
    assert sf.bessel_i(0.5, 1.0).value == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1.0), rel=1e-13)
    assert sf.small_l(3, 1.0).value == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1.0), rel=1e-13)
    assert sf.small_k(3, 1.0).value == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1.0), rel=1e-13)
    A = (2 / math.pi) * math.sinh(1.0) * math.e
    assert sf.ratio_A(3, 1.0).value == pytest.approx(A, rel=1e-12)


def test_small_z_limit_of_l_d4():
    assert abs(sf.small_l(4, 1e-4).value - BesselConstants.for_dimension(4).c_l) < 1e-7


def test_ratio_a_large_lambda_d4():
    c = BesselConstants.for_dimension(4)
    assert abs(sf.ratio_A(4, 200.0).log_mag - 400.0 - math.log(c.ct_l / c.ct_k)) < 1e-2


def test_ratio_log_scaled_no_overflow():
    a, b = sf.ratio_A(3.5, 5000.0), sf.ratio_B(3.5, 5000.0)
    assert a.sign == 1 and b.sign == -1
    assert math.isfinite(a.log_mag) and a.log_mag > 9000


@pytest.mark.parametrize("d", [2.5, 3.0, 4.0, 6.0])
def test_a_times_k_equals_l(d):
    for lam in np.geomspace(1e-3, 300, 15):
        lhs = sf.ratio_A(d, lam).log_mag + sf.small_k(d, lam).log_mag
        assert lhs == pytest.approx(sf.small_l(d, lam).log_mag, abs=1e-12 * max(1.0, lam))


@pytest.mark.parametrize("d", [2.5, 3.0, 4.0])
def test_wronskian_and_monotone_a(d):
    zs = np.geomspace(1e-3, 200, 40)
    for z in zs:
        # l' > 0, k > 0, k' < 0, l > 0: l'k - k'l is a sum of positive terms
        assert sf.small_l_prime(d, z).sign == 1 and sf.small_k(d, z).sign == 1
        assert sf.small_k_prime(d, z).sign == -1 and sf.small_l(d, z).sign == 1
    logA = [sf.ratio_A(d, z).log_mag for z in zs]
    assert np.all(np.diff(logA) > 0)


def test_constants_invariants():
    for d in (2.5, 3.0, 4.0, 7.0):
        c = BesselConstants.for_dimension(d)
        assert c.c_kp / c.c_k == pytest.approx(d - 2.0, rel=1e-14)
        assert c.c_k == pytest.approx(2 ** (d / 2 - 2) * math.gamma(d / 2 - 1), rel=1e-14)
        assert c.ct_l == pytest.approx((2 * math.pi) ** -0.5)
        assert c.ct_k == pytest.approx(math.sqrt(math.pi / 2))


def test_dimension_nu_and_order():
    assert Dimension(2.5).nu == pytest.approx(0.5)
    assert Dimension(3.0).nu == 1.0 and Dimension(5.0).nu == 1.0
    assert Dimension(4.0).order == 1.0
    with pytest.raises(DomainError):
        Dimension(2.0)
    assert Dimension(1.5, relaxed=True).d == 1.5


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        sf.bessel_k(1.0, bad)
    with pytest.raises(DomainError):
        sf.small_l(3, bad)


def test_tau_domain():
    with pytest.raises(DomainError):
        sf.tau(3, 1.0, 0.5)
    with pytest.raises(DomainError):
        sf.tau(3, 0.0, 2.0)


@given(st.floats(2.05, 9.0), st.floats(1e-4, 1e3))
def test_boundary_zeros_exact(d, lam):
    assert sf.tau(d, lam, 1.0).value == 0.0
    assert sf.psi_prime(d, lam, 1.0).value == 0.0


@given(st.floats(2.05, 9.0), st.floats(1e-3, 50.0), st.floats(1.0 + 1e-6, 50.0))
def test_tau_psi_positive(d, lam, z):
    assert sf.tau(d, lam, z).sign == 1
    assert sf.tau_prime(d, lam, z).sign == 1
    assert sf.psi(d, lam, z).sign == 1


def test_tau_cancellation_regime():
    mp.mp.dps = 50
    d, lam, z = 3, mp.mpf("0.01"), mp.mpf(1) + mp.mpf(2) ** -20

    def l3(v):
        return mp.sqrt(2 / mp.pi) * mp.sinh(v) / v

    def k3(v):
        return mp.sqrt(mp.pi / 2) * mp.exp(-v) / v

    exact = l3(lam * z) - l3(lam) / k3(lam) * k3(lam * z)
    got = sf.tau(d, float(lam), float(z)).value
    assert got == pytest.approx(float(exact), rel=1e-8)


@given(st.floats(-1e300, 1e300).filter(lambda v: v != 0.0))
def test_scaled_round_trip(x):
    assert ScaledValue.from_float(x).value == pytest.approx(x, rel=4e-16)


def test_scaled_zero():
    z = ScaledValue.zero()
    assert z.sign == 0 and z.log_mag == -math.inf and z.value == 0.0
    assert ScaledValue(1, -math.inf).sign == 0


@pytest.mark.parametrize("d", [2.5, 3.0, 4.0, 5.5])
def test_verify_asymptotics(d):
    rep = sf.verify_asymptotics(d)
    assert rep.passed, [r for r in rep.failures()]
    assert all(isinstance(r, dict) for r in rep.to_records())
