import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gluedbessel import stochastic as sto
from gluedbessel.stochastic import _fallback

BACKENDS = ["numpy"] + (["cython"] if sto.BACKEND == "cython" else [])

# Random123 known-answer vectors for Philox4x32-10
KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
]


def small(**kw):
    base = dict(d=3.0, n_paths=2000, seed=123, chunk=512)
    base.update(kw)
    return sto.ProcessConfig(**base)


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("ctr,key,expected", KAT)
def test_philox_known_answers(backend, ctr, key, expected):
    mod = sto.get_backend(backend)
    assert tuple(mod.philox4x32(*ctr, *key)) == expected


@pytest.mark.skipif(sto.BACKEND != "cython", reason="compiled extension not built")
@pytest.mark.parametrize("boundary", ["reflect", "kill", "glue"])
def test_backends_agree(boundary):
    cfg = small(boundary=boundary, t_max=2.0, r_escape=50.0, n_paths=500)
    a = sto.simulate(cfg, 2.0, backend="numpy")
    b = sto.simulate(cfg, 2.0, backend="cython")
    for name in ("status", "side", "n_hits", "n_plus", "steps"):
        assert np.array_equal(getattr(a, name), getattr(b, name)), name
    assert np.allclose(a.r, b.r, rtol=1e-9, atol=0)
    assert np.allclose(a.t, b.t, rtol=1e-9, atol=0)


def test_deterministic_and_chunk_independent():
    cfg = small(t_max=1.0, r_escape=50.0)
    a = sto.simulate(cfg, 2.0)
    b = sto.simulate(cfg.with_(chunk=97, workers=4), 2.0)
    c = sto.simulate(cfg.with_(seed=124), 2.0)
    assert np.array_equal(a.r, b.r) and np.array_equal(a.side, b.side)
    assert not np.array_equal(a.r, c.r)


def test_reflect_stays_outside_junction():
    ens = sto.simulate(small(boundary="reflect", t_max=1.0, r_escape=50.0), 1.2)
    assert np.all(ens.r >= 1.0)
    assert np.all(ens.side == 1)
    assert ens.n_hits.sum() > 0


def test_glue_side_frequency():
    ens = sto.simulate(small(t_max=1.0, r_escape=50.0, n_paths=5000), 1.5)
    sf = sto.side_frequency(ens)
    assert sf.n_hits > 1000
    assert abs(sf.frequency - 0.5) <= 4 * sf.se


def test_exit_probability_small():
    st_ = sto.exit_probability(small(n_paths=20_000), 2.0)
    assert st_.censor_rate == 0
    assert abs(st_.estimate - st_.expected) <= 4 * st_.se
    neg = sto.exit_probability(small(n_paths=20_000), -2.0)
    assert abs(neg.estimate - neg.expected) <= 4 * neg.se


def test_survival_matches_harmonic_and_pde():
    s = sto.survival_probability(small(n_paths=20_000), 2.0)
    assert abs(s.estimate - s.expected_finite) <= 4 * s.se
    s1 = sto.survival_probability(small(n_paths=20_000, dt=1e-3), 2.0, t=1.0)
    assert abs(s1.estimate - s1.expected) <= 4 * s1.se + 0.01


def test_pde_survival_limits():
    assert sto.pde_survival(3.0, 2.0, 1e-3) == pytest.approx(1.0, abs=1e-6)
    assert sto.pde_survival(3.0, 2.0, 1.0) < sto.pde_survival(3.0, 2.0, 0.1) < 1.0


def test_hitting_histogram_quick():
    rep = sto.hitting_histogram(small(n_paths=10_000), 2.0)
    assert not rep.insufficient
    assert rep.first_bin_count == 0
    assert rep.ks <= 0.05
    assert abs(rep.hit_fraction - rep.hit_fraction_expected) <= 4 * rep.hit_fraction_se


def test_concentration():
    assert sto.concentration_fraction(small(n_paths=5000), 3.0, 1.0) >= 0.99


@pytest.mark.parametrize("kw", [dict(d=2.0), dict(d=1.5), dict(boundary="wall"), dict(dt=0.0), dict(n_paths=0),
                                dict(workers=0), dict(seed=-1), dict(seed=2**64), dict(growth=-1.0),
                                dict(r_escape=1.0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        sto.ProcessConfig(**kw)


def test_start_validation():
    with pytest.raises(ValueError):
        sto.simulate(small(), 0.5)
    with pytest.raises(ValueError):
        sto.simulate(small(boundary="kill"), -2.0)
    with pytest.raises(ValueError):
        sto.hitting_histogram(small(), 1.0)


def test_step_size_check_small():
    rep = sto.step_size_check(small(n_paths=20_000), 2.0, n_reference=2000)
    assert rep.passed


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1))
def test_philox_vectorized_matches_scalar(c0, c1, k0):
    v = _fallback.philox4x32_block(np.array([c0, c1]), np.array([c1, c0]), np.zeros(2), np.zeros(2), k0, 7)
    for j, (a, b) in enumerate([(c0, c1), (c1, c0)]):
        assert tuple(int(w[j]) for w in v) == _fallback.philox4x32(a, b, 0, 0, k0, 7)


def test_echo_names_rng():
    e = small().echo()
    assert e["rng"].startswith("Philox4x32-10") and e["backend"] == sto.BACKEND
    assert math.isinf(e["t_max"])
