import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from leorouting import channel
from leorouting.channel import HopClass
from leorouting.params import SystemParams

# Shadowed-Rician CDF at w = 1 from quadrature of the confluent-hypergeometric density
SR_CDF_AT_1 = 0.3112830328084073
# pointing-gain mean: closed form and exact Rayleigh expectation of cos(theta_d)
PE_MEAN_CLOSED = 1.6140620975207094
PE_MEAN_EXACT = 1.614062124762911
# (1550 nm / (4 pi 1000 km))^2 at -2 dB air attenuation
PATH_GAIN_1000 = 9.599390705735566e-27
# C1 received power at 1500 km with fading 1.606, in mW
RX_POWER_1500 = 3.204842499127687e-18


def test_sr_cdf_limits_and_oracle(p):
    assert channel.sr_fading_cdf(0.0, p) == 0.0
    assert channel.sr_fading_cdf(1e6, p) == pytest.approx(1.0, abs=1e-9)
    assert channel.sr_fading_cdf(1.0, p) == pytest.approx(SR_CDF_AT_1, rel=1e-9)


@given(st.floats(0.0, 30.0), st.floats(0.0, 30.0))
def test_sr_cdf_monotone(a, b):
    from leorouting.params import SystemParams
    p = SystemParams().channel()
    lo, hi = sorted((a, b))
    assert channel.sr_fading_cdf(lo, p) <= channel.sr_fading_cdf(hi, p) + 1e-15


def test_sr_pdf_integrates_to_cdf(p):
    from scipy import integrate
    val, _ = integrate.quad(lambda w: channel.sr_fading_pdf(w, p), 0.0, 2.5)
    assert val == pytest.approx(channel.sr_fading_cdf(2.5, p), rel=1e-8)


def test_sr_sampler_mean_and_ks(p, rng):
    draws = channel.sample_sr_fading(rng, p, 100_000)
    assert np.all(draws >= 0)
    assert draws.mean() == pytest.approx(1.606, rel=0.02)
    se = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - channel.sr_fading_mean(p)) < 3 * se
    ks = stats.kstest(draws[:10_000], lambda w: channel.sr_fading_cdf(w, p))
    assert ks.pvalue > 0.01


def test_sr_inverse_cdf_roundtrip(p):
    u = np.array([0.01, 0.3, 0.5, 0.9, 0.999])
    w = channel.sr_inverse_cdf(u, p)
    assert np.allclose(channel.sr_fading_cdf(w, p), u, atol=1e-9)


def test_sr_mean_cases(p):
    assert channel.sr_fading_mean(p) == pytest.approx(1.606)
    assert channel.sr_fading_mean(p.replace(b0=0.0)) == pytest.approx(p.omega)
    assert channel.sr_fading_mean(p.replace(omega=0.0, b0=0.5)) == pytest.approx(1.0)


def test_pointing_mean(p):
    assert channel.pointing_gain_mean(p) == pytest.approx(PE_MEAN_CLOSED, rel=1e-12)
    assert channel.pointing_gain_mean(p.replace(sigma_jitter=0.0)) == pytest.approx(
        p.a0 * p.eta_s**2 / (1 + p.eta_s**2))
    assert channel.pointing_gain_mean(p.replace(sigma_jitter=1.0)) == 0.0


def test_pointing_sampler(p, rng):
    draws = channel.sample_pointing_gain(rng, p, 100_000)
    assert np.all((draws >= 0) & (draws <= p.a0))
    assert draws.mean() == pytest.approx(PE_MEAN_CLOSED, rel=0.02)
    se = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - PE_MEAN_EXACT) < 3 * se
    tight = channel.sample_pointing_gain(rng, p.replace(sigma_jitter=1e-6), 100_000)
    assert np.mean(tight == 0) < 1e-6 + 1e-5  # at most one miss would already be 1e-5


def test_path_gain(p):
    assert channel.path_gain(1000.0, HopClass.C1, p) == pytest.approx(PATH_GAIN_1000, rel=1e-12)
    assert channel.path_gain(2000.0, HopClass.C1, p) == pytest.approx(PATH_GAIN_1000 / 4, rel=1e-12)
    with pytest.raises(channel.LinkInfeasible):
        channel.path_gain(3500.0, HopClass.C1, p)
    with pytest.raises(ValueError):
        SystemParams(zeta_ss_db=-1.0).channel()


def test_received_power(p):
    assert channel.received_power(1500.0, HopClass.C1, 1.606, p) == pytest.approx(RX_POWER_1500, rel=1e-12)
    assert channel.received_power(1500.0, HopClass.C1, 0.0, p) == 0.0
    doubled = channel.received_power(1500.0, HopClass.C1, 1.0, p.replace(p1=2 * p.p1))
    assert doubled == pytest.approx(2 * channel.received_power(1500.0, HopClass.C1, 1.0, p))
