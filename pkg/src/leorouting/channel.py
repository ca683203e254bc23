"""Small-scale fading, free-space path gain and received power per hop class."""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy import special

from .params import ChannelParams

SR_REL_TOL = 1e-12
SR_MAX_TERMS = 500
SR_BISECTION_RTOL = 1e-10


class HopClass(enum.Enum):
    C1 = "ground->satellite"
    C2 = "satellite->ground"
    C3 = "satellite->satellite"

    @property
    def satellite_tx(self) -> bool:
        return self is not HopClass.C1


class LinkInfeasible(ValueError):
    """A hop is longer than the maximum communicable distance of its class."""


def lmax(cls: HopClass, p: ChannelParams) -> float:
    return {HopClass.C1: p.lmax1, HopClass.C2: p.lmax2, HopClass.C3: p.lmax3}[cls]


def transmit_power(cls: HopClass, p: ChannelParams) -> float:
    return {HopClass.C1: p.p1, HopClass.C2: p.p2, HopClass.C3: p.p3}[cls]


# ---------------------------------------------------------------------------
# shadowed-Rician fading

def _sr_check(p: ChannelParams):
    if not (p.b0 > 0 and p.n0 > 0 and p.omega >= 0):
        raise ValueError("invalid shadowed-Rician parameters")


def _sr_series_weights(p: ChannelParams) -> np.ndarray:
    """Mixture weights of the series, truncated once a term is negligible."""
    _sr_check(p)
    m, two_b = p.n0, 2.0 * p.b0
    delta = p.omega / (two_b * m + p.omega)
    if delta == 0.0:
        return np.array([1.0])
    z = np.arange(SR_MAX_TERMS)
    log_w = (m * math.log1p(-delta) + special.gammaln(m + z) - special.gammaln(m)
             - special.gammaln(z + 1) + z * math.log(delta))
    w = np.exp(log_w)
    csum = np.cumsum(w)
    # stop at the first term past the mode whose contribution is < tol of the sum
    past_mode = z > (m - 1) * delta / (1 - delta)
    small = past_mode & (w < SR_REL_TOL * csum)
    stop = int(np.argmax(small)) + 1 if small.any() else SR_MAX_TERMS
    return w[:stop]


def sr_fading_cdf(w, p: ChannelParams):
    """CDF of the shadowed-Rician power gain (Pochhammer / incomplete-gamma series)."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("fading power must be non-negative")
    weights = _sr_series_weights(p)
    z = np.arange(weights.size)
    x = w[..., None] / (2.0 * p.b0)
    # Gamma_l(z+1, x) / Gamma(z+1) is the regularised lower incomplete gamma
    out = np.clip((weights * special.gammainc(z + 1, x)).sum(axis=-1), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def sr_fading_pdf(w, p: ChannelParams):
    """Density matching :func:`sr_fading_cdf` (used by diagnostics and tests)."""
    w = np.asarray(w, dtype=float)
    weights = _sr_series_weights(p)
    z = np.arange(weights.size)
    scale = 2.0 * p.b0
    dens = (weights * np.exp(special.xlogy(z, w[..., None] / scale)
                             - w[..., None] / scale - special.gammaln(z + 1)) / scale).sum(axis=-1)
    return float(dens) if dens.ndim == 0 else dens


def sr_fading_mean(p: ChannelParams) -> float:
    return 2.0 * p.b0 + p.omega


def _sr_upper(p: ChannelParams) -> float:
    # the truncated series tops out a little below 1, so stop well short of it
    hi = 10.0 * sr_fading_mean(p)
    for _ in range(64):
        if sr_fading_cdf(hi, p) >= 1.0 - 1e-10:
            break
        hi *= 2.0
    return hi


def sr_inverse_cdf(u, p: ChannelParams):
    """Invert the series CDF by vectorised bisection to ``SR_BISECTION_RTOL``."""
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    hi = np.full_like(u, _sr_upper(p))
    while True:
        mid = 0.5 * (lo + hi)
        below = sr_fading_cdf(mid, p) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= SR_BISECTION_RTOL * np.maximum(hi, 1e-300)):
            break
    out = 0.5 * (lo + hi)
    return float(out) if out.ndim == 0 else out


def sample_sr_fading(rng: np.random.Generator, p: ChannelParams, size=None):
    """Draw from the mixture the series CDF describes: a negative-binomial
    number of extra shape units, then a Gamma with scale ``2 b0``."""
    _sr_check(p)
    delta = p.omega / (2.0 * p.b0 * p.n0 + p.omega)
    z = rng.negative_binomial(p.n0, 1.0 - delta, size=size) if delta > 0 else np.zeros(size, dtype=int)
    out = rng.gamma(np.asarray(z) + 1.0, 2.0 * p.b0, size=size)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# pointing error

def sample_pointing_gain(rng: np.random.Generator, p: ChannelParams, size=None):
    """Pointing-error power gain on an optical inter-satellite link.

    The deviation angle is Rayleigh with scale ``sigma_jitter``.  Given the
    angle, the conditional density integrates to ``cos(theta_d)``; the missing
    mass is a beam miss with zero gain.
    """
    theta_d = rng.rayleigh(p.sigma_jitter, size=size)
    hit = rng.uniform(size=size) < np.cos(theta_d)
    gain = p.a0 * rng.uniform(size=size) ** (1.0 / p.eta_s**2)
    out = np.where(hit, gain, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def pointing_gain_mean(p: ChannelParams) -> float:
    """Mean pointing gain using the second-order expansion of cos(theta_d)."""
    eta2 = p.eta_s**2
    return p.a0 * eta2 / (1.0 + eta2) * (1.0 - p.sigma_jitter**2)


def mean_fading(cls: HopClass, p: ChannelParams) -> float:
    return pointing_gain_mean(p) if cls is HopClass.C3 else sr_fading_mean(p)


def sample_fading(cls: HopClass, rng: np.random.Generator, p: ChannelParams, size=None):
    if cls is HopClass.C3:
        return sample_pointing_gain(rng, p, size)
    return sample_sr_fading(rng, p, size)


# ---------------------------------------------------------------------------
# large-scale gain and received power

def path_gain(l_km, cls: HopClass, p: ChannelParams):
    """Free-space gain (lambda / 4 pi l)^2 times air attenuation; ``l`` in km."""
    l_km = np.asarray(l_km, dtype=float)
    if np.any(l_km <= 0):
        raise ValueError("hop distance must be positive")
    if np.any(l_km > lmax(cls, p) * (1 + 1e-12)):
        raise LinkInfeasible(f"{cls.name} hop of {np.max(l_km):.1f} km exceeds {lmax(cls, p)} km")
    if cls is HopClass.C3:
        lam, zeta = p.lambda_ss, p.zeta_ss
    else:
        lam, zeta = p.lambda_st, p.zeta_st
    out = (lam / (4.0 * math.pi * l_km * 1e3)) ** 2 * zeta
    return float(out) if out.ndim == 0 else out


def received_power(l_km, cls: HopClass, fading, p: ChannelParams):
    """Received power in mW."""
    fading = np.asarray(fading, dtype=float)
    if np.any(fading < 0):
        raise ValueError("fading gain must be non-negative")
    gain = p.g_ss if cls is HopClass.C3 else p.g_st
    out = transmit_power(cls, p) * gain * path_gain(l_km, cls, p) * fading
    return float(out) if np.ndim(out) == 0 else out
