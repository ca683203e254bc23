"""Per-hop and per-route energy efficiency in bits per Joule.

The price ratio factor ``beta`` weights every hop whose transmitter is a
satellite (classes C2 and C3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import geometry
from .channel import HopClass, mean_fading, received_power, transmit_power
from .params import ChannelParams

LN2 = math.log(2.0)


@dataclass(frozen=True)
class HopEE:
    cls: HopClass
    theta: float
    distance: float
    ee: float


def _noise(cls: HopClass, p: ChannelParams) -> float:
    return p.noise_gnd if cls is HopClass.C2 else p.noise_sat


def _bandwidth(cls: HopClass, p: ChannelParams) -> float:
    return p.b_ss if cls is HopClass.C3 else p.b_st


def _weighted_power_w(cls: HopClass, p: ChannelParams) -> float:
    w = transmit_power(cls, p) * 1e-3
    return p.beta * w if cls.satellite_tx else w


def _shannon_ee(cls: HopClass, snr, p: ChannelParams):
    return _bandwidth(cls, p) * np.log1p(snr) / LN2 / _weighted_power_w(cls, p)


def hop_ee_realized(cls: HopClass, l_km, fading, p: ChannelParams):
    """Energy efficiency of one hop for a given distance and fading draw."""
    snr = received_power(l_km, cls, fading, p) / _noise(cls, p)
    out = _shannon_ee(cls, snr, p)
    return float(out) if np.ndim(out) == 0 else out


def hop_distance(cls: HopClass, theta, p: ChannelParams):
    if cls is HopClass.C3:
        return geometry.chord_sat_sat(theta, p.r_sat)
    return geometry.chord_ground_sat(theta, p.r_earth, p.r_sat)


def max_central_angle(cls: HopClass, p: ChannelParams) -> float:
    if cls is HopClass.C3:
        return 2.0 * math.asin(min(1.0, p.lmax3 / (2.0 * p.r_sat)))
    lm = p.lmax1 if cls is HopClass.C1 else p.lmax2
    c = (p.r_sat**2 + p.r_earth**2 - lm**2) / (2.0 * p.r_sat * p.r_earth)
    if c > 1.0:
        return math.nan  # max distance below the altitude: no reachable angle
    return math.acos(max(-1.0, c))


def avg_hop_ee_formula(theta, cls: HopClass, p: ChannelParams):
    """Mean-fading hop efficiency for any central angle, without range checks.

    The mean fading gain is substituted inside the logarithm, so this is an
    upper bound on the ergodic efficiency (Jensen).
    """
    theta = np.asarray(theta, dtype=float)
    l_m = np.asarray(hop_distance(cls, np.clip(theta, 0.0, math.pi), p)) * 1e3
    if cls is HopClass.C3:
        lam, zeta, gain = p.lambda_ss, p.zeta_ss, p.g_ss
    else:
        lam, zeta, gain = p.lambda_st, p.zeta_st, p.g_st
    with np.errstate(divide="ignore"):
        snr = (transmit_power(cls, p) * zeta * gain * mean_fading(cls, p)
               * (lam / (4.0 * math.pi * l_m)) ** 2 / _noise(cls, p))
    out = _shannon_ee(cls, snr, p)
    return float(out) if out.ndim == 0 else out


def avg_hop_ee(theta, cls: HopClass, p: ChannelParams):
    """Average hop efficiency at central angle ``theta`` (range-checked)."""
    theta_arr = np.asarray(theta, dtype=float)
    tmax = max_central_angle(cls, p)
    if math.isnan(tmax) or np.any(theta_arr < 0) or np.any(theta_arr > tmax * (1 + 1e-12)):
        raise ValueError(f"central angle outside [0, {tmax}] for {cls.name}")
    if cls is HopClass.C3 and np.any(theta_arr == 0):
        raise ValueError("zero-length inter-satellite hop")
    return avg_hop_ee_formula(theta, cls, p)


def route_ee(hops: Iterable) -> float:
    """Combine hop efficiencies by summing reciprocals; any zero hop gives 0."""
    ees = [h.ee if isinstance(h, HopEE) else float(h) for h in hops]
    if not ees:
        raise ValueError("a route needs at least one hop")
    if any(e <= 0.0 for e in ees):
        return 0.0
    return 1.0 / math.fsum(1.0 / e for e in ees)


def ergodic_hop_ee_mc(theta: float, cls: HopClass, p: ChannelParams,
                      rng: np.random.Generator, n: int = 10_000):
    """Monte Carlo mean and standard error of the realized hop efficiency.

    Diagnostic for the Jensen gap of :func:`avg_hop_ee`.
    """
    from .channel import sample_fading

    l = hop_distance(cls, theta, p)
    ee = np.asarray(hop_ee_realized(cls, l, sample_fading(cls, rng, p, n), p))
    return float(ee.mean()), float(ee.std(ddof=1) / math.sqrt(n))
