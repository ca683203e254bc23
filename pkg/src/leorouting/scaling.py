"""Nearest-relay deviation statistics and distance scaling factors.

A distance scaling factor is the mean realized hop length, when relays are
the BPP points nearest to their ideal positions, divided by the ideal chord.

All three factors reduce to one primitive, the mean distance from a fixed
point to the BPP point nearest a reference direction.  The azimuthal average
of that distance is a complete elliptic integral of the second kind; the
polar average is taken over ``u = cos^2(psi / 2)``, whose law is Beta(N, 1),
after the substitution ``t = u**N`` which spreads the mass uniformly on
[0, 1] however large N is.
"""

from __future__ import annotations

import math
import threading

import numpy as np
from scipy import integrate, special

from . import geometry
from .params import ScalingContext

QUAD_RTOL = 1e-10
_CACHE: dict = {}
_CACHE_LOCK = threading.Lock()


class QuadratureError(RuntimeError):
    pass


def nearest_polar_pdf(psi, n: int):
    """Density of the angle between a direction and its nearest of ``n`` BPP points."""
    psi = np.asarray(psi, dtype=float)
    c2 = np.cos(psi / 2.0) ** 2
    out = 0.5 * n * np.sin(psi) * np.where(c2 > 0, c2, 0.0) ** (n - 1)
    return float(out) if out.ndim == 0 else out


def nearest_polar_cdf(psi, n: int):
    psi = np.asarray(psi, dtype=float)
    # 1 - cos(psi/2)^(2n) computed without cancellation for small psi
    out = -np.expm1(2.0 * n * np.log(np.maximum(np.cos(psi / 2.0), 1e-300)))
    out = np.where(psi >= math.pi, 1.0, out)
    return float(out) if out.ndim == 0 else out


def _azimuth_mean_distance(one_minus_u, r1, r2, theta):
    """Mean over a uniform azimuth of the distance between (r1, psi, .) and (r2, theta, 0)."""
    u = 1.0 - one_minus_u
    cos_psi = 1.0 - 2.0 * one_minus_u
    sin_psi = 2.0 * np.sqrt(np.maximum(u * one_minus_u, 0.0))
    one_minus_cc = 2.0 * one_minus_u + cos_psi * 2.0 * np.sin(theta / 2.0) ** 2
    a = (r1 - r2) ** 2 + 2.0 * r1 * r2 * one_minus_cc
    b = 2.0 * r1 * r2 * sin_psi * np.sin(theta)
    s = a + b
    m = np.divide(2.0 * b, s, out=np.zeros_like(s), where=s > 0)
    return (2.0 / math.pi) * np.sqrt(np.maximum(s, 0.0)) * special.ellipe(np.clip(m, 0.0, 1.0))


def mean_nearest_distance(n: int, r_dev: float, r_other: float, theta):
    """Mean distance from ``(r_other, theta, 0)`` to the point of an ``n``-point
    BPP on radius ``r_dev`` nearest to the pole direction."""
    if n < 1:
        raise ValueError("need at least one device")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))

    def integrand(t):
        if t <= 0.0:
            one_minus_u = 1.0
        else:
            one_minus_u = -math.expm1(math.log(t) / n)
        return _azimuth_mean_distance(one_minus_u, r_dev, r_other, theta)

    scale = r_dev + r_other
    val, err = integrate.quad_vec(integrand, 0.0, 1.0, epsrel=QUAD_RTOL,
                                  epsabs=QUAD_RTOL * 1e-3 * scale, norm="max", limit=2000)
    if not np.all(np.isfinite(val)):
        raise QuadratureError("non-finite mean nearest distance")
    if err > 1e-6 * scale:
        raise QuadratureError(f"quadrature did not converge (err={err:g})")
    return val


def _cached(kind: str, theta, ctx: ScalingContext, compute):
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
    keys = [(kind, ctx, min(round(float(t), 9), math.pi)) for t in theta_arr]
    with _CACHE_LOCK:
        missing = sorted({k[2] for k in keys if k not in _CACHE})
    if missing:
        vals = compute(np.array(missing))
        with _CACHE_LOCK:
            for t, v in zip(missing, vals):
                _CACHE[(kind, ctx, t)] = float(v)
    out = np.array([_CACHE[k] for k in keys])
    return float(out[0]) if np.ndim(theta) == 0 else out.reshape(np.shape(theta))


def _check_theta(theta, allow_zero=True):
    t = np.asarray(theta, dtype=float)
    lo_ok = np.all(t >= 0) if allow_zero else np.all(t > 0)
    if not lo_ok or np.any(t > math.pi):
        raise ValueError("central angle outside the valid range")


def alpha1(theta, ctx: ScalingContext):
    """Scaling factor of a first or last hop (one satellite end deviates)."""
    _check_theta(theta)

    def compute(th):
        chord = geometry.chord_ground_sat(th, ctx.r_earth, ctx.r_sat)
        return mean_nearest_distance(ctx.n_sat, ctx.r_sat, ctx.r_earth, th) / chord

    return _cached("a1", theta, ctx, compute)


def gateway_deviation_factor(theta, ctx: ScalingContext):
    """Same construction as :func:`alpha1` with the gateway end deviating."""
    _check_theta(theta)

    def compute(th):
        chord = geometry.chord_ground_sat(th, ctx.r_earth, ctx.r_sat)
        return mean_nearest_distance(ctx.n_gw, ctx.r_earth, ctx.r_sat, th) / chord

    return _cached("g1", theta, ctx, compute)


def alpha2(theta, ctx: ScalingContext):
    """Scaling factor of a middle STR hop.

    Gateway deviation is applied first, then satellite deviation, treating the
    two increments as independent and sequential.
    """
    return alpha1(theta, ctx) * gateway_deviation_factor(theta, ctx)


def alpha3_inner(theta, ctx: ScalingContext):
    """Single-satellite increment of an inter-satellite hop."""
    _check_theta(theta, allow_zero=False)

    def compute(th):
        chord = geometry.chord_sat_sat(th, ctx.r_sat)
        return mean_nearest_distance(ctx.n_sat, ctx.r_sat, ctx.r_sat, th) / chord

    return _cached("s1", theta, ctx, compute)


def alpha3(theta, ctx: ScalingContext):
    """Scaling factor of a middle ISR hop: square of the one-end increment."""
    return np.square(alpha3_inner(theta, ctx)) if np.ndim(theta) else alpha3_inner(theta, ctx) ** 2


def clear_cache():
    with _CACHE_LOCK:
        _CACHE.clear()
