"""Analytic routing availability and energy efficiency.

Availability multiplies per-hop lens probabilities: a hop is available when
at least one relay of an ``n``-point BPP falls inside the intersection of two
spherical caps, one around each end, whose angular radii are the maximum
central angles of the two links.

Energy efficiency averages the mean-fading hop efficiency over the density of
the realized central angle of each hop.  Realized angles come from the
nearest-device density; middle hops reuse it through a change of variables
that stretches the chord by the relevant distance scaling factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import scaling
from .channel import HopClass
from .energy import avg_hop_ee_formula, max_central_angle
from .params import ChannelParams, ScalingContext
from .planner import DecisionVars, RouteKind

CLAMP_BUDGET = 1e-9
AZIMUTH_RTOL = 1e-10
GL_NODES = 16
GL_PANELS = 48
TAIL_EXPONENT = 60.0  # window half-width covers exp(-TAIL_EXPONENT) of the tail


class NumericalError(ArithmeticError):
    """A clamp budget or density sanity check was violated."""


def _clamped_acos(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + CLAMP_BUDGET):
        raise NumericalError("arccos argument outside [-1, 1] beyond the clamp budget")
    return np.arccos(np.clip(x, -1.0, 1.0))


# ---------------------------------------------------------------------------
# availability

def lens_area(theta1, theta2, theta_c):
    """Area on the unit sphere of the intersection of two caps with angular
    radii ``theta1``, ``theta2`` whose centres are ``theta_c`` apart."""
    t1, t2, tc = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (theta1, theta2, theta_c)))
    out = np.empty(t1.shape)
    small = np.minimum(t1, t2)
    disjoint = tc >= t1 + t2
    nested = tc <= np.abs(t1 - t2)
    out[disjoint] = 0.0
    out[nested & ~disjoint] = 2.0 * math.pi * (1.0 - np.cos(small[nested & ~disjoint]))
    m = ~(disjoint | nested)
    if np.any(m):
        c1, c2, cc = np.cos(t1[m]), np.cos(t2[m]), np.cos(tc[m])
        s1, s2, sc = np.sin(t1[m]), np.sin(t2[m]), np.sin(tc[m])
        clip = lambda v: np.arccos(np.clip(v, -1.0, 1.0))
        out[m] = 2.0 * (math.pi - clip((cc - c1 * c2) / (s1 * s2))
                        - c1 * clip((c2 - cc * c1) / (sc * s1))
                        - c2 * clip((c1 - cc * c2) / (sc * s2)))
    out = np.clip(out, 0.0, 4.0 * math.pi)
    return float(out) if out.ndim == 0 else out


def lens_area_printed(theta1: float, theta2: float, theta_c: float) -> float:
    """Lens area from the single-integral segment formula with the small-angle
    ``psi`` expressions, kept as a diagnostic against :func:`lens_area`."""
    x, y = math.cos(theta1), math.cos(theta2)
    if abs(x - y) < 1e-12:
        psi1 = theta1 - theta_c / 2.0
        psi2 = theta2 - theta_c / 2.0
    else:
        r = math.sqrt(max(2 * x * x - 4 * x * y + 2 * y * y + x * y * theta_c**2, 0.0))
        psi1 = theta1 - (x * theta_c - r) / (x - y)
        psi2 = theta2 - (y * theta_c - r) / (x - y)

    def segment(theta, psi):
        lo, hi = math.cos(theta) * math.tan(theta - psi), math.sin(theta)
        if lo >= hi:
            return 0.0
        f = lambda l: 2.0 * math.asin(min(1.0, math.sqrt(max(math.sin(theta)**2 - l * l, 0.0))))
        return integrate.quad(f, lo, hi, epsrel=1e-8)[0]

    return segment(theta1, psi1) + segment(theta2, psi2)


def single_hop_availability(theta1, theta2, theta_c, n: int, radius: float = 1.0):
    """Probability that at least one of ``n`` uniform relays lies in the lens.

    ``radius`` only fixes units; the lens fraction is scale free.
    """
    if n < 0:
        raise ValueError("device count must be non-negative")
    if radius <= 0:
        raise ValueError("radius must be positive")
    frac = np.clip(np.asarray(lens_area(theta1, theta2, theta_c)) / (4.0 * math.pi), 0.0, 1.0)
    # 1 - (1 - frac)^n without cancellation
    out = -np.expm1(n * np.log1p(-np.minimum(frac, 1.0 - 1e-300)))
    out = np.where(frac >= 1.0, 1.0 if n > 0 else 0.0, out)
    return float(out) if out.ndim == 0 else out


def _inflated_gs(alpha, theta, ctx: ScalingContext):
    """Central angle whose ground-satellite chord is ``alpha`` times that at ``theta``."""
    s = ctx.r_sat**2 + ctx.r_earth**2
    c = (s - alpha**2 * (s - 2 * ctx.r_sat * ctx.r_earth * np.cos(theta))) / (2 * ctx.r_sat * ctx.r_earth)
    return _clamped_acos(c)


def _ratio(theta_tilde, theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise ValueError("angle ratio needs a positive angle")
    out = np.asarray(theta_tilde) / theta
    return float(out) if out.ndim == 0 else out


def tilde_alpha_g(theta, ctx: ScalingContext):
    """Angle inflation from gateway deviation alone (chord ratio alpha2 / alpha1)."""
    g = scaling.alpha2(theta, ctx) / scaling.alpha1(theta, ctx)
    return _ratio(_inflated_gs(g, theta, ctx), theta)


def tilde_alpha_s(theta, ctx: ScalingContext):
    """Angle inflation from satellite deviation (chord ratio alpha1)."""
    return _ratio(_inflated_gs(scaling.alpha1(theta, ctx), theta, ctx), theta)


@dataclass(frozen=True)
class AngleScaleFactors:
    ctx: ScalingContext

    def tilde_alpha_g(self, theta):
        return tilde_alpha_g(theta, self.ctx)

    def tilde_alpha_s(self, theta):
        return tilde_alpha_s(theta, self.ctx)


def _inflated_angle(which, theta, ctx):
    # the product ratio * theta, defined at theta = 0 as well
    if which == "g":
        alpha = scaling.alpha2(theta, ctx) / scaling.alpha1(theta, ctx)
    else:
        alpha = scaling.alpha1(theta, ctx)
    return float(_inflated_gs(alpha, theta, ctx))


def availability_str(decision: DecisionVars, p: ChannelParams, ctx: ScalingContext) -> float:
    """Product of lens probabilities along an STR route, hops treated as independent.

    Lenses with ground ends hold satellite relays (``n_sat`` devices), lenses
    with satellite ends hold gateway relays (``n_gw``); exponents follow the
    middle-hop counts of the composition formula.
    """
    if decision.kind is not RouteKind.STR:
        raise ValueError("expected an STR decision")
    tm1 = max_central_angle(HopClass.C1, p)
    tm2 = max_central_angle(HopClass.C2, p)
    if math.isnan(tm1) or math.isnan(tm2):
        return 0.0
    t1, t2, n = decision.theta1, decision.theta2, decision.n_hops
    g1, g2 = _inflated_angle("g", t1, ctx), _inflated_angle("g", t2, ctx)
    s1, s2 = _inflated_angle("s", t1, ctx), _inflated_angle("s", t2, ctx)
    pa = lambda tc, dev: single_hop_availability(tm1, tm2, tc, dev)
    out = pa(t1 + g2, ctx.n_sat) * pa(t2 + g1, ctx.n_sat)
    out *= pa(g1 + g2, ctx.n_sat) ** max(0, n // 2 - 1)
    out *= pa(s1 + s2, ctx.n_gw) ** max(0, n // 2 - 2)
    return float(out)


def availability_isr(decision: DecisionVars, p: ChannelParams, ctx: ScalingContext) -> float:
    """Product of lens probabilities along an ISR route (satellite relays only)."""
    if decision.kind is not RouteKind.ISR:
        raise ValueError("expected an ISR decision")
    tm1 = max_central_angle(HopClass.C1, p)
    tm2 = max_central_angle(HopClass.C2, p)
    tm3 = max_central_angle(HopClass.C3, p)
    if math.isnan(tm1) or math.isnan(tm2):
        return 0.0
    n_s = ctx.n_sat
    if decision.n_hops == 2:
        return float(single_hop_availability(tm1, tm2, decision.theta_big, n_s))
    t3 = decision.theta3
    s3 = _inflated_angle("s", t3, ctx)
    out = single_hop_availability(tm1, tm3, decision.theta1 + s3, n_s)
    out *= single_hop_availability(tm2, tm3, decision.theta2 + s3, n_s)
    out *= single_hop_availability(tm3, tm3, 2.0 * s3, n_s) ** (decision.n_hops - 2)
    return float(out)


def availability(decision: DecisionVars, p: ChannelParams, ctx: ScalingContext) -> float:
    if decision.kind is RouteKind.STR:
        return availability_str(decision, p, ctx)
    return availability_isr(decision, p, ctx)


# ---------------------------------------------------------------------------
# realized central-angle densities

def _nearest_azimuth_density(theta_c, phi: float, n: int):
    """N/(4 pi) times the azimuth integral of the nearest-device density.

    Evaluated as (A + B)^(n-1) times the integral of ((A + B cos v)/(A + B))^(n-1)
    so the integrand stays in [0, 1] for any ``n``.
    """
    theta_c = np.atleast_1d(np.asarray(theta_c, dtype=float))
    a = 0.5 * (1.0 + np.cos(theta_c) * math.cos(phi))
    b = 0.5 * np.sin(theta_c) * math.sin(phi)
    top = a + b
    m = n - 1
    if m == 0:
        return np.full(theta_c.shape, n / (4.0 * math.pi) * 2.0 * math.pi)
    safe_top = np.where(top > 0, top, 1.0)

    def integrand(v):
        r = (a + b * math.cos(v)) / safe_top
        return np.exp(m * np.log(np.maximum(r, 1e-300)))

    val, _ = integrate.quad_vec(integrand, 0.0, math.pi, epsrel=AZIMUTH_RTOL, epsabs=1e-14,
                                norm="max", limit=4000)
    log_scale = m * np.log(np.maximum(top, 1e-300))
    out = n / (4.0 * math.pi) * 2.0 * val * np.exp(log_scale)
    return np.where(top > 0, out, 0.0)


def _shape(out, like):
    return float(out[0]) if np.ndim(like) == 0 else out.reshape(np.shape(like))


def angle_pdf_c1(theta_c, phi: float, n_sat: int):
    """Density of the central angle between a fixed end and the device
    nearest to an ideal position ``phi`` away from it."""
    t = np.atleast_1d(np.asarray(theta_c, dtype=float))
    out = np.sin(t) * _nearest_azimuth_density(t, phi, n_sat)
    return _shape(out, theta_c)


def _xi(theta_c, alpha, ctx: ScalingContext):
    s = ctx.r_sat**2 + ctx.r_earth**2
    rr = 2.0 * ctx.r_sat * ctx.r_earth
    return (s - (s - rr * np.cos(theta_c)) / alpha**2) / rr


def angle_pdf_c2(theta_c, phi: float, ctx: ScalingContext):
    """Middle STR hop: first-hop angle pushed through an alpha1-stretched chord.

    Zero where the pre-image angle does not exist.
    """
    t = np.atleast_1d(np.asarray(theta_c, dtype=float))
    a1 = float(scaling.alpha1(phi, ctx))
    xi = _xi(t, a1, ctx)
    inside = np.abs(xi) <= 1.0
    out = np.zeros_like(t)
    if np.any(inside):
        pre = np.arccos(xi[inside])
        out[inside] = (_nearest_azimuth_density(pre, phi, ctx.n_sat)
                       * np.sin(t[inside]) / a1**2)
    return _shape(out, theta_c)


def angle_pdf_c3(theta_c, phi: float, ctx: ScalingContext):
    """Middle ISR hop: one-end deviation density stretched by the other end's
    increment ``sqrt(alpha3)``; the one-end density is conditioned on ``phi``."""
    if phi <= 0:
        raise ValueError("inter-satellite ideal angle must be positive")
    t = np.atleast_1d(np.asarray(theta_c, dtype=float))
    a3 = float(scaling.alpha3(phi, ctx))
    s = np.sin(t / 2.0) / math.sqrt(a3)
    inside = s <= 1.0
    out = np.zeros_like(t)
    if np.any(inside):
        pre = 2.0 * np.arcsin(s[inside])
        jac = np.cos(t[inside] / 2.0) / np.sqrt(np.maximum(a3 - np.sin(t[inside] / 2.0) ** 2, 1e-300))
        out[inside] = angle_pdf_c1(pre, phi, ctx.n_sat) * jac
    return _shape(out, theta_c)


def _window(phi: float, n: int) -> tuple[float, float]:
    # nearest-device angular offset exceeds w with probability ~ exp(-n w^2 / 2)
    w = math.sqrt(2.0 * TAIL_EXPONENT / max(n, 1))
    return max(0.0, phi - w), min(math.pi, phi + w)


def _window_c2(phi: float, ctx: ScalingContext) -> tuple[float, float]:
    a1 = float(scaling.alpha1(phi, ctx))
    lo, hi = _window(phi, ctx.n_sat)
    s = ctx.r_sat**2 + ctx.r_earth**2
    rr = 2.0 * ctx.r_sat * ctx.r_earth
    img = lambda t: math.acos(max(-1.0, min(1.0, (s - a1**2 * (s - rr * math.cos(t))) / rr)))
    return img(lo), img(hi)


def _window_c3(phi: float, ctx: ScalingContext) -> tuple[float, float]:
    root = math.sqrt(float(scaling.alpha3(phi, ctx)))
    lo, hi = _window(phi, ctx.n_sat)
    img = lambda t: 2.0 * math.asin(min(1.0, root * math.sin(t / 2.0)))
    return img(lo), img(hi)


def _gl_grid(lo: float, hi: float, panels: int = GL_PANELS, nodes: int = GL_NODES):
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = np.diff(edges)[:, None] / 2.0
    mid = (edges[:-1] + edges[1:])[:, None] / 2.0
    return (mid + half * x).ravel(), (half * w).ravel()


@dataclass(frozen=True)
class HopAverage:
    ee: float
    mass: float  # integral of the density before renormalisation

    @property
    def deficit(self) -> float:
        return 1.0 - self.mass


def _hop_average(pdf, cls: HopClass, lo: float, hi: float, p: ChannelParams,
                 panels: int = GL_PANELS) -> HopAverage:
    x, w = _gl_grid(lo, hi, panels)
    f = pdf(x)
    if np.any(f < -1e-12):
        raise NumericalError("negative density")
    mass = float(np.dot(w, f))
    if not mass > 0:
        raise NumericalError("density has no mass on its window")
    ee = float(np.dot(w, f * avg_hop_ee_formula(x, cls, p))) / mass
    return HopAverage(ee, mass)


def hop_averages(decision: DecisionVars, p: ChannelParams, ctx: ScalingContext,
                 panels: int = GL_PANELS) -> dict:
    """Density-averaged hop efficiency for every hop role of the route."""
    n_s = ctx.n_sat
    out = {}
    t1, t2 = decision.theta1, decision.theta2
    out["first"] = _hop_average(lambda x: angle_pdf_c1(x, t1, n_s), HopClass.C1,
                                *_window(t1, n_s), p, panels)
    out["last"] = _hop_average(lambda x: angle_pdf_c1(x, t2, n_s), HopClass.C2,
                               *_window(t2, n_s), p, panels)
    if decision.kind is RouteKind.STR and decision.n_hops > 2:
        for key, th, cls in (("middle_c1", t1, HopClass.C1), ("middle_c2", t2, HopClass.C2)):
            out[key] = _hop_average(lambda x, th=th: angle_pdf_c2(x, th, ctx), cls,
                                    *_window_c2(th, ctx), p, panels)
    if decision.kind is RouteKind.ISR and decision.n_hops > 2:
        t3 = decision.theta3
        out["middle_c3"] = _hop_average(lambda x: angle_pdf_c3(x, t3, ctx), HopClass.C3,
                                        *_window_c3(t3, ctx), p, panels)
    return out


def role_counts(decision: DecisionVars) -> dict:
    n = decision.n_hops
    counts = {"first": 1, "last": 1}
    if decision.kind is RouteKind.STR and n > 2:
        counts["middle_c1"] = counts["middle_c2"] = n // 2 - 1
    if decision.kind is RouteKind.ISR and n > 2:
        counts["middle_c3"] = n - 2
    return counts


def _combine(decision, averages) -> float:
    counts = role_counts(decision)
    return 1.0 / math.fsum(counts[k] / averages[k].ee for k in counts)


def ee_isr_analytic(decision: DecisionVars, p: ChannelParams, ctx: ScalingContext) -> float:
    """Route efficiency of an ISR decision from density-averaged hop efficiencies.

    Hop reciprocals are summed with weights 1, N - 2 and 1.
    """
    if decision.kind is not RouteKind.ISR:
        raise ValueError("expected an ISR decision")
    return _combine(decision, hop_averages(decision, p, ctx))


def ee_str_analytic(decision: DecisionVars, p: ChannelParams, ctx: ScalingContext) -> float:
    """Route efficiency of an STR decision; middle C1 and C2 hops each weigh N/2 - 1."""
    if decision.kind is not RouteKind.STR:
        raise ValueError("expected an STR decision")
    return _combine(decision, hop_averages(decision, p, ctx))


def ee_analytic(decision: DecisionVars, p: ChannelParams, ctx: ScalingContext) -> float:
    if decision.kind is RouteKind.STR:
        return ee_str_analytic(decision, p, ctx)
    return ee_isr_analytic(decision, p, ctx)
