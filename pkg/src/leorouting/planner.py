"""Relay planning: ideal geometry, exhaustive searches and relay selection."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry, scaling
from .channel import HopClass, lmax
from .energy import HopEE, avg_hop_ee_formula, hop_distance, max_central_angle, route_ee
from .geometry import PointSet, SphericalPoint
from .params import ChannelParams, ScalingContext

DEFAULT_EPSILON = 0.05
DEFAULT_N_IN = 20
HOP_CAP = {"STR": 400, "ISR": 200}
REMARK_PATIENCE = 6


class RouteKind(str, enum.Enum):
    STR = "STR"
    ISR = "ISR"


class Infeasible(Exception):
    """No decision satisfies the hop-length constraints."""


@dataclass(frozen=True)
class DecisionVars:
    kind: RouteKind
    n_hops: int
    theta1: float
    theta2: float
    theta_big: float
    theta3: float = math.nan

    def __post_init__(self):
        kind = RouteKind(self.kind)
        object.__setattr__(self, "kind", kind)
        n = self.n_hops
        if kind is RouteKind.STR:
            if n < 2 or n % 2:
                raise ValueError("STR needs an even hop count >= 2")
            total = n / 2 * (self.theta1 + self.theta2)
        else:
            if n < 2:
                raise ValueError("ISR needs at least 2 hops")
            middle = (n - 2) * self.theta3 if n > 2 else 0.0
            total = self.theta1 + self.theta2 + middle
        if abs(total - self.theta_big) > 1e-9:
            raise ValueError(f"hop angles sum to {total}, expected {self.theta_big}")
        if min(self.theta1, self.theta2) < 0 or (n > 2 and kind is RouteKind.ISR and self.theta3 <= 0):
            raise ValueError("hop angles must be non-negative")

    @classmethod
    def str_route(cls, n_hops: int, theta1: float, theta_big: float) -> "DecisionVars":
        return cls(RouteKind.STR, n_hops, theta1, 2.0 * theta_big / n_hops - theta1, theta_big)

    @classmethod
    def isr_route(cls, n_hops: int, theta1: float, theta2: float, theta_big: float) -> "DecisionVars":
        theta3 = (theta_big - theta1 - theta2) / (n_hops - 2) if n_hops > 2 else math.nan
        return cls(RouteKind.ISR, n_hops, theta1, theta2, theta_big, theta3)

    def hop_classes(self) -> list[HopClass]:
        n = self.n_hops
        if self.kind is RouteKind.STR:
            return [HopClass.C1 if i % 2 == 0 else HopClass.C2 for i in range(n)]
        return [HopClass.C1] + [HopClass.C3] * (n - 2) + [HopClass.C2]

    def hop_angles(self) -> list[float]:
        n = self.n_hops
        if self.kind is RouteKind.STR:
            return [self.theta1 if i % 2 == 0 else self.theta2 for i in range(n)]
        return [self.theta1] + [self.theta3] * (n - 2) + [self.theta2]

    def check_limits(self, p: ChannelParams):
        for cls, th in zip(self.hop_classes(), self.hop_angles()):
            if th > max_central_angle(cls, p) * (1 + 1e-12):
                raise Infeasible(f"{cls.name} angle {th:.4f} exceeds its maximum")


@dataclass(frozen=True)
class RoutePlan:
    decision: DecisionVars
    ideal_positions: tuple


@dataclass
class RouteRealization:
    """A concrete relay chain. ``nodes`` holds ``(kind, index)`` labels with
    kind in {"tx", "rx", "gateway", "satellite"}; ``positions`` the matching
    coordinates."""

    nodes: list
    positions: list
    hops: list = field(default_factory=list)
    feasible: bool = True

    @property
    def relay_indices(self):
        return self.nodes[1:-1]

    @property
    def ee(self) -> float:
        if not self.feasible:
            return 0.0
        return route_ee(self.hops)


def ideal_positions(decision: DecisionVars, p: ChannelParams) -> RoutePlan:
    """Relay positions in the azimuth-0 plane with cumulative polar angles."""
    out = []
    n = decision.n_hops
    if decision.kind is RouteKind.STR:
        for k in range(1, n):
            if k % 2:
                angle = (k + 1) // 2 * decision.theta1 + (k - 1) // 2 * decision.theta2
                out.append(SphericalPoint(p.r_sat, angle, 0.0))
            else:
                out.append(SphericalPoint(p.r_earth, k // 2 * (decision.theta1 + decision.theta2), 0.0))
    else:
        for k in range(1, n):
            theta3 = decision.theta3 if n > 2 else 0.0
            out.append(SphericalPoint(p.r_sat, decision.theta1 + (k - 1) * theta3, 0.0))
    return RoutePlan(decision, tuple(out))


# ---------------------------------------------------------------------------
# exhaustive searches

def _inflate_gs(alpha, theta, p: ChannelParams):
    """Central angle whose ground-satellite chord is ``alpha`` times that of ``theta``."""
    l = np.asarray(hop_distance(HopClass.C1, theta, p)) * alpha
    c = (p.r_sat**2 + p.r_earth**2 - l**2) / (2.0 * p.r_sat * p.r_earth)
    # chords beyond the antipode cannot be realized: mark as unreachable
    return np.where(c < -1.0, np.inf, np.arccos(np.clip(c, -1.0, 1.0)))


def _inflate_ss(alpha, theta, p: ChannelParams):
    s = alpha * np.sin(np.asarray(theta) / 2.0)
    return np.where(s > 1.0, np.inf, 2.0 * np.arcsin(np.clip(s, 0.0, 1.0)))


def _inv_ee(theta, cls, p):
    with np.errstate(divide="ignore"):
        return 1.0 / np.asarray(avg_hop_ee_formula(np.minimum(theta, math.pi), cls, p))


@dataclass(frozen=True)
class _Best:
    n_hops: int
    theta1: float
    theta2: float
    theta3: float
    ee: float
    remark_ok: bool


def _str_level(n: int, theta_big: float, p: ChannelParams, ctx: ScalingContext | None,
               n_in: int, eps: float):
    tmax1 = max_central_angle(HopClass.C1, p)
    tmax2 = max_central_angle(HopClass.C2, p)
    if math.isnan(tmax1) or math.isnan(tmax2):
        return None
    span = min(tmax1, 2.0 * theta_big / n)
    th1 = np.arange(n_in + 1) * (span / n_in)
    th2 = np.maximum(2.0 * theta_big / n - th1, 0.0)
    if ctx is None:
        t1a = t1b = th1
        t2a = t2b = th2
        feas = (th1 <= tmax1 * (1 + 1e-12)) & (th2 <= tmax2 * (1 + 1e-12))
    else:
        t1a = _inflate_gs(scaling.alpha1(th1, ctx), th1, p)
        t2a = _inflate_gs(scaling.alpha1(th2, ctx), th2, p)
        t1b = _inflate_gs(scaling.alpha2(th1, ctx), th1, p)
        t2b = _inflate_gs(scaling.alpha2(th2, ctx), th2, p)
        feas = (t1b <= (1 - eps) * tmax1) & (t2b <= (1 - eps) * tmax2)
    inv = (_inv_ee(t1a, HopClass.C1, p) + _inv_ee(t2a, HopClass.C2, p)
           + (n - 2) / 2 * (_inv_ee(t1b, HopClass.C1, p) + _inv_ee(t2b, HopClass.C2, p)))
    with np.errstate(divide="ignore"):
        obj = np.where(feas, 1.0 / inv, 0.0)
    if not np.any(obj > 0):
        return None
    k = int(np.argmax(obj))  # first maximum, as a strict '>' scan would keep
    remark = bool(t1b[k] < 2 * th1[k] + th2[k] and t2b[k] < th1[k] + 2 * th2[k])
    return _Best(n, float(th1[k]), float(th2[k]), math.nan, float(obj[k]), remark)


def _isr_grid(n: int, theta_big: float, tmax1: float, tmax2: float, n_in: int):
    span1 = min(tmax1, theta_big)
    th1 = np.repeat(np.arange(n_in + 1) * (span1 / n_in), n_in + 1)
    span2 = np.minimum(tmax2, theta_big - th1)
    th2 = np.tile(np.arange(n_in + 1), n_in + 1) * (span2 / n_in)
    return th1, th2


def _isr_level(n: int, theta_big: float, p: ChannelParams, ctx: ScalingContext | None,
               n_in: int, eps: float):
    tmax = [max_central_angle(c, p) for c in (HopClass.C1, HopClass.C2, HopClass.C3)]
    if math.isnan(tmax[0]) or math.isnan(tmax[1]):
        return None
    th1, th2 = _isr_grid(n, theta_big, tmax[0], tmax[1], n_in)
    rest = theta_big - th1 - th2
    if n == 2:
        keep = np.abs(rest) <= 1e-9 * max(theta_big, 1.0)
        th3 = np.full_like(th1, math.nan)
    else:
        th3 = rest / (n - 2)
        keep = th3 > 1e-12
    th1, th2, th3 = th1[keep], th2[keep], th3[keep]
    if th1.size == 0:
        return None
    if ctx is None:
        t1, t2, t3 = th1, th2, th3
        feas = (t1 <= tmax[0] * (1 + 1e-12)) & (t2 <= tmax[1] * (1 + 1e-12))
        if n > 2:
            feas &= t3 <= tmax[2] * (1 + 1e-12)
    else:
        t1 = _inflate_gs(scaling.alpha1(th1, ctx), th1, p)
        t2 = _inflate_gs(scaling.alpha1(th2, ctx), th2, p)
        feas = (t1 <= (1 - eps) * tmax[0]) & (t2 <= (1 - eps) * tmax[1])
        if n > 2:
            t3 = _inflate_ss(scaling.alpha3(th3, ctx), th3, p)
            feas &= t3 <= (1 - eps) * tmax[2]
        else:
            t3 = th3
    inv = _inv_ee(t1, HopClass.C1, p) + _inv_ee(t2, HopClass.C2, p)
    if n > 2:
        inv = inv + (n - 2) * _inv_ee(t3, HopClass.C3, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        obj = np.where(feas, 1.0 / inv, 0.0)
    if not np.any(obj > 0):
        return None
    k = int(np.argmax(obj))
    if n > 2:
        remark = bool(t1[k] < th1[k] + th3[k] and t2[k] < th2[k] + th3[k] and t3[k] < 2 * th3[k])
    else:
        remark = True
    return _Best(n, float(th1[k]), float(th2[k]), float(th3[k]), float(obj[k]), remark)


@functools.lru_cache(maxsize=256)
def _scan(kind: RouteKind, theta_big: float, p: ChannelParams, ctx: ScalingContext | None,
          n_in: int, eps: float, n_cap: int | None = None) -> tuple:
    """Per-hop-count optimum of the inner loops, up to where Remark 1 stops holding.

    Scanning stops after ``REMARK_PATIENCE`` consecutive hop counts that fail
    the Remark 1 inequalities once at least one count has passed.
    """
    level = _str_level if kind is RouteKind.STR else _isr_level
    step = 2 if kind is RouteKind.STR else 1
    cap = n_cap if n_cap is not None else HOP_CAP[kind.value]
    out = []
    misses = 0
    seen_ok = False
    for n in range(2, cap + 1, step):
        best = level(n, theta_big, p, ctx, n_in, eps)
        out.append((n, best))
        ok = best is not None and best.remark_ok
        seen_ok |= ok
        misses = 0 if ok else misses + 1
        if seen_ok and misses >= REMARK_PATIENCE:
            break
    return tuple(out)


def max_hops(kind, theta_big: float, p: ChannelParams, ctx: ScalingContext,
             n_in: int = DEFAULT_N_IN, eps: float = DEFAULT_EPSILON) -> int:
    """Largest hop count whose inner-loop optimum satisfies the Remark 1 inequalities.

    This is a necessary but not sufficient condition for a sensible bound;
    returns 2 when no hop count satisfies it.
    """
    levels = _scan(RouteKind(kind), float(theta_big), p, ctx, n_in, eps)
    ok = [n for n, best in levels if best is not None and best.remark_ok]
    return max(ok) if ok else 2


def _pick(levels, n_max: int):
    best = None
    for n, lv in levels:
        if n > n_max or lv is None:
            continue
        if best is None or lv.ee > best.ee:
            best = lv
    return best


def _to_decision(kind: RouteKind, best: _Best, theta_big: float) -> DecisionVars:
    if kind is RouteKind.STR:
        return DecisionVars.str_route(best.n_hops, best.theta1, theta_big)
    return DecisionVars.isr_route(best.n_hops, best.theta1, best.theta2, theta_big)


@dataclass(frozen=True)
class SearchResult:
    decision: DecisionVars | None
    ee: float
    n_max: int

    @property
    def feasible(self) -> bool:
        return self.decision is not None


def algorithm1_search(theta_big: float, p: ChannelParams, ctx: ScalingContext,
                      n_in: int = DEFAULT_N_IN, eps: float = DEFAULT_EPSILON) -> SearchResult:
    """Exhaustive search over even hop counts and the odd-hop angle for STR."""
    return _search(RouteKind.STR, theta_big, p, ctx, n_in, eps)


def algorithm2_search(theta_big: float, p: ChannelParams, ctx: ScalingContext,
                      n_in: int = DEFAULT_N_IN, eps: float = DEFAULT_EPSILON) -> SearchResult:
    """Exhaustive search over hop counts and first/last-hop angles for ISR."""
    return _search(RouteKind.ISR, theta_big, p, ctx, n_in, eps)


def _search(kind, theta_big, p, ctx, n_in, eps) -> SearchResult:
    if not 0 <= eps < 1 or n_in < 2:
        raise ValueError("need 0 <= eps < 1 and n_in >= 2")
    theta_big = float(theta_big)
    n_max = max_hops(kind, theta_big, p, ctx, n_in, eps)
    best = _pick(_scan(kind, theta_big, p, ctx, n_in, eps), n_max)
    if best is None:
        return SearchResult(None, 0.0, n_max)
    return SearchResult(_to_decision(kind, best, theta_big), best.ee, n_max)


def search(kind, theta_big, p, ctx, n_in=DEFAULT_N_IN, eps=DEFAULT_EPSILON) -> SearchResult:
    return _search(RouteKind(kind), theta_big, p, ctx, n_in, eps)


def solve_ideal(kind, theta_big: float, p: ChannelParams, grid: int = DEFAULT_N_IN,
                n_max: int | None = None) -> SearchResult:
    """Best decision when relays sit exactly at their ideal positions.

    The result upper-bounds what any deployment achieves over the same
    hop-count range.  ``n_max`` defaults to the per-kind hop cap.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    kind = RouteKind(kind)
    cap = n_max if n_max is not None else HOP_CAP[kind.value]
    level = _str_level if kind is RouteKind.STR else _isr_level
    step = 2 if kind is RouteKind.STR else 1
    levels = [(n, level(n, float(theta_big), p, None, grid, 0.0)) for n in range(2, cap + 1, step)]
    best = _pick(levels, cap)
    if best is None:
        return SearchResult(None, 0.0, cap)
    return SearchResult(_to_decision(kind, best, float(theta_big)), best.ee, cap)


def plan_objective(decision: DecisionVars, p: ChannelParams, ctx: ScalingContext | None) -> float:
    """Re-evaluate the search objective for a decision (alpha = 1 when ``ctx`` is None)."""
    if decision.kind is RouteKind.STR:
        th = np.array([decision.theta1, decision.theta2])
        if ctx is None:
            a = b = th
        else:
            a = _inflate_gs(scaling.alpha1(th, ctx), th, p)
            b = _inflate_gs(scaling.alpha2(th, ctx), th, p)
        n = decision.n_hops
        inv = (_inv_ee(a[0], HopClass.C1, p) + _inv_ee(a[1], HopClass.C2, p)
               + (n - 2) / 2 * (_inv_ee(b[0], HopClass.C1, p) + _inv_ee(b[1], HopClass.C2, p)))
        return float(1.0 / inv)
    th = np.array([decision.theta1, decision.theta2])
    a = th if ctx is None else _inflate_gs(scaling.alpha1(th, ctx), th, p)
    inv = _inv_ee(a[0], HopClass.C1, p) + _inv_ee(a[1], HopClass.C2, p)
    if decision.n_hops > 2:
        t3 = decision.theta3
        if ctx is not None:
            t3 = _inflate_ss(scaling.alpha3(t3, ctx), t3, p)
        inv = inv + (decision.n_hops - 2) * _inv_ee(t3, HopClass.C3, p)
    return float(1.0 / inv)


# ---------------------------------------------------------------------------
# relay selection on concrete deployments

def deviation_angles(points: PointSet, origin: SphericalPoint, target: SphericalPoint) -> np.ndarray:
    """Angle at ``origin`` between the great circle towards ``target`` and the
    great circle towards each candidate.  Candidates straight above or below
    ``origin`` have no bearing and get deviation 0."""
    o = origin.to_cartesian() / origin.radius
    t = target.to_cartesian() / target.radius
    st = np.sin(points.polar)
    c = np.stack([st * np.cos(points.azimuth), st * np.sin(points.azimuth), np.cos(points.polar)], axis=1)
    dir_t = t - (t @ o) * o
    dir_c = c - np.outer(c @ o, o)
    nt = np.linalg.norm(dir_t)
    nc = np.linalg.norm(dir_c, axis=1)
    if nt < 1e-15:
        return np.zeros(len(points))
    with np.errstate(invalid="ignore", divide="ignore"):
        cosang = (dir_c @ dir_t) / (nc * nt)
    return np.where(nc < 1e-12, 0.0, np.arccos(np.clip(cosang, -1.0, 1.0)))


def min_deflection_insert(candidates: PointSet, origin: SphericalPoint, target: SphericalPoint,
                          max_dist: float, exclude=(), target_dist: float | None = None
                          ) -> tuple[int, SphericalPoint]:
    """Candidate within ``max_dist`` of ``origin`` (and ``target_dist`` of
    ``target`` when given) deviating least from the great circle towards
    ``target``; ties go to the lowest index."""
    order = deflection_order(candidates, origin, target, max_dist, exclude, target_dist)
    if order.size == 0:
        raise LookupError("no candidate within range")
    i = int(order[0])
    return i, candidates[i]


def deflection_order(candidates: PointSet, origin: SphericalPoint, target: SphericalPoint,
                     max_dist: float, exclude=(), target_dist: float | None = None) -> np.ndarray:
    """Indices of in-range candidates sorted by deviation, then index."""
    if len(candidates) == 0:
        return np.zeros(0, dtype=int)
    ok = candidates.distances_to(origin) <= max_dist
    if target_dist is not None:
        ok &= candidates.distances_to(target) <= target_dist
    for i in exclude:
        ok[i] = False
    idx = np.flatnonzero(ok)
    dev = deviation_angles(candidates, origin, target)[idx]
    return idx[np.lexsort((idx, dev))]


def _hop_class(a: str, b: str) -> HopClass:
    ground = ("tx", "rx", "gateway")
    if a in ground:
        return HopClass.C1
    return HopClass.C2 if b in ground else HopClass.C3


def _erase_loops(nodes, positions):
    out_n, out_p = [], []
    for node, pos in zip(nodes, positions):
        if node in out_n:
            k = out_n.index(node)
            del out_n[k + 1:], out_p[k + 1:]
            continue
        out_n.append(node)
        out_p.append(pos)
    return out_n, out_p


def build_hops(nodes, positions, p: ChannelParams) -> tuple[list, bool]:
    hops = []
    feasible = True
    for (ka, _), (kb, _), a, b in zip(nodes, nodes[1:], positions, positions[1:]):
        cls = _hop_class(ka, kb)
        d = geometry.euclidean_distance(a, b)
        ok = 0 < d <= lmax(cls, p)
        feasible &= ok
        ee = float(avg_hop_ee_formula(geometry.central_angle(a, b), cls, p)) if ok else 0.0
        hops.append(HopEE(cls, geometry.central_angle(a, b), d, ee))
    return hops, feasible


def _repair_hop(a_node, a_pos, b_node, b_pos, gw, sats, kind, p, used):
    """Relays bridging a too-long hop from a to b, or None if none exist.

    ISR inserts one satellite within link range of both ends.  STR inserts a
    satellite then a gateway so the three new hops keep alternating; the
    pair is the first in deflection order whose links all fit.
    """
    cls = _hop_class(a_node[0], b_node[0])
    used_sat = [j for k, j in used if k == "satellite"]
    used_gw = [j for k, j in used if k == "gateway"]
    if kind is RouteKind.ISR:
        reach_a = p.lmax1 if cls is HopClass.C1 else p.lmax3
        reach_b = p.lmax2 if cls is HopClass.C2 else p.lmax3
        try:
            i, s = min_deflection_insert(sats, a_pos, b_pos, reach_a, used_sat, reach_b)
        except LookupError:
            return None
        return [("satellite", i)], [s]
    if cls is HopClass.C1:
        first, second, r1, r2, r3 = sats, gw, p.lmax1, p.lmax2, p.lmax1
        ex1, ex2 = used_sat, used_gw
    else:
        first, second, r1, r2, r3 = gw, sats, p.lmax2, p.lmax1, p.lmax2
        ex1, ex2 = used_gw, used_sat
    for i in deflection_order(first, a_pos, b_pos, r1, ex1):
        mid = first[int(i)]
        order = deflection_order(second, mid, b_pos, r2, ex2, r3)
        if order.size:
            j = int(order[0])
            return [(first.kind, int(i)), (second.kind, j)], [mid, second[j]]
    return None


def realize_plan(plan: RoutePlan, gw: PointSet, sats: PointSet, tx: SphericalPoint,
                 rx: SphericalPoint, p: ChannelParams, repair: bool = True) -> RouteRealization:
    """Map ideal positions to nearest devices, erase loops, then repair long hops."""
    nodes, positions = [("tx", 0)], [tx]
    for pos in plan.ideal_positions:
        pool = sats if abs(pos.radius - sats.radius) < 1e-6 else gw
        if len(pool) == 0:
            raise ValueError("empty device set")
        i, dev = geometry.nearest_point(pool, pos)
        nodes.append((pool.kind, i))
        positions.append(dev)
    nodes.append(("rx", 0))
    positions.append(rx)
    nodes, positions = _erase_loops(nodes, positions)
    if repair:
        kind = plan.decision.kind
        k = 0
        while k < len(nodes) - 1:
            cls = _hop_class(nodes[k][0], nodes[k + 1][0])
            if geometry.euclidean_distance(positions[k], positions[k + 1]) > lmax(cls, p):
                fix = _repair_hop(nodes[k], positions[k], nodes[k + 1], positions[k + 1],
                                  gw, sats, kind, p, nodes)
                if fix is not None:
                    nodes[k + 1:k + 1] = fix[0]
                    positions[k + 1:k + 1] = fix[1]
                    k += len(fix[0])
            k += 1
        nodes, positions = _erase_loops(nodes, positions)
    hops, feasible = build_hops(nodes, positions, p)
    return RouteRealization(nodes, positions, hops, feasible)


def algorithm3_select(gw: PointSet, sats: PointSet, tx: SphericalPoint, rx: SphericalPoint,
                      p: ChannelParams, ctx: ScalingContext, kind=RouteKind.ISR,
                      n_in: int = DEFAULT_N_IN, eps: float = DEFAULT_EPSILON,
                      repair: bool = True) -> RouteRealization:
    """Relay subset selection: search, ideal positions, nearest devices, repair.

    ``tx`` is taken as the pole of the coordinate frame and ``rx`` must lie
    in the azimuth-0 plane.
    """
    if len(sats) == 0 or (RouteKind(kind) is RouteKind.STR and len(gw) == 0):
        raise ValueError("empty device set")
    theta_big = geometry.central_angle(tx, rx)
    res = search(kind, theta_big, p, ctx, n_in, eps)
    if not res.feasible:
        return RouteRealization([("tx", 0), ("rx", 0)], [tx, rx], [], feasible=False)
    return realize_plan(ideal_positions(res.decision, p), gw, sats, tx, rx, p, repair)
