"""Trial engine: sample deployments, route, realize fading, aggregate.

Trial ``i`` of a run seeded with ``seed`` draws from its own stream,
``SeedSequence(seed, spawn_key=(i,))``, so results do not depend on how
trials are split across worker processes.  Per-trial records are folded in
trial order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import geometry, planner
from .channel import HopClass, lmax, mean_fading, sample_fading
from .energy import avg_hop_ee_formula, hop_ee_realized
from .geometry import PointSet, SphericalPoint
from .params import SystemParams
from .planner import RouteKind, RouteRealization

STRATEGIES = ("proposed", "greedy_max_ee", "min_deflection", "ideal")
ROLES = ("first", "middle_c1", "middle_c2", "middle_c3", "last")
OUTLIER_SIGMAS = 3.0
BASELINE_HOP_CAP = 1000


@dataclass(frozen=True)
class TrialConfig:
    params: SystemParams = field(default_factory=SystemParams)
    kind: str = "ISR"
    strategy: str = "proposed"
    trials: int = 1000
    seed: int = 0
    workers: int = 1
    repair: bool = True
    mean_fading: bool = False  # use mean fading gains instead of random draws

    def __post_init__(self):
        RouteKind(self.kind)
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.trials < 1 or self.workers < 1:
            raise ValueError("trials and workers must be positive")


@dataclass
class TrialRecord:
    feasible: bool
    route_ee: float
    roles: list
    hop_ee: list
    classes: list = field(default_factory=list)
    distances: list = field(default_factory=list)


@dataclass(frozen=True)
class TrialStats:
    kind: str
    strategy: str
    trials: int
    availability: float
    availability_se: float
    mean_ee: float
    mean_ee_se: float
    std_ee: float
    ee_sim: float
    mean_hops: float
    role_mean_ee: dict
    role_mean_count: dict
    outliers_removed: int

    def ci95(self, which: str = "mean_ee") -> tuple[float, float]:
        m, se = getattr(self, which), getattr(self, which + "_se")
        return m - 1.96 * se, m + 1.96 * se

    def to_dict(self) -> dict:
        return asdict(self)


def relative_error(sim: float, analytic: float) -> float:
    """|sim - analytic| / sim, the simulation value being the reference."""
    if sim == 0:
        raise ZeroDivisionError("simulated value is zero")
    return abs(sim - analytic) / abs(sim)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


# ---------------------------------------------------------------------------
# baselines

def _hop_by_hop(kind: RouteKind, gw: PointSet, sats: PointSet, tx: SphericalPoint,
                rx: SphericalPoint, p, pick) -> RouteRealization:
    """Walk towards ``rx``; every hop must strictly reduce the central angle to it."""
    nodes, positions = [("tx", 0)], [tx]
    visited = set()
    cur_kind, cur = "tx", tx
    for _ in range(BASELINE_HOP_CAP):
        if cur_kind == "satellite" and geometry.euclidean_distance(cur, rx) <= p.lmax2:
            nodes.append(("rx", 0))
            positions.append(rx)
            hops, feasible = planner.build_hops(nodes, positions, p)
            return RouteRealization(nodes, positions, hops, feasible)
        if cur_kind in ("tx", "gateway"):
            pool, cls = sats, HopClass.C1
        elif kind is RouteKind.STR:
            pool, cls = gw, HopClass.C2
        else:
            pool, cls = sats, HopClass.C3
        ok = pool.distances_to(cur) <= lmax(cls, p)
        ok &= pool.angles_to(rx) < geometry.central_angle(cur, rx)
        for k, i in visited:
            if k == pool.kind:
                ok[i] = False
        if not ok.any():
            break
        i = pick(pool, ok, cur, cls)
        cur_kind, cur = pool.kind, pool[i]
        visited.add((pool.kind, i))
        nodes.append((pool.kind, i))
        positions.append(cur)
    hops, _ = planner.build_hops(nodes, positions, p) if len(nodes) > 1 else ([], False)
    return RouteRealization(nodes, positions, hops, feasible=False)


def greedy_max_ee_strategy(kind, gw, sats, tx, rx, p, ctx=None) -> RouteRealization:
    """Next relay: the in-range device with the highest mean hop efficiency."""

    def pick(pool, ok, cur, cls):
        ee = avg_hop_ee_formula(pool.angles_to(cur), cls, p)
        return int(np.argmax(np.where(ok, ee, -np.inf)))

    return _hop_by_hop(RouteKind(kind), gw, sats, tx, rx, p, pick)


def min_deflection_strategy(kind, gw, sats, tx, rx, p, ctx=None) -> RouteRealization:
    """Next relay: the in-range device deviating least from the arc to ``rx``."""

    def pick(pool, ok, cur, cls):
        dev = planner.deviation_angles(pool, cur, rx)
        return int(np.argmin(np.where(ok, dev, np.inf)))

    return _hop_by_hop(RouteKind(kind), gw, sats, tx, rx, p, pick)


def proposed_strategy(kind, gw, sats, tx, rx, p, ctx, repair=True) -> RouteRealization:
    return planner.algorithm3_select(gw, sats, tx, rx, p, ctx, kind, repair=repair)


def ideal_strategy(kind, tx, rx, p) -> RouteRealization:
    """Relays placed exactly at the positions of the ideal-scenario optimum."""
    res = planner.solve_ideal(kind, geometry.central_angle(tx, rx), p)
    if not res.feasible:
        return RouteRealization([("tx", 0), ("rx", 0)], [tx, rx], [], feasible=False)
    plan = planner.ideal_positions(res.decision, p)
    nodes = [("tx", 0)]
    for k, pos in enumerate(plan.ideal_positions):
        nodes.append(("satellite" if abs(pos.radius - p.r_sat) < 1e-6 else "gateway", k))
    nodes.append(("rx", 0))
    positions = [tx, *plan.ideal_positions, rx]
    hops, feasible = planner.build_hops(nodes, positions, p)
    return RouteRealization(nodes, positions, hops, feasible)


# ---------------------------------------------------------------------------
# trials

def _role(i: int, n: int, cls: HopClass) -> str:
    if i == 0:
        return "first"
    if i == n - 1:
        return "last"
    return {HopClass.C1: "middle_c1", HopClass.C2: "middle_c2", HopClass.C3: "middle_c3"}[cls]


def run_single(cfg: TrialConfig, index: int) -> TrialRecord:
    rng = trial_rng(cfg.seed, index)
    sp = cfg.params
    p, ctx = sp.channel(), sp.scaling_context()
    kind = RouteKind(cfg.kind)
    tx = SphericalPoint(p.r_earth, 0.0, 0.0)
    rx = SphericalPoint(p.r_earth, sp.theta_big, 0.0)
    if cfg.strategy == "ideal":
        route = ideal_strategy(kind, tx, rx, p)
    else:
        sats = geometry.sample_bpp(sp.n_s, p.r_sat, rng, "satellite")
        if kind is RouteKind.STR:
            gw = geometry.sample_bpp(sp.n_g, p.r_earth, rng, "gateway")
        else:
            gw = PointSet(p.r_earth, [], [], "gateway")
        if cfg.strategy == "proposed":
            route = proposed_strategy(kind, gw, sats, tx, rx, p, ctx, cfg.repair)
        elif cfg.strategy == "greedy_max_ee":
            route = greedy_max_ee_strategy(kind, gw, sats, tx, rx, p)
        else:
            route = min_deflection_strategy(kind, gw, sats, tx, rx, p)
    if not route.feasible:
        return TrialRecord(False, 0.0, [], [])
    n = len(route.hops)
    roles, ees = [], []
    for i, hop in enumerate(route.hops):
        w = mean_fading(hop.cls, p) if cfg.mean_fading else sample_fading(hop.cls, rng, p)
        ees.append(float(hop_ee_realized(hop.cls, hop.distance, w, p)))
        roles.append(_role(i, n, hop.cls))
    if any(e <= 0 for e in ees):
        route_ee = 0.0
    else:
        route_ee = 1.0 / math.fsum(1.0 / e for e in ees)
    return TrialRecord(True, route_ee, roles, ees,
                       [h.cls.name for h in route.hops], [h.distance for h in route.hops])


def _run_chunk(cfg: TrialConfig, start: int, stop: int) -> list:
    return [run_single(cfg, i) for i in range(start, stop)]


def _chunks(n: int, workers: int):
    size = max(1, math.ceil(n / (workers * 4)))
    return [(s, min(n, s + size)) for s in range(0, n, size)]


def collect(cfg: TrialConfig) -> list:
    """Per-trial records in trial order."""
    if cfg.workers == 1:
        return _run_chunk(cfg, 0, cfg.trials)
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(_run_chunk, cfg, a, b) for a, b in _chunks(cfg.trials, cfg.workers)]
        out = []
        for f in futures:
            out.extend(f.result())
    return out


def filter_outliers(values: np.ndarray, sigmas: float = OUTLIER_SIGMAS, passes: int = 2) -> np.ndarray:
    """Boolean mask keeping finite values within ``sigmas`` standard deviations
    of the mean, re-estimated over ``passes`` rounds."""
    keep = np.isfinite(values)
    for _ in range(passes):
        if keep.sum() < 2:
            break
        m, s = values[keep].mean(), values[keep].std()
        keep = keep & (np.abs(values - m) <= sigmas * s)
    return keep


def role_estimate(records: list) -> tuple[float, dict, dict, int]:
    """Route efficiency from per-role mean hop efficiencies.

    Hops of feasible routes are grouped by role; within each role, hops whose
    reciprocal efficiency is a 3-sigma outlier are dropped.  The estimate is
    the reciprocal of the sum over roles of (mean hops per route) / (mean hop
    efficiency), which is what the analytic evaluators compute.
    """
    feas = [r for r in records if r.feasible]
    if not feas:
        return 0.0, {}, {}, 0
    by_role = {k: [] for k in ROLES}
    for r in feas:
        for role, e in zip(r.roles, r.hop_ee):
            by_role[role].append(e)
    means, counts, removed = {}, {}, 0
    for role in ROLES:
        vals = np.asarray(by_role[role], dtype=float)
        if vals.size == 0:
            continue
        with np.errstate(divide="ignore"):
            inv = np.where(vals > 0, 1.0 / vals, np.inf)
        keep = filter_outliers(inv)
        removed += int((~keep).sum())
        means[role] = float(vals[keep].mean())
        counts[role] = vals.size / len(feas)
    est = 1.0 / math.fsum(counts[k] / means[k] for k in means)
    return est, means, counts, removed


def summarize(cfg: TrialConfig, records: list) -> TrialStats:
    n = len(records)
    feas = np.array([r.feasible for r in records], dtype=float)
    ee = np.array([r.route_ee for r in records], dtype=float)
    avail = float(feas.mean())
    est, means, counts, removed = role_estimate(records)
    hops = [len(r.hop_ee) for r in records if r.feasible]
    se = lambda x: float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return TrialStats(
        kind=cfg.kind, strategy=cfg.strategy, trials=n,
        availability=avail, availability_se=se(feas),
        mean_ee=float(ee.mean()), mean_ee_se=se(ee),
        std_ee=float(ee.std(ddof=1)) if n > 1 else 0.0,
        ee_sim=est, mean_hops=float(np.mean(hops)) if hops else 0.0,
        role_mean_ee=means, role_mean_count=counts, outliers_removed=removed,
    )


def run_trials(cfg: TrialConfig) -> TrialStats:
    return summarize(cfg, collect(cfg))
