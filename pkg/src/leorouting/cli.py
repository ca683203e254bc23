"""Command-line experiment runner.

Every command is a pure function of the configuration file, the flags and
the seed.  Single reports are JSON objects, sweeps and comparisons are CSV
tables; numbers are in SI units with the unit in the column name.

Exit codes: 0 success, 2 infeasible plan, 3 numerical failure, 4 config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from . import analytics, planner
from .montecarlo import STRATEGIES, TrialConfig, relative_error, run_trials
from .params import PARAM_NAMES, SystemParams, load_config
from .scaling import QuadratureError

EXIT_OK, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_CONFIG = 0, 2, 3, 4
KINDS = ("STR", "ISR")
# user-facing axis names and the parameter each one moves
AXES = {"n_s": "n_s", "n_g": "n_g", "h_s": "h_s_km", "h_s_km": "h_s_km",
        "beta": "beta", "theta": "theta_big", "theta_big": "theta_big"}
COMPARE_SOURCES = ("analytic", "simulate")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    params: SystemParams = field(default_factory=SystemParams)
    sweep_axis: tuple | None = None  # (parameter name, values)
    output_path: str | None = None
    seed: int = 0
    trials: int = 1000
    workers: int = 1

    def __post_init__(self):
        if self.sweep_axis is not None:
            name, values = self.sweep_axis
            if name not in PARAM_NAMES:
                raise ConfigError(f"unknown sweep axis {name!r}")
            if not values:
                raise ConfigError("sweep axis needs at least one value")


# ---------------------------------------------------------------------------
# helpers

def _num(x):
    """JSON-safe number: NaN and infinities become null."""
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _num(obj)


def dumps_json(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


def dumps_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(row[h]) for h in header])
    return buf.getvalue()


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def with_value(params: SystemParams, name: str, value) -> SystemParams:
    """Set one parameter; altitude changes clamp the link ranges to the horizon."""
    if name == "h_s_km":
        return params.at_altitude(float(value))
    kind = type(getattr(params, name))
    return params.replace(**{name: kind(value)})


def kind_params(params: SystemParams, kind: str, equal_budget: bool) -> SystemParams:
    """With ``equal_budget`` ISR gets every device of the STR deployment as a satellite."""
    if equal_budget and kind == "ISR":
        return params.replace(n_s=params.n_s + params.n_g)
    return params


def _decision_dict(d: planner.DecisionVars) -> dict:
    return {"kind": d.kind.value, "n_hops": d.n_hops, "theta1_rad": d.theta1,
            "theta2_rad": d.theta2, "theta3_rad": d.theta3, "theta_big_rad": d.theta_big}


def plan_report(params: SystemParams, kind: str) -> dict:
    p, ctx = params.channel(), params.scaling_context()
    res = planner.search(kind, params.theta_big, p, ctx, params.n_in, params.epsilon)
    if not res.feasible:
        raise planner.Infeasible(f"no {kind} decision satisfies the hop-length limits")
    plan = planner.ideal_positions(res.decision, p)
    return {
        "decision": _decision_dict(res.decision),
        "n_max": res.n_max,
        "objective_bit_per_j": res.ee,
        "ideal_positions": [{"radius_m": q.radius * 1e3, "polar_rad": q.polar,
                             "azimuth_rad": q.azimuth} for q in plan.ideal_positions],
    }


def analyze_report(params: SystemParams, kind: str) -> dict:
    out = plan_report(params, kind)
    p, ctx = params.channel(), params.scaling_context()
    res = planner.search(kind, params.theta_big, p, ctx, params.n_in, params.epsilon)
    avgs = analytics.hop_averages(res.decision, p, ctx)
    out["availability"] = analytics.availability(res.decision, p, ctx)
    out["ee_analytic_bit_per_j"] = analytics.ee_analytic(res.decision, p, ctx)
    out["hop_roles"] = {role: {"ee_bit_per_j": a.ee, "density_deficit": a.deficit,
                               "count": analytics.role_counts(res.decision)[role]}
                        for role, a in avgs.items()}
    return out


def _trial_cfg(spec: ExperimentSpec, params, kind, strategy) -> TrialConfig:
    return TrialConfig(params=params, kind=kind, strategy=strategy, trials=spec.trials,
                       seed=spec.seed, workers=spec.workers)


def simulate_report(spec: ExperimentSpec, kind: str, strategy: str) -> dict:
    stats = run_trials(_trial_cfg(spec, spec.params, kind, strategy))
    out = {"seed": spec.seed, "trials": spec.trials, "stats": stats.to_dict()}
    if strategy == "proposed":
        a = analyze_report(spec.params, kind)
        out["ee_analytic_bit_per_j"] = a["ee_analytic_bit_per_j"]
        out["availability_analytic"] = a["availability"]
        if stats.ee_sim > 0:
            out["relative_error"] = relative_error(stats.ee_sim, a["ee_analytic_bit_per_j"])
    return out


def compare_rows(spec: ExperimentSpec, kinds, strategies, source: str, equal_budget: bool) -> list:
    name, values = spec.sweep_axis if spec.sweep_axis else ("beta", [spec.params.beta])
    rows = []
    for v in values:
        base = with_value(spec.params, name, v)
        for kind in kinds:
            kp = kind_params(base, kind, equal_budget)
            row = {"axis": name, "value": float(v), "kind": kind, "n_s": kp.n_s, "n_g": kp.n_g}
            if source == "analytic":
                try:
                    a = analyze_report(kp, kind)
                    rows.append({**row, "strategy": "analytic", "availability": a["availability"],
                                 "mean_ee_bit_per_j": a["ee_analytic_bit_per_j"],
                                 "ci_low_bit_per_j": math.nan, "ci_high_bit_per_j": math.nan})
                except planner.Infeasible:
                    rows.append({**row, "strategy": "analytic", "availability": 0.0,
                                 "mean_ee_bit_per_j": 0.0,
                                 "ci_low_bit_per_j": math.nan, "ci_high_bit_per_j": math.nan})
                continue
            for strat in strategies:
                st = run_trials(_trial_cfg(spec, kp, kind, strat))
                lo, hi = st.ci95()
                rows.append({**row, "strategy": strat, "availability": st.availability,
                             "mean_ee_bit_per_j": st.mean_ee,
                             "ci_low_bit_per_j": lo, "ci_high_bit_per_j": hi})
    return rows


COMPARE_HEADER = ["axis", "value", "kind", "strategy", "n_s", "n_g", "availability",
                  "mean_ee_bit_per_j", "ci_low_bit_per_j", "ci_high_bit_per_j"]

SWEEP_HEADER = ["value", "kind", "n_s", "n_g", "feasible", "n_hops", "theta1_rad", "theta2_rad",
                "theta3_rad", "objective_bit_per_j", "availability_analytic",
                "ee_analytic_bit_per_j", "availability_sim", "mean_ee_sim_bit_per_j",
                "ee_sim_bit_per_j"]


def sweep_rows(spec: ExperimentSpec, kinds, equal_budget: bool, simulate: bool) -> list:
    name, values = spec.sweep_axis
    rows = []
    for v in values:
        base = with_value(spec.params, name, v)
        for kind in kinds:
            kp = kind_params(base, kind, equal_budget)
            row = dict.fromkeys(SWEEP_HEADER, math.nan)
            row.update(value=float(v), kind=kind, n_s=kp.n_s, n_g=kp.n_g, feasible=0)
            try:
                a = analyze_report(kp, kind)
            except planner.Infeasible:
                row.update(availability_analytic=0.0, ee_analytic_bit_per_j=0.0)
                rows.append(row)
                continue
            d = a["decision"]
            row.update(feasible=1, n_hops=d["n_hops"], theta1_rad=d["theta1_rad"],
                       theta2_rad=d["theta2_rad"], theta3_rad=d["theta3_rad"],
                       objective_bit_per_j=a["objective_bit_per_j"],
                       availability_analytic=a["availability"],
                       ee_analytic_bit_per_j=a["ee_analytic_bit_per_j"])
            if simulate:
                st = run_trials(_trial_cfg(spec, kp, kind, "proposed"))
                row.update(availability_sim=st.availability, mean_ee_sim_bit_per_j=st.mean_ee,
                           ee_sim_bit_per_j=st.ee_sim)
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# argument handling

def _values(raw: str) -> list:
    try:
        return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad value list {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value parameter file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one parameter (repeatable)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", help="output file (default: stdout)")

    ap = argparse.ArgumentParser(prog="leorouting", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common], help="search for the routing decision")
    p.add_argument("--kind", choices=KINDS, default="ISR")
    p = sub.add_parser("analyze", parents=[common], help="analytic availability and efficiency")
    p.add_argument("--kind", choices=KINDS, default="ISR")
    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo trials of one strategy")
    p.add_argument("--kind", choices=KINDS, default="ISR")
    p.add_argument("--strategy", choices=STRATEGIES, default="proposed")
    p = sub.add_parser("compare", parents=[common], help="strategies x route kinds table")
    p.add_argument("--kinds", default="STR,ISR")
    p.add_argument("--strategies", default=",".join(STRATEGIES))
    p.add_argument("--source", choices=COMPARE_SOURCES, default="simulate")
    p.add_argument("--axis", choices=sorted(AXES))
    p.add_argument("--values")
    p.add_argument("--equal-budget", action="store_true",
                   help="ISR uses n_s + n_g satellites")
    p = sub.add_parser("sweep", parents=[common], help="metrics versus one parameter")
    p.add_argument("--axis", choices=sorted(AXES), required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--kinds", default="STR,ISR")
    p.add_argument("--simulate", action="store_true", help="add Monte Carlo columns")
    p.add_argument("--equal-budget", action="store_true")
    return ap


def _split(raw: str, allowed) -> list:
    items = [x.strip() for x in raw.split(",") if x.strip()]
    bad = [x for x in items if x not in allowed]
    if bad or not items:
        raise ConfigError(f"expected a subset of {list(allowed)}, got {raw!r}")
    return items


def _spec(args) -> ExperimentSpec:
    try:
        params = load_config(args.config, args.set)
    except (KeyError, ValueError, OSError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    axis = None
    if getattr(args, "axis", None):
        if not args.values:
            raise ConfigError("--axis needs --values")
        axis = (AXES[args.axis], _values(args.values))
    if args.trials < 1 or args.workers < 1 or args.seed < 0:
        raise ConfigError("trials and workers must be positive, seed non-negative")
    return ExperimentSpec(args.command, params, axis, args.out, args.seed, args.trials, args.workers)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = _spec(args)
        if args.command == "plan":
            _emit(dumps_json(plan_report(spec.params, args.kind)), spec.output_path)
        elif args.command == "analyze":
            _emit(dumps_json(analyze_report(spec.params, args.kind)), spec.output_path)
        elif args.command == "simulate":
            _emit(dumps_json(simulate_report(spec, args.kind, args.strategy)), spec.output_path)
        elif args.command == "compare":
            rows = compare_rows(spec, _split(args.kinds, KINDS), _split(args.strategies, STRATEGIES),
                                args.source, args.equal_budget)
            _emit(dumps_csv(COMPARE_HEADER, rows), spec.output_path)
        else:
            rows = sweep_rows(spec, _split(args.kinds, KINDS), args.equal_budget, args.simulate)
            _emit(dumps_csv(SWEEP_HEADER, rows), spec.output_path)
    except ConfigError as exc:
        _emit(dumps_json({"status": "config_error", "reason": str(exc)}), None)
        return EXIT_CONFIG
    except planner.Infeasible as exc:
        _emit(dumps_json({"status": "infeasible", "reason": str(exc)}), None)
        return EXIT_INFEASIBLE
    except (QuadratureError, FloatingPointError, ArithmeticError) as exc:
        _emit(dumps_json({"status": "numerical_failure", "reason": str(exc)}), None)
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
