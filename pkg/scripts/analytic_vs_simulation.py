"""Analytic route efficiency against Monte Carlo, broken down by hop role.

For each route kind, prints the planned decision, the analytic and simulated
efficiencies with their relative error, and per role the planned versus
realized hop count and mean hop efficiency.
"""

import argparse

from leorouting import analytics, cli, planner
from leorouting.montecarlo import TrialConfig, relative_error, run_trials
from leorouting.params import load_config


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--config")
    ap.add_argument("--set", action="append", default=[])
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    sp = load_config(args.config, args.set)
    p, ctx = sp.channel(), sp.scaling_context()
    report = {}
    for kind in cli.KINDS:
        d = planner.search(kind, sp.theta_big, p, ctx, sp.n_in, sp.epsilon).decision
        ee_a = analytics.ee_analytic(d, p, ctx)
        st = run_trials(TrialConfig(sp, kind, trials=args.trials, seed=args.seed,
                                    workers=args.workers))
        avgs, counts = analytics.hop_averages(d, p, ctx), analytics.role_counts(d)
        roles = {}
        for role, avg in avgs.items():
            roles[role] = {"count_planned": counts[role], "ee_analytic_bit_per_j": avg.ee,
                           "count_sim": st.role_mean_count.get(role),
                           "ee_sim_bit_per_j": st.role_mean_ee.get(role)}
        report[kind] = {"decision": cli._decision_dict(d), "ee_analytic_bit_per_j": ee_a,
                        "ee_sim_bit_per_j": st.ee_sim, "relative_error": relative_error(st.ee_sim, ee_a),
                        "availability_sim": st.availability, "roles": roles}
    cli._emit(cli.dumps_json(report), args.out)


if __name__ == "__main__":
    main()
