"""Analytic route efficiency versus constellation size at several altitudes.

For STR the gateway count follows the satellite count.  Pass ``--simulate``
to add Monte Carlo columns from the proposed strategy.
"""

import argparse

from leorouting import cli
from leorouting.params import SystemParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--kind", choices=cli.KINDS, default="STR")
    ap.add_argument("--altitudes", default="500,1000,1500")
    ap.add_argument("--counts", default="400,600,800,1000,1500,2000")
    ap.add_argument("--simulate", action="store_true")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    rows = []
    for h in (float(x) for x in args.altitudes.split(",")):
        for n in (int(x) for x in args.counts.split(",")):
            params = SystemParams().at_altitude(h).replace(n_s=n, n_g=n)
            spec = cli.ExperimentSpec("sweep", params, ("n_s", [n]), seed=args.seed,
                                      trials=args.trials, workers=args.workers)
            for r in cli.sweep_rows(spec, [args.kind], False, args.simulate):
                rows.append({"h_s_km": h, **r})
    cli._emit(cli.dumps_csv(["h_s_km"] + cli.SWEEP_HEADER, rows), args.out)


if __name__ == "__main__":
    main()
