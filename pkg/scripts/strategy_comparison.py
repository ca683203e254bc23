"""Mean route efficiency of every strategy over a device-count sweep.

Ideal placement, the proposed planner and the two hop-by-hop baselines, with
95% confidence intervals from the trial spread.
"""

import argparse

from leorouting import cli
from leorouting.montecarlo import STRATEGIES
from leorouting.params import SystemParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--kinds", default="STR,ISR")
    ap.add_argument("--counts", default="600,800,1000,1200")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    rows = []
    for n in (int(x) for x in args.counts.split(",")):
        spec = cli.ExperimentSpec("compare", SystemParams().replace(n_s=n, n_g=n), ("n_s", [n]),
                                  seed=args.seed, trials=args.trials, workers=args.workers)
        rows += cli.compare_rows(spec, args.kinds.split(","), list(STRATEGIES), "simulate", False)
    cli._emit(cli.dumps_csv(cli.COMPARE_HEADER, rows), args.out)


if __name__ == "__main__":
    main()
