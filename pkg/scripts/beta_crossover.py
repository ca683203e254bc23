"""STR versus ISR efficiency over the price ratio factor at several altitudes.

ISR gets the whole device budget as satellites (n_s + n_g); STR splits it.
Prints the smallest grid beta at which STR beats ISR for each altitude.
"""

import argparse
import sys

import numpy as np

from leorouting import cli
from leorouting.params import SystemParams


def crossover(rows):
    by_beta = {}
    for r in rows:
        by_beta.setdefault(r["value"], {})[r["kind"]] = r["mean_ee_bit_per_j"]
    for beta in sorted(by_beta):
        ee = by_beta[beta]
        if ee["STR"] > ee["ISR"]:
            return beta
    return None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--altitudes", default="500,1000,1500")
    ap.add_argument("--betas", default=",".join(f"{b:.1f}" for b in np.arange(1.0, 6.01, 0.2)))
    ap.add_argument("--out", help="CSV output path")
    args = ap.parse_args(argv)
    betas = [float(b) for b in args.betas.split(",")]
    all_rows = []
    for h in (float(x) for x in args.altitudes.split(",")):
        spec = cli.ExperimentSpec("compare", SystemParams().at_altitude(h), ("beta", betas))
        rows = cli.compare_rows(spec, ["STR", "ISR"], [], "analytic", equal_budget=True)
        for r in rows:
            r["h_s_km"] = h
        all_rows.extend(rows)
        print(f"h_s={h:g} km: first beta with STR > ISR: {crossover(rows)}", file=sys.stderr)
    text = cli.dumps_csv(["h_s_km"] + cli.COMPARE_HEADER, all_rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
