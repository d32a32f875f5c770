"""Sweep the schedule constant c for Krasulina-max on the small-gap spectrum.

With gamma_n = c/n the top component grows roughly like n^(c*gap), so on a spectrum
whose gap is 0.1 the n^(-1/2) regime only shows up once c is around 5.
"""

import argparse
from dataclasses import replace

from streampca.estimators import ScheduleParams
from streampca.harness import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description="c-sweep for Krasulina-max")
    ap.add_argument("--c", default="1,3,5,10,20", help="comma-separated grid")
    ap.add_argument("--replicates", type=int, default=50)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2017)
    args = ap.parse_args()

    base = ExperimentConfig(scheme="krasulina", variant="largest", spectrum="paper4",
                            n_total=args.n, replicates=args.replicates, seed=args.seed)
    print(f"{'c':>6} {'slope':>8} {'r2':>6} {'final loss':>11}")
    for c in sorted(float(x) for x in args.c.split(",")):
        cfg = replace(base, schedule=ScheduleParams(c=c)).validate()
        result = run_experiment(cfg)
        fit = result.fits["align"]
        print(f"{c:6g} {fit.slope:+8.3f} {fit.r_squared:6.3f} {result.curve[-1].mean_alignment_loss:11.4f}")


if __name__ == "__main__":
    main()
