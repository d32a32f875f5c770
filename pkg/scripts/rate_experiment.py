"""Run the two reference convergence experiments and print the fitted log-log slopes.

    python3 scripts/rate_experiment.py [--replicates 50] [--n 100000] [--seed 2017] [--out DIR]
"""

import argparse
import json
import os
import time

from streampca.cli import summary_dict, write_curves
from streampca.harness import ExperimentConfig, run_experiment

RUNS = {
    "smallest": dict(scheme="krasulina", variant="smallest", spectrum="smallest-id"),
    "largest": dict(scheme="krasulina", variant="largest", spectrum="paper4"),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicates", type=int, default=50)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2017)
    ap.add_argument("--out", default=None, help="write curves.csv and summary.json per run here")
    args = ap.parse_args()

    for name, kw in RUNS.items():
        cfg = ExperimentConfig(n_total=args.n, replicates=args.replicates, seed=args.seed, **kw).validate()
        start = time.perf_counter()
        result = run_experiment(cfg)
        elapsed = time.perf_counter() - start
        last = result.curve[-1]
        print(f"[{name}] {elapsed:.1f}s, final alignment loss {last.mean_alignment_loss:.4f} "
              f"(bound {last.bound:.4f})")
        for key, fit in result.fits.items():
            if fit is not None:
                print(f"    {key:9s} slope {fit.slope:+.3f}  r2 {fit.r_squared:.3f}  ({fit.points_used} pts)")
        if args.out:
            d = os.path.join(args.out, name)
            os.makedirs(d, exist_ok=True)
            write_curves(os.path.join(d, "curves.csv"), result)
            with open(os.path.join(d, "summary.json"), "w") as fh:
                json.dump(summary_dict(result), fh, indent=2)


if __name__ == "__main__":
    main()
