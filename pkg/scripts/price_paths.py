"""Averaged price paths for the baseline and the extreme setting of each parameter.

One CSV with a column per scenario, ready for plotting elsewhere.
"""

import argparse
import csv

from ammlab.config import SimConfig
from ammlab.engine import run_monte_carlo

SCENARIOS = {
    "baseline": {},
    "m60": {"m": 60},
    "lambda1": {"learning_rate": 1.0},
    "alpha0": {"agreement": 0.0},
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=10_000)
    ap.add_argument("--out", default="price_paths.csv")
    args = ap.parse_args()

    base = SimConfig(replications=args.reps)
    paths = {name: run_monte_carlo(base.replace(**kw)) for name, kw in SCENARIOS.items()}
    first = next(iter(paths.values()))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period"] + [f"{n}_{c}" for n in paths for c in ("mean", "se")])
        for i, period in enumerate(first.periods):
            row = [int(period)]
            for p in paths.values():
                row += [f"{p.mean_prices[i]:.6f}", f"{p.standard_errors[i]:.6f}"]
            w.writerow(row)
    for name, p in paths.items():
        print(f"{name:>9}: p(-1) {p.at(-1):.4f}  p(0) {p.at(0):.4f}  p(3) {p.at(3):.4f}  p(100) {p.at(100):.4f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
