"""Run the randomized design on simulated markets and estimate effects over time."""

import argparse

from ammlab.config import ExperimentConfig, load
from ammlab.experiment import estimate_treatment_effect, generate_panel, heterogeneity_split
from ammlab.regression import symmetry_test


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=None, help="key = value experiment config")
    ap.add_argument("--horizons", default="0,3,10,50,100")
    args = ap.parse_args()

    config = load(ExperimentConfig, args.config)
    panel = generate_panel(config)
    print(f"{config.n_markets} markets, {len(panel)} rows")
    print(f"{'t':>4} {'yes-no':>8} {'se':>7} {'control-no':>11} {'se':>7} {'sym F':>7} {'p':>6}")
    for t in (int(s) for s in args.horizons.split(",")):
        if t > config.horizon:
            continue
        r = estimate_treatment_effect(panel, t)
        f, p = symmetry_test(r)
        print(f"{t:>4} {r['yes']:8.4f} {r.se('yes'):7.4f} {r['control']:11.4f} {r.se('control'):7.4f} {f:7.2f} {p:6.3f}")
    for moderator in ("num_traders", "learning_rate", "agreement", "liquidity"):
        r = heterogeneity_split(panel, moderator, config.horizon)
        print(f"split on {moderator:<13} at {r.info['split_point']:<6g}: yes_x {r['yes_x']:+.4f} (se {r.se('yes_x'):.4f})")


if __name__ == "__main__":
    main()
