"""Compare the generator's class-conditional means with their configured targets.

    python3 scripts/calibration_check.py --users 20000 --seed 7
"""

import argparse

import numpy as np

from linktrust.report import table
from linktrust.synth import CLASS_NAMES, PopulationConfig, simulate


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--users", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=7)
    args = p.parse_args()

    cfg = PopulationConfig(n_users=args.users, seed=args.seed)
    pop = simulate(cfg)
    rows = []
    for name, targets in cfg.means.items():
        col = pop.friend_friend_count if name == "friend_friend_count" else pop.counters[name]
        for c, target in enumerate(targets):
            values = col[pop.link_class == c]
            if name == "friend_friend_count":
                values = values[values >= 0]
            mean = float(values.mean())
            rel = abs(mean - target) / target if target else abs(mean)
            tol = 0.10 if target < 0.1 else 0.05
            rows.append([name, CLASS_NAMES[c], target, mean, rel, "ok" if rel <= tol else "OFF"])
    private = (pop.friend_friend_count < 0) & (pop.counters["common_friends"] > 0)
    for c, target in enumerate(cfg.private_profile_prob):
        rate = float(private[pop.link_class == c].mean())
        rows.append(["is_friend_profile_private", CLASS_NAMES[c], target, rate,
                     abs(rate - target) / target, "-"])
    print(f"{len(pop):,} links from {args.users:,} users; class sizes "
          f"{np.bincount(pop.link_class, minlength=3).tolist()}\n")
    print(table(["feature", "class", "target", "observed", "rel_dev", "within"], rows))


if __name__ == "__main__":
    main()
