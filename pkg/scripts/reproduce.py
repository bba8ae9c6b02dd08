"""Full desk-scale run: synthetic population, three datasets, eight classifiers.

    python3 scripts/reproduce.py --seed 7 --out-dir runs/seed7

Defaults are the full configuration (300 users, 100 iterations, 10 folds) and
take several minutes on one core; pass --workers to spread ensemble members
over threads.
"""

import argparse
import logging
from pathlib import Path

from linktrust.classifiers import Family
from linktrust.pipeline import ReproduceSettings, reproduce


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out-dir", type=Path, default=Path("runs/seed7"))
    p.add_argument("--users", type=int, default=300)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--avg-users", type=int, default=10)
    p.add_argument("--families", default=",".join(f.value for f in Family))
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    settings = ReproduceSettings(seed=args.seed, n_users=args.users, iterations=args.iterations,
                                 folds=args.folds, avg_users=args.avg_users, workers=args.workers,
                                 families=tuple(Family(f) for f in args.families.split(",")))
    reproduce(settings, args.out_dir)
    print((args.out_dir / "report.txt").read_text())


if __name__ == "__main__":
    main()
