"""End-to-end desk-scale reproduction: synthesize, build datasets, train, evaluate."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifiers import ClassifierSpec, Family
from .classifiers.infogain import information_gain_ranking
from .datasets import DatasetKind, balance_undersample, build_all_datasets
from .evaluation import (avg_users_precision_at_k, cs_avg_precision,
                         precision_at_k_split, restriction_precision_by_cs_value,
                         restriction_rate_by_rank_position, stratified_cv)
from .model import group_by_owner, links_to_csv
from .report import curve_table, cv_table, table, to_json
from .synth import PopulationConfig, simulate

log = logging.getLogger(__name__)

DEFAULT_K = (1, 10, 20, 50, 100, 200, 500)
HEURISTIC_K = (1, 5, 10, 20, 50, 100)
USER_K = (1, 5, 10, 20)


@dataclass
class ReproduceSettings:
    seed: int = 7
    n_users: int = 300
    iterations: int = 100
    min_leaf: int = 6
    k: int = 10
    folds: int = 10
    families: Sequence[Family] = tuple(Family)
    k_list: Sequence[int] = DEFAULT_K
    avg_users: int = 10
    workers: int = 1
    population: PopulationConfig | None = None
    datasets: Sequence[DatasetKind] = field(default_factory=lambda: tuple(DatasetKind))


def _spec(settings: ReproduceSettings, family: Family, seed: int) -> ClassifierSpec:
    return ClassifierSpec(family, min_leaf=settings.min_leaf, k=settings.k,
                          iterations=settings.iterations, seed=seed)


def reproduce(settings: ReproduceSettings, out_dir: Path | None = None) -> dict:
    """Run the pipeline; returns the report and, with ``out_dir``, writes it to files."""
    pop_cfg = replace(settings.population or PopulationConfig(),
                      n_users=settings.n_users, seed=settings.seed)
    records = simulate(pop_cfg).to_records()
    datasets = build_all_datasets(records)
    log.info("generated %d links for %d users", len(records), settings.n_users)

    report: dict = {
        "seed": settings.seed,
        "population": {"users": settings.n_users, "links": len(records)},
        "datasets": {}, "cv": {}, "information_gain": {},
        "precision_at_k": {}, "avg_users_precision_at_k": {},
    }
    curves, user_curves = {}, {}
    for kind in settings.datasets:
        full = datasets[kind]
        report["datasets"][kind.value] = {
            "links": len(full), "restricted": full.positives,
            "unrestricted": full.negatives, "imbalance_rate": full.imbalance_rate,
            "users": len(set(full.owners[full.y == 1].tolist())),
        }
        if not full.usable:
            continue
        balanced = balance_undersample(full, settings.seed)
        report["information_gain"][kind.value] = information_gain_ranking(balanced).to_dict()
        for family in settings.families:
            log.info("cv %s on %s", family.value, kind.value)
            cv = stratified_cv(_spec(settings, family, settings.seed), balanced,
                               folds=settings.folds, seed=settings.seed,
                               workers=settings.workers)
            report["cv"].setdefault(family.value, {})[kind.value] = cv.to_dict()

        best = Family.ROTATION_FOREST if Family.ROTATION_FOREST in settings.families \
            else settings.families[0]
        test_size = len(balanced) - (2 * len(balanced)) // 3
        ks = [k for k in settings.k_list if k <= test_size]
        curve = precision_at_k_split(_spec(settings, best, settings.seed), balanced, ks,
                                     seed=settings.seed, workers=settings.workers)
        curves[kind.value] = curve
        report["precision_at_k"][kind.value] = {"family": best.value, **curve.to_dict()}

        if settings.avg_users > 0:
            restricted_users = sorted(set(full.owners[full.y == 1].tolist()))
            rng = np.random.default_rng(settings.seed)
            picked = sorted(rng.choice(restricted_users,
                                       size=min(settings.avg_users, len(restricted_users)),
                                       replace=False).tolist())
            ucurve = avg_users_precision_at_k(_spec(settings, best, settings.seed), full,
                                              USER_K, seed=settings.seed,
                                              users=picked, workers=settings.workers)
            user_curves[kind.value] = ucurve
            report["avg_users_precision_at_k"][kind.value] = {
                "family": best.value, "users": picked, **ucurve.to_dict()}

    groups = group_by_owner(records)
    report["heuristic"] = {
        "cs_avg_precision": {str(k): cs_avg_precision(groups, k) for k in HEURISTIC_K},
        "restriction_rate_by_rank_position": {
            str(p): r for p, r in restriction_rate_by_rank_position(groups).items()},
        "restriction_precision_by_cs_value": {
            str(s): r for s, r in restriction_precision_by_cs_value(records).items()},
    }

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "links.csv").write_text(links_to_csv(records))
        (out_dir / "report.json").write_text(to_json(report))
        (out_dir / "report.txt").write_text(render_text(report, curves, user_curves))
        for name, c in curves.items():
            (out_dir / f"precision_at_k_{name}.csv").write_text(c.to_csv())
        for name, c in user_curves.items():
            (out_dir / f"avg_users_precision_at_k_{name}.csv").write_text(c.to_csv())
    return report


def render_text(report: dict, curves: dict, user_curves: dict) -> str:
    kinds = list(report["datasets"])
    parts = [table(["dataset", "users", "restricted", "unrestricted", "links", "imbalance"],
                   [[k, d["users"], d["restricted"], d["unrestricted"], d["links"],
                     d["imbalance_rate"]] for k, d in report["datasets"].items()],
                   title="Datasets")]
    if report["cv"]:
        parts.append("Cross-validation\n" + cv_table(report["cv"], kinds))
    for kind, ig in report["information_gain"].items():
        parts.append(table(["feature", "information_gain"],
                           [[e["feature"], e["information_gain"]] for e in ig["ranking"]],
                           title=f"Information gain ({kind})"))
    if curves:
        parts.append("Precision@k (2/3 train, 1/3 test)\n" + curve_table(curves))
    if user_curves:
        parts.append("Average users precision@k (leave one user out)\n" + curve_table(user_curves))
    h = report["heuristic"]
    parts.append(table(["k", "cs_avg_precision"],
                       [[k, v] for k, v in h["cs_avg_precision"].items()],
                       title="Connection-Strength heuristic"))
    parts.append(table(["rank_position", "restricted_rate"],
                       [[p, v] for p, v in h["restriction_rate_by_rank_position"].items()]))
    return "\n".join(parts)
