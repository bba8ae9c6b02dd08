"""Command-line entry points."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import timedelta
from pathlib import Path

from .classifiers import ClassifierSpec, Family, dump_model, fit, load_model
from .classifiers.infogain import information_gain_ranking
from .config import classifier_spec, population_config, read_flat
from .datasets import balance_undersample, build_all_datasets, read_dataset, write_dataset
from .errors import LinkTrustError
from .evaluation import (avg_users_precision_at_k, cs_avg_precision, precision_at_k_split,
                         restriction_rate_by_rank_position, stratified_cv)
from .model import group_by_owner, parse_link_records, parse_privacy_snapshots, write_link_records
from .pipeline import HEURISTIC_K, ReproduceSettings, reproduce
from .privacy import (app_count_summary, day_after_removal_report, install_rate_report,
                      settings_change_detection, settings_distribution)
from .report import cv_table, table, to_json
from .service import ScoringService, make_server, score_owner
from .synth import PopulationConfig, generate_population

PRIVACY_REPORTS = ("apps", "removal", "install-rate", "settings", "changes", "all")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _links(path):
    with open(path, newline="") as f:
        return parse_link_records(f)


def _dataset(path, balance_seed=None):
    with open(path, newline="") as f:
        ds = read_dataset(f)
    return ds if balance_seed is None else balance_undersample(ds, balance_seed)


def _spec(args) -> ClassifierSpec:
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as f:
            values = read_flat(f)
    return classifier_spec(values, family=args.family, min_leaf=args.min_leaf, k=args.k,
                           iterations=args.iterations, seed=args.seed)


def _emit(args, payload: dict, text: str) -> None:
    """Write JSON + text when --out-dir is set; print the chosen format to stdout."""
    if getattr(args, "out_dir", None):
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(to_json(payload))
        (out / "report.txt").write_text(text)
    sys.stdout.write(to_json(payload) if args.format == "json" else text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth(args) -> None:
    cfg = PopulationConfig()
    if args.config:
        with open(args.config) as f:
            cfg = population_config(read_flat(f))
    cfg.seed = args.seed
    if args.users is not None:
        cfg.n_users = args.users
    records = generate_population(cfg)
    with open(args.out, "w", newline="") as f:
        write_link_records(records, f)


def cmd_score(args) -> None:
    model = None
    if args.model:
        with open(args.model) as f:
            model = load_model(f)
    owners = [score_owner(links, model) for links in group_by_owner(_links(args.links)).values()]
    if args.format == "json":
        sys.stdout.write(to_json({"owners": owners}))
        return
    for o in owners:
        rows = [[r["rank_position"], r["friend"], r["score"],
                 "yes" if r["friend"] in o["recommended"] else ""]
                + ([o["probabilities"][r["friend"]]] if model else [])
                for r in o["ranking"]]
        headers = ["rank", "friend", "cs", "recommended"] + (["p_restrict"] if model else [])
        sys.stdout.write(table(headers, rows, title=f"owner {o['owner']}") + "\n")


def cmd_build_datasets(args) -> None:
    datasets = build_all_datasets(_links(args.links))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for kind, ds in datasets.items():
        with open(out / f"{kind.value}.csv", "w", newline="") as f:
            write_dataset(ds, f)
        if args.balance_seed is not None and ds.usable:
            with open(out / f"{kind.value}_balanced.csv", "w", newline="") as f:
                write_dataset(balance_undersample(ds, args.balance_seed), f)


def cmd_train(args) -> None:
    model = fit(_spec(args), _dataset(args.dataset, args.balance_seed), workers=args.workers)
    with open(args.out, "w") as f:
        dump_model(model, f)


def cmd_evaluate(args) -> None:
    if args.mode == "heuristic":
        groups = group_by_owner(_links(args.links))
        ks = args.k_list or list(HEURISTIC_K)
        payload = {"cs_avg_precision": {str(k): cs_avg_precision(groups, k) for k in ks},
                   "restriction_rate_by_rank_position": {
                       str(p): r for p, r in restriction_rate_by_rank_position(groups).items()}}
        text = table(["k", "cs_avg_precision"],
                     [[k, v] for k, v in payload["cs_avg_precision"].items()])
        _emit(args, payload, text)
        return
    spec = _spec(args)
    if args.mode == "cv":
        ds = _dataset(args.dataset, args.balance_seed)
        report = stratified_cv(spec, ds, folds=args.folds, seed=args.seed, workers=args.workers)
        payload = {"classifier": spec.to_dict(), **report.to_dict()}
        _emit(args, payload, cv_table({spec.family.value: {"dataset": report.to_dict()}},
                                      ["dataset"]))
        return
    if args.mode == "prec-at-k":
        ds = _dataset(args.dataset, args.balance_seed)
        curve = precision_at_k_split(spec, ds, args.k_list or [1, 10, 100], seed=args.seed,
                                     workers=args.workers)
    else:
        ds = _dataset(args.dataset)
        users = args.users.split(",") if args.users else None
        curve = avg_users_precision_at_k(spec, ds, args.k_list or [1, 5, 10], seed=args.seed,
                                         users=users, workers=args.workers)
    if getattr(args, "out_dir", None):
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        (Path(args.out_dir) / "curve.csv").write_text(curve.to_csv())
    _emit(args, {"classifier": spec.to_dict(), **curve.to_dict()},
          table(["k", "precision"], curve.points))


def cmd_rank_features(args) -> None:
    ranking = information_gain_ranking(_dataset(args.dataset, args.balance_seed))
    payload = ranking.to_dict()
    _emit(args, payload, table(["feature", "information_gain"],
                               [[e["feature"], e["information_gain"]] for e in payload["ranking"]]))


def cmd_privacy(args) -> None:
    with open(args.snapshots, newline="") as f:
        snaps = parse_privacy_snapshots(f)
    kinds = PRIVACY_REPORTS[:-1] if args.report == "all" else (args.report,)
    payload, parts = {}, []
    for kind in kinds:
        if kind == "apps":
            d = app_count_summary(snaps).to_dict()
            parts.append(table(["threshold", "below", "at_least", "above"],
                               [[t, d["fraction_below"][t], d["fraction_at_least"][t],
                                 d["fraction_above"][t]] for t in d["fraction_below"]],
                               title=f"Installed apps ({d['users']} users)"))
        elif kind == "removal":
            d = day_after_removal_report(snaps).to_dict()
            parts.append(table(["measure", "value"], list(d["summary"].items()),
                               title="Day-after removal"))
        elif kind == "install-rate":
            d = install_rate_report(snaps, timedelta(days=args.window_days)).to_dict()
            parts.append(table(["unit", "median", "mean"],
                               [["day", d["per_day"]["median"], d["per_day"]["mean"]],
                                [f"{d['window_days']:g} days", d["per_window"]["median"],
                                 d["per_window"]["mean"]]],
                               title="Install rate"))
        elif kind == "settings":
            d = settings_distribution(snaps)
            parts.append(table(["setting", "audience", "share"],
                               [[s, a, v] for s, levels in d.items() for a, v in levels.items()],
                               title="Settings distribution"))
        else:
            changes = settings_change_detection(snaps)
            d = {"users": [{"user": c.user, "changed": c.changed,
                            "reverted_to_less_restrictive": c.reverted_to_less_restrictive}
                           for c in changes],
                 "changed": sum(c.changed for c in changes),
                 "reverted": sum(c.reverted_to_less_restrictive for c in changes)}
            parts.append(table(["measure", "users"],
                               [["changed", d["changed"]], ["reverted", d["reverted"]]],
                               title="Settings changes"))
        payload[kind] = d
    _emit(args, payload, "\n".join(parts))


def cmd_reproduce(args) -> None:
    settings = ReproduceSettings(seed=args.seed, n_users=args.users, iterations=args.iterations,
                                 folds=args.folds, avg_users=args.avg_users, workers=args.workers,
                                 min_leaf=args.min_leaf, k=args.k)
    if args.families:
        settings.families = tuple(Family(f) for f in args.families.split(","))
    if args.config:
        with open(args.config) as f:
            settings.population = population_config(read_flat(f))
    reproduce(settings, Path(args.out_dir))
    sys.stdout.write((Path(args.out_dir) / "report.txt").read_text())


def cmd_serve(args) -> None:
    model = None
    if args.model:
        with open(args.model) as f:
            model = load_model(f)
    server = make_server(args.host, args.port, ScoringService(model, args.cache_size))
    host, port = server.server_address[:2]
    print(json.dumps({"listening": f"http://{host}:{port}"}), flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


# ---------------------------------------------------------------------------
# parser

def _classifier_args(p, family_required=True) -> None:
    p.add_argument("--family", required=family_required, choices=[f.value for f in Family])
    p.add_argument("--min-leaf", type=int)
    p.add_argument("--k", type=int, help="neighbours for k-nearest")
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config", help="flat key = value file with classifier fields")
    p.add_argument("--workers", type=int, default=1)


def _report_args(p) -> None:
    p.add_argument("--out-dir")
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linktrust")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic links CSV")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--users", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="rank friends by Connection-Strength")
    p.add_argument("--links", required=True)
    p.add_argument("--model")
    p.add_argument("--format", choices=("text", "json"), default="json")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("build-datasets", help="emit the three labelled datasets")
    p.add_argument("--links", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--balance-seed", type=int)
    p.set_defaults(func=cmd_build_datasets)

    p = sub.add_parser("train", help="fit a classifier and save it as JSON")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--balance-seed", type=int)
    _classifier_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="run an evaluation protocol")
    modes = p.add_subparsers(dest="mode", required=True)
    for mode in ("cv", "prec-at-k", "avg-users-prec"):
        m = modes.add_parser(mode)
        m.add_argument("--dataset", required=True)
        if mode != "avg-users-prec":
            m.add_argument("--balance-seed", type=int)
        if mode == "cv":
            m.add_argument("--folds", type=int, default=10)
        else:
            m.add_argument("--k-list", type=_ints)
        if mode == "avg-users-prec":
            m.add_argument("--users", help="comma-separated owners to hold out (default all)")
        _classifier_args(m)
        _report_args(m)
        m.set_defaults(func=cmd_evaluate)
    m = modes.add_parser("heuristic")
    m.add_argument("--links", required=True)
    m.add_argument("--k-list", type=_ints)
    _report_args(m)
    m.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank-features", help="information-gain feature ranking")
    p.add_argument("--dataset", required=True)
    p.add_argument("--balance-seed", type=int)
    _report_args(p)
    p.set_defaults(func=cmd_rank_features)

    p = sub.add_parser("privacy", help="installed-app and privacy-setting reports")
    p.add_argument("--snapshots", required=True)
    p.add_argument("--report", choices=PRIVACY_REPORTS, default="all")
    p.add_argument("--window-days", type=float, default=7.0)
    _report_args(p)
    p.set_defaults(func=cmd_privacy)

    p = sub.add_parser("reproduce", help="full synthetic pipeline with reports")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--users", type=int, default=300)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--min-leaf", type=int, default=6)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--avg-users", type=int, default=10)
    p.add_argument("--families", help="comma-separated subset of classifier families")
    p.add_argument("--config", help="population config file")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("serve", help="run the HTTP scoring service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--model")
    p.add_argument("--cache-size", type=int, default=10_000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except LinkTrustError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
