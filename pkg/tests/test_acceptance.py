"""Acceptance criteria, one test per criterion (criterion 3 has two parts).

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary and when this file is run directly.
"""

import json
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from linktrust.classifiers import ClassifierSpec, Family, fit
from linktrust.classifiers.ensembles import AdaBoostM1, Bagging, RotationForest, rotation_matrix
from linktrust.classifiers.infogain import information_gain_ranking
from linktrust.classifiers.simple import DecisionTree
from linktrust.cli import main as cli_main
from linktrust.datasets import DatasetKind, LabeledDataset, balance_undersample, build_all_datasets
from linktrust.evaluation import (auc, classification_metrics, cs_avg_precision,
                                  precision_at_k_split, stratified_cv)
from linktrust.heuristic import connection_strength
from linktrust.model import LinkDisposition as D
from linktrust.model import LinkRecord
from linktrust.privacy import (app_count_summary, day_after_removal_report,
                               settings_change_detection, settings_distribution)
from linktrust.service import ScoringService, make_server
from linktrust.synth import CLASS_NAMES, DEFAULT_MEANS, PopulationConfig, generate_population, simulate
from oracles import confusion_by_hand, cs_avg_precision_brute, cs_direct
import privacy_fixture as pf

RESULTS: list[str] = []
SEED = 7


def report(criterion: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def auc_pairs(scores, labels) -> float:
    """All-pairs comparator in exact integer half-units."""
    s = np.asarray(scores)
    l = np.asarray(labels)
    pos, neg = s[l == 1], s[l == 0]
    twice_wins = 2 * int((pos[:, None] > neg[None, :]).sum()) + int((pos[:, None] == neg[None, :]).sum())
    return twice_wins / (2 * len(pos) * len(neg))


def random_link(rng, owner, friend):
    ofc = int(rng.integers(1, 2000))
    cf = int(rng.integers(0, ofc + 1))
    return LinkRecord(owner=owner, friend=friend, are_family=bool(rng.random() < 0.1),
                      common_chat_messages=int(rng.integers(0, 5000)), common_friends=cf,
                      common_groups=int(rng.integers(0, 40)), common_posts=int(rng.integers(0, 40)),
                      tagged_photos=int(rng.integers(0, 40)), tagged_videos=int(rng.integers(0, 40)),
                      owner_friend_count=ofc,
                      friend_friend_count=None if rng.random() < 0.1 else cf + int(rng.integers(0, 900)),
                      disposition=list(D)[int(rng.integers(0, 4))])


# ---------------------------------------------------------------------------

def test_c1_metric_oracles():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 201))
        labels = rng.integers(0, 2, n)
        labels[:2] = [0, 1]
        # coarse grid forces ties
        scores = rng.integers(0, 20, n) / 20 if rng.random() < 0.5 else rng.random(n)
        worst = max(worst, abs(auc(scores, labels) - auc_pairs(scores, labels)))
    conf_ok = True
    for _ in range(50):
        n = int(rng.integers(1, 100))
        p, t = rng.integers(0, 2, n), rng.integers(0, 2, n)
        m, ref = classification_metrics(p, t), confusion_by_hand(p.tolist(), t.tolist())
        conf_ok &= (m.f_measure, m.true_positive_rate, m.false_positive_rate, m.precision) == \
            (ref["f"], ref["tpr"], ref["fpr"], ref["precision"])
    fixture = [
        LinkRecord("u1", "a", False, 0, 0, 0, 0, 0, 0, 5, 3, D.RECOMMENDED_RESTRICTED),
        LinkRecord("u1", "b", False, 1, 0, 0, 0, 0, 0, 5, 3, D.ALL_UNRESTRICTED),
        LinkRecord("u1", "c", False, 5, 0, 0, 0, 0, 0, 5, 3, D.ALPHABETICALLY_RESTRICTED),
        LinkRecord("u2", "d", False, 2, 0, 0, 0, 0, 0, 5, 3, D.ALL_UNRESTRICTED),
        LinkRecord("u2", "e", False, 2, 0, 0, 0, 0, 0, 5, 3, D.RECOMMENDED_RESTRICTED),
        LinkRecord("u3", "f", True, 0, 0, 0, 0, 0, 0, 5, 3, D.RECOMMENDED_RESTRICTED),
    ]
    # frozen hand values: k=1 -> (1 + 0 + 1) / 3, k=2 -> (1/2 + 1/2) / 2
    cs_ok = (abs(cs_avg_precision(fixture, 1) - 2 / 3) < 1e-12
             and abs(cs_avg_precision(fixture, 2) - 0.5) < 1e-12)
    for i in range(100):
        n = int(rng.integers(1, 501))
        owners = rng.integers(0, int(rng.integers(1, 8)), n)
        links = [random_link(rng, f"u{o}", f"f{j}") for j, o in enumerate(owners)]
        k = int(rng.integers(1, 1 + min(25, max(np.bincount(owners)))))
        cs_ok &= abs(cs_avg_precision(links, k) - cs_avg_precision_brute(links, k)) < 1e-12
    elapsed = time.perf_counter() - start
    report("1", worst <= 1e-12 and conf_ok and cs_ok and elapsed < 10,
           f"max |auc - all-pairs| = {worst:.1e}, confusion exact = {conf_ok}, "
           f"cs_avg_precision exact = {cs_ok}, {elapsed:.1f}s")


def test_c2_connection_strength_formula():
    rng = np.random.default_rng(2)
    links = [random_link(rng, "u", f"f{i}") for i in range(10_000)]
    mismatches = sum(connection_strength(l) != cs_direct(l) for l in links)
    family_ok = all(connection_strength(l) >= 1000 for l in links if l.are_family)
    report("2", mismatches == 0 and family_ok,
           f"{mismatches} mismatches on 10,000 links; family links >= 1000: {family_ok}")


def table1_corpus():
    pools = {D.RECOMMENDED_RESTRICTED: 2860, D.ALPHABETICALLY_RESTRICTED: 6145,
             D.ALL_UNRESTRICTED: 138_286}
    links = []
    for d, n in pools.items():
        for i in range(n):
            links.append(LinkRecord(f"u{i % 1000:03d}", f"{d.value[:3]}{i}", False, i % 3, i % 4,
                                    0, 0, 0, 0, 200, 100, d))
    return links


@pytest.fixture(scope="module")
def table1_datasets():
    return build_all_datasets(table1_corpus())


def test_c3_dataset_sizes_and_balancing(table1_datasets):
    ds = table1_datasets
    sizes = tuple(len(ds[k]) for k in DatasetKind)
    rates = [100 * ds[k].imbalance_rate for k in DatasetKind]
    bal = [balance_undersample(ds[k], SEED) for k in DatasetKind]
    balanced_ok = all(b.positives == b.negatives == ds[k].positives for b, k in zip(bal, DatasetKind))
    rates_ok = abs(rates[0] - 2.03) <= 0.01 and abs(rates[1] - 4.25) <= 0.01
    report("3a", sizes == (141_146, 144_431, 147_291) and rates_ok and balanced_ok,
           f"sizes {sizes}; FakeProfiles {rates[0]:.3f}%, FriendsRestriction {rates[1]:.3f}%; "
           f"undersampled 1:1 with all positives: {balanced_ok}")


def test_c3_all_links_imbalance_rate(table1_datasets):
    ds = table1_datasets[DatasetKind.ALL_LINKS]
    rate = 100 * ds.imbalance_rate
    report("3b", abs(rate - 6.01) <= 0.01,
           f"AllLinks imbalance {ds.positives}/{len(ds)} = {rate:.3f}% (target 6.01% +/- 0.01 pp)")


def test_c4_synthetic_calibration():
    start = time.perf_counter()
    pop = simulate(PopulationConfig(n_users=20_000, seed=SEED))
    failures, worst = [], 0.0
    for name, targets in DEFAULT_MEANS.items():
        col = pop.friend_friend_count if name == "friend_friend_count" else pop.counters[name]
        for c, target in enumerate(targets):
            values = col[pop.link_class == c]
            if name == "friend_friend_count":
                values = values[values >= 0]
            mean = values.mean()
            tol = 0.10 if target < 0.1 else 0.05
            dev = abs(mean - target) / target if target else abs(mean)
            worst = max(worst, dev / tol)
            if dev > tol:
                failures.append(f"{name}/{CLASS_NAMES[c]} {mean:.4f} vs {target}")
    elapsed = time.perf_counter() - start
    report("4", not failures and len(pop) >= 10_000 and elapsed < 30,
           f"{len(pop):,} links, 21 class means, worst deviation {worst:.2f} of tolerance, "
           f"{elapsed:.1f}s" + (f"; off: {failures}" if failures else ""))


@pytest.fixture(scope="module")
def fake_profiles():
    records = generate_population(PopulationConfig(n_users=300, seed=SEED))
    return balance_undersample(build_all_datasets(records)[DatasetKind.FAKE_PROFILES], SEED)


def test_c5_rotation_forest_beats_one_r(fake_profiles):
    start = time.perf_counter()
    rot = stratified_cv(ClassifierSpec(Family.ROTATION_FOREST, iterations=100, min_leaf=6, seed=SEED),
                        fake_profiles, folds=10, seed=SEED)
    one_r = stratified_cv(ClassifierSpec(Family.ONE_R, seed=SEED), fake_profiles, folds=10, seed=SEED)
    elapsed = time.perf_counter() - start
    report("5", rot.auc >= 0.90 and rot.auc > one_r.auc and elapsed < 300,
           f"10-fold AUC RotationForest {rot.auc:.4f} vs OneR {one_r.auc:.4f} "
           f"on {len(fake_profiles)} balanced links, {elapsed:.0f}s")


def test_c6_feature_ranking(fake_profiles):
    ranking = information_gain_ranking(fake_profiles)
    top3 = ranking.names()[:3]
    report("6", "common_friends" in top3 and "jaccard_coefficient" in top3, f"top 3 = {top3}")


def test_c7_precision_at_k(fake_profiles):
    ks = [1, 10, 50, 100, 200]
    curve = precision_at_k_split(ClassifierSpec(Family.ROTATION_FOREST, iterations=100, seed=SEED),
                                 fake_profiles, ks, seed=SEED)
    exact = [k for k, _ in curve.points] == ks and len(curve.to_csv().splitlines()) == len(ks) + 1
    report("7", curve.at(100) >= 0.85 and exact,
           f"precision@100 = {curve.at(100):.3f}; curve has exactly the requested k: {exact}")


def test_c8_reproduce_determinism(tmp_path):
    base = ["reproduce", "--seed", str(SEED), "--users", "40", "--iterations", "10",
            "--folds", "5", "--avg-users", "2"]
    runs = {}
    for name, extra in (("a", []), ("b", []), ("threads", ["--workers", "4"])):
        out = tmp_path / name
        assert cli_main(base + ["--out-dir", str(out)] + extra) == 0
        runs[name] = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    same = runs["a"] == runs["b"] == runs["threads"]
    report("8", same and len(runs["a"]) >= 5,
           f"{len(runs['a'])} output files byte-identical across two runs and 1 vs 4 workers: {same} "
           "(40 users, 10 iterations, 5 folds)")


def test_c9_ensemble_invariants():
    rng = np.random.default_rng(9)
    weight_dev = ortho_dev = 0.0
    leaf_ok = True
    for trial in range(20):
        n, d = int(rng.integers(60, 200)), int(rng.integers(4, 16))
        X = rng.normal(size=(n, d))
        y = (X[:, 0] + rng.normal(scale=1.5, size=n) > 0).astype(int)
        y[:2] = [0, 1]
        min_leaf = int(rng.integers(1, 9))
        seed = int(rng.integers(0, 2**31))
        ada = AdaBoostM1(iterations=10, min_leaf=min_leaf).fit(X, y, seed)
        weight_dev = max([weight_dev] + [abs(s - 1.0) for s in ada.weight_sums])
        for i in range(5):
            R, _ = rotation_matrix(X, y, np.random.default_rng([seed, i]))
            ortho_dev = max(ortho_dev, float(np.abs(R.T @ R - np.eye(d)).max()))
        rot = RotationForest(iterations=5, min_leaf=min_leaf).fit(X, y, seed)
        bag = Bagging(iterations=5, min_leaf=min_leaf).fit(X, y, seed)
        single = DecisionTree(min_leaf).fit(X, y, seed)
        for tree in ada.trees + rot.trees + bag.trees + [single.tree]:
            leaf_ok &= bool(np.all(tree.n_samples[tree.leaves] >= min_leaf))
    report("9", weight_dev <= 1e-9 and ortho_dev <= 1e-9 and leaf_ok,
           f"20 trainings: max |sum w - 1| = {weight_dev:.1e}, max |R'R - I| = {ortho_dev:.1e}, "
           f"all leaves >= minLeaf: {leaf_ok}")


def test_c10_privacy_fixture():
    snaps = pf.snapshots()
    apps = app_count_summary(snaps)
    fractions_ok = all(
        abs(getattr(apps, f"fraction_{kind}")[t] - v) < 1e-12
        for kind, per in pf.EXPECTED_FRACTIONS.items() for t, v in per.items())
    removal = day_after_removal_report(snaps)
    summary = removal.summary()
    removal_ok = all(abs(summary[k] - v) < 1e-12 for k, v in pf.EXPECTED_REMOVAL.items()) and \
        {u.user: u.removal_ratio for u in removal.users if u.removed} == pf.EXPECTED_RATIOS
    dist = settings_distribution(snaps)
    dist_ok = dist["default_privacy"] == pytest.approx(pf.EXPECTED_DEFAULT_PRIVACY) and \
        all(abs(sum(row.values()) - 1.0) < 1e-12 for row in dist.values())
    changes = {c.user: (c.changed, c.reverted_to_less_restrictive)
               for c in settings_change_detection(snaps)}
    revert_ok = changes == pf.EXPECTED_CHANGES
    report("10", fractions_ok and removal_ok and dist_ok and revert_ok,
           f"app thresholds {fractions_ok}, removal ratios {removal_ok}, "
           f"settings distribution {dist_ok}, revert detection {revert_ok}")


def test_c11_service_contract():
    rng = np.random.default_rng(11)
    y = np.arange(100) % 2
    model = fit(ClassifierSpec(Family.NAIVE_BAYES),
                LabeledDataset(None, rng.random((100, 15)) + y[:, None], y, ["o"] * 100))
    srv = make_server("127.0.0.1", 0, ScoringService(model))
    threading.Thread(target=srv.serve_forever, daemon=True).start()
    url = f"http://127.0.0.1:{srv.server_address[1]}/score"

    def post(data: bytes):
        req = urllib.request.Request(url, data=data, headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=30) as r:
                return r.status, json.loads(r.read())
        except urllib.error.HTTPError as e:
            return e.code, json.loads(e.read())

    def payload(n, owner="u1", probs=False, shift=0):
        return json.dumps({"owner": owner, "probabilities": probs, "links": [
            {"friend": f"f{i}", "common_chat_messages": (i + shift) % 9, "common_friends": i % 4,
             "owner_friend_count": 50, "friend_friend_count": 20} for i in range(n)]}).encode()

    try:
        s1, r1 = post(payload(30))
        s2, r2 = post(payload(30))
        hit = r1.pop("cacheHit") is False and r2.pop("cacheHit") is True and r1 == r2
        three = s1 == 200 and len(r1["recommended"]) == 3
        mixed = [payload(3 + i % 35, f"u{i % 11}", i % 4 == 0, i % 3) for i in range(100)]
        mixed[5] = payload(0)
        serial_svc = ScoringService(model)
        serial = [serial_svc.handle_score(b) for b in mixed]
        with ThreadPoolExecutor(max_workers=20) as pool:
            parallel = list(pool.map(post, mixed))
        strip = lambda r: {k: v for k, v in r.items() if k != "cacheHit"}
        same = all(a[0] == b[0] and strip(a[1]) == strip(b[1]) for a, b in zip(serial, parallel))
    finally:
        srv.shutdown()
        srv.server_close()
    report("11", hit and three and same,
           f"repeat -> cacheHit with identical body: {hit}; 30 links -> 3 recommendations: {three}; "
           f"100 concurrent mixed requests equal serial: {same}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-s"]))
