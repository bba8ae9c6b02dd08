"""Metrics and evaluation protocols for classifiers and the heuristic."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .classifiers import ClassifierSpec, fit
from .datasets import LabeledDataset, balance_undersample
from .errors import (KExceedsTestSize, LengthMismatch, NoEligibleUsers, SingleClass,
                     TooFewInstances, TooFewOwners)
from .heuristic import connection_strength, rank_friends, recommend_restrictions
from .model import LinkRecord, UserId

THRESHOLD = 0.5


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC: P(pos > neg) + 0.5 P(tie), via midranks."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if len(scores) != len(labels):
        raise LengthMismatch("scores and labels differ in length")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both classes")
    ranks = rankdata(scores)  # average ranks for ties
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class Confusion:
    f_measure: float
    true_positive_rate: float
    false_positive_rate: float
    precision: float


def classification_metrics(predictions: Sequence[int], labels: Sequence[int]) -> Confusion:
    p = np.asarray(predictions, dtype=np.int64)
    t = np.asarray(labels, dtype=np.int64)
    if len(p) != len(t):
        raise LengthMismatch("predictions and labels differ in length")
    tp = int(np.sum((p == 1) & (t == 1)))
    fp = int(np.sum((p == 1) & (t == 0)))
    fn = int(np.sum((p == 0) & (t == 1)))
    tn = int(np.sum((p == 0) & (t == 0)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0
    return Confusion(f, recall, fpr, precision)


@dataclass
class CvReport:
    auc: float
    f_measure: float
    true_positive_rate: float
    false_positive_rate: float
    folds: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"auc": self.auc, "f_measure": self.f_measure,
                "true_positive_rate": self.true_positive_rate,
                "false_positive_rate": self.false_positive_rate,
                "folds": self.folds}


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Fold index per row; each class is shuffled then dealt round-robin."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(len(idx))]
        # continue dealing where the previous class stopped so fold sizes stay even
        assignment[idx] = (np.arange(len(idx)) + offset) % folds
        offset = (offset + len(idx)) % folds
    return assignment


def stratified_cv(spec: ClassifierSpec, dataset: LabeledDataset, folds: int = 10,
                  seed: int = 0, workers: int = 1) -> CvReport:
    y = dataset.y
    if min(int(y.sum()), int(len(y) - y.sum())) < folds:
        raise TooFewInstances(f"each class needs at least {folds} instances")
    assignment = stratified_folds(y, folds, seed)
    per_fold = []
    for k in range(folds):
        test = assignment == k
        model = fit(spec, dataset.subset(np.flatnonzero(~test)), workers=workers)
        scores = model.predict_proba(dataset.X[test])
        m = classification_metrics((scores >= THRESHOLD).astype(int), y[test])
        per_fold.append({"fold": k, "auc": auc(scores, y[test]), "f_measure": m.f_measure,
                         "true_positive_rate": m.true_positive_rate,
                         "false_positive_rate": m.false_positive_rate})
    mean = {key: float(np.mean([f[key] for f in per_fold]))
            for key in ("auc", "f_measure", "true_positive_rate", "false_positive_rate")}
    return CvReport(**mean, folds=per_fold)


@dataclass
class PrecisionCurve:
    points: list[tuple[int, float]]

    def __post_init__(self):
        ks = [k for k, _ in self.points]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("k values must be strictly increasing")

    def to_dict(self) -> dict:
        return {"points": [{"k": k, "precision": p} for k, p in self.points]}

    def to_csv(self) -> str:
        return "k,precision\n" + "".join(f"{k},{p!r}\n" for k, p in self.points)

    def at(self, k: int) -> float:
        return dict(self.points)[k]


def ranked_precision(scores: np.ndarray, labels: np.ndarray, k: int) -> float:
    """Precision among the k highest scores; equal scores keep input order."""
    order = np.argsort(-np.asarray(scores, dtype=float), kind="stable")
    return float(np.asarray(labels)[order[:k]].sum() / k)


def precision_at_k_split(spec: ClassifierSpec, dataset: LabeledDataset,
                         k_list: Sequence[int], seed: int = 0,
                         workers: int = 1) -> PrecisionCurve:
    """Random 2/3 train, 1/3 test; precision among top-k test probabilities."""
    k_list = sorted(k_list)
    n = len(dataset)
    perm = np.random.default_rng(seed).permutation(n)
    n_train = (2 * n) // 3
    train, test = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    if k_list and k_list[-1] > len(test):
        raise KExceedsTestSize(f"k={k_list[-1]} exceeds test size {len(test)}")
    model = fit(spec, dataset.subset(train), workers=workers)
    scores = model.predict_proba(dataset.X[test])
    labels = dataset.y[test]
    return PrecisionCurve([(k, ranked_precision(scores, labels, k)) for k in k_list])


def avg_users_precision_at_k(spec: ClassifierSpec, dataset: LabeledDataset,
                             k_list: Sequence[int], seed: int = 0,
                             users: Sequence[UserId] | None = None,
                             workers: int = 1) -> PrecisionCurve:
    """Leave-one-user-out precision@k averaged over users.

    For each evaluated user, the model trains on every other user's links
    (undersampled to balance) and ranks the held-out user's links. Users with
    fewer than k links do not count toward the k point.
    """
    k_list = sorted(k_list)
    owners = dataset.owners
    distinct = list(dict.fromkeys(owners.tolist()))
    if len(distinct) < 2:
        raise TooFewOwners("need at least two owners")
    evaluated = distinct if users is None else list(users)
    sums = defaultdict(float)
    counts = defaultdict(int)
    for i, user in enumerate(evaluated):
        held = owners == user
        rest = dataset.subset(np.flatnonzero(~held))
        if rest.positives == 0:
            continue
        train = balance_undersample(rest, seed + i)
        model = fit(spec, train, workers=workers)
        scores = model.predict_proba(dataset.X[held])
        labels = dataset.y[held]
        for k in k_list:
            if len(labels) >= k:
                sums[k] += ranked_precision(scores, labels, k)
                counts[k] += 1
    return PrecisionCurve([(k, sums[k] / counts[k] if counts[k] else 0.0) for k in k_list])


# ---------------------------------------------------------------------------
# heuristic diagnostics

def _group(corpus) -> Mapping[UserId, Sequence[LinkRecord]]:
    if isinstance(corpus, Mapping):
        return corpus
    groups: dict = {}
    for link in corpus:
        groups.setdefault(link.owner, []).append(link)
    return groups


def user_precision_at_k(links: Sequence[LinkRecord], k: int) -> float:
    restricted = {l.friend for l in links if l.restricted}
    lowest = rank_friends(links)[:k]
    return sum(s.friend in restricted for s in lowest) / k


def cs_avg_precision(corpus, k: int) -> float:
    """Mean over users with at least k friends of restricted share among the k lowest-CS friends."""
    groups = _group(corpus)
    values = [user_precision_at_k(links, k) for links in groups.values() if len(links) >= k]
    if not values:
        raise NoEligibleUsers(f"no user has at least {k} friends")
    return sum(values) / len(values)


def restriction_precision_by_cs_value(corpus: Sequence[LinkRecord]) -> dict[int, float]:
    total = defaultdict(int)
    restricted = defaultdict(int)
    for link in corpus:
        s = connection_strength(link)
        total[s] += 1
        restricted[s] += link.restricted
    return {s: restricted[s] / total[s] for s in sorted(total)}


def restriction_rate_by_rank_position(corpus) -> dict[int, float]:
    total = defaultdict(int)
    restricted = defaultdict(int)
    for links in _group(corpus).values():
        flags = {l.friend: l.restricted for l in links}
        for s in recommend_restrictions(links):
            total[s.rank_position] += 1
            restricted[s.rank_position] += flags[s.friend]
    return {p: restricted[p] / total[p] for p in sorted(total)}
