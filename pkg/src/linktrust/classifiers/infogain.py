"""Information-gain feature ranking over MDL-discretised features."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..datasets import LabeledDataset
from ..errors import EmptyDataset
from ..features import FEATURE_NAMES


def entropy(counts) -> float:
    """Shannon entropy in bits of a class-count vector."""
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n <= 0:
        return 0.0
    p = counts[counts > 0] / n
    return float(-(p * np.log2(p)).sum())


def _entropy_rows(pos: np.ndarray, n: np.ndarray) -> np.ndarray:
    neg = n - pos
    out = np.zeros_like(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        for c in (pos, neg):
            p = np.where(n > 0, c / n, 0.0)
            out -= np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return out


def mdl_cut_points(x: np.ndarray, y: np.ndarray) -> list[float]:
    """Recursive entropy-minimising binary cuts with the Fayyad-Irani MDL stop."""
    order = np.argsort(x, kind="stable")
    xs = np.asarray(x, dtype=float)[order]
    ys = np.asarray(y, dtype=np.int64)[order]
    cum = np.r_[0, np.cumsum(ys)]
    cuts: list[float] = []
    stack = [(0, len(xs))]
    while stack:
        lo, hi = stack.pop()
        n = hi - lo
        if n < 2:
            continue
        # candidate cut after position j, lo < j < hi, between distinct values
        j = np.arange(lo + 1, hi)
        j = j[xs[j - 1] < xs[j]]
        if j.size == 0:
            continue
        total_pos = cum[hi] - cum[lo]
        n_left = (j - lo).astype(float)
        pos_left = (cum[j] - cum[lo]).astype(float)
        n_right = n - n_left
        pos_right = total_pos - pos_left
        weighted = (n_left * _entropy_rows(pos_left, n_left)
                    + n_right * _entropy_rows(pos_right, n_right)) / n
        b = int(np.argmin(weighted))
        cut = int(j[b])
        ent = entropy([total_pos, n - total_pos])
        ent1 = entropy([pos_left[b], n_left[b] - pos_left[b]])
        ent2 = entropy([pos_right[b], n_right[b] - pos_right[b]])
        gain = ent - weighted[b]
        k = int(total_pos > 0) + int(total_pos < n)
        k1 = int(pos_left[b] > 0) + int(pos_left[b] < n_left[b])
        k2 = int(pos_right[b] > 0) + int(pos_right[b] < n_right[b])
        delta = math.log2(3 ** k - 2) - (k * ent - k1 * ent1 - k2 * ent2)
        if gain > (math.log2(n - 1) + delta) / n:
            cuts.append((xs[cut - 1] + xs[cut]) / 2.0)
            stack.append((lo, cut))
            stack.append((cut, hi))
    return sorted(cuts)


def information_gain(x: np.ndarray, y: np.ndarray) -> float:
    """H(label) - H(label | discretised x); NaN values form their own bin."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise EmptyDataset("no rows")
    observed = ~np.isnan(x)
    bins = np.full(len(x), -1, dtype=np.int64)
    if observed.any():
        cuts = mdl_cut_points(x[observed], y[observed])
        bins[observed] = np.searchsorted(np.asarray(cuts), x[observed], side="left")
    h = entropy([y.sum(), len(y) - y.sum()])
    cond = 0.0
    for b in np.unique(bins):
        yb = y[bins == b]
        cond += len(yb) / len(y) * entropy([yb.sum(), len(yb) - yb.sum()])
    return max(0.0, h - cond)


@dataclass(frozen=True)
class FeatureRanking:
    entries: tuple  # ((name, gain_bits), ...), best first

    def names(self) -> list[str]:
        return [name for name, _ in self.entries]

    def rank_of(self, name: str) -> int:
        """1-based position of a feature."""
        return self.names().index(name) + 1

    def to_dict(self) -> dict:
        return {"ranking": [{"feature": n, "information_gain": g} for n, g in self.entries]}


def information_gain_ranking(dataset: LabeledDataset, names=FEATURE_NAMES) -> FeatureRanking:
    if len(dataset) == 0:
        raise EmptyDataset("dataset is empty")
    gains = [(name, information_gain(dataset.X[:, j], dataset.y)) for j, name in enumerate(names)]
    # stable sort keeps column order among equal gains
    gains.sort(key=lambda t: -t[1])
    return FeatureRanking(tuple(gains))
