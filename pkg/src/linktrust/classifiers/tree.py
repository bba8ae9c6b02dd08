"""Binary-threshold decision tree for 0/1 labels.

Split search is vectorised over all candidate thresholds of all features at
once: each node does one column-wise argsort and one cumulative sum, so the
Python overhead is per node rather than per threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

GAIN_EPS = 1e-12


def _xlog2x(counts: np.ndarray) -> np.ndarray:
    # counts are whole numbers, so log2(max(c, 1)) is exactly 0 at c in {0, 1}
    counts = np.asarray(counts, dtype=float)
    return counts * np.log2(np.maximum(counts, 1.0))


def _split_scores(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best threshold per feature by information gain.

    Returns ``(gain, split_info, threshold)`` arrays of length n_features, with
    gain = -inf where no threshold leaves ``min_leaf`` rows on both sides.
    """
    n, d = X.shape
    lo, hi = min_leaf, n - min_leaf  # admissible left-branch sizes
    gain = np.full(d, -np.inf)
    split_info = np.zeros(d)
    threshold = np.zeros(d)
    if hi < lo:
        return gain, split_info, threshold

    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    cum_pos = np.cumsum(y[order], axis=0)
    total_pos = cum_pos[-1, 0]

    n_left = np.arange(lo, hi + 1, dtype=float)[:, None]
    n_right = n - n_left
    pos_left = cum_pos[lo - 1:hi].astype(float)
    pos_right = total_pos - pos_left
    # weighted child entropy times n, from counts
    child = (_xlog2x(n_left) - _xlog2x(pos_left) - _xlog2x(n_left - pos_left)
             + _xlog2x(n_right) - _xlog2x(pos_right) - _xlog2x(n_right - pos_right))
    parent = _xlog2x(n) - _xlog2x(total_pos) - _xlog2x(n - total_pos)
    g = (parent - child) / n
    distinct = xs[lo - 1:hi] < xs[lo:hi + 1]
    g = np.where(distinct, g, -np.inf)

    best = np.argmax(g, axis=0)
    cols = np.arange(d)
    gain = g[best, cols]
    nl = n_left[best, 0]
    split_info = (_xlog2x(n) - _xlog2x(nl) - _xlog2x(n - nl)) / n
    below = xs[lo - 1 + best, cols]
    above = xs[lo + best, cols]
    threshold = (below + above) / 2.0
    # adjacent floats can round the midpoint up onto the upper value
    threshold = np.where(threshold >= above, below, threshold)
    return gain, split_info, threshold


def _choose_gain_ratio(gain, split_info):
    """C4.5 rule: among features with at least average gain, maximise gain ratio."""
    valid = gain > GAIN_EPS
    if not valid.any():
        return None
    avg = gain[valid].mean()
    candidates = valid & (gain >= avg - GAIN_EPS)
    ratio = np.where(candidates, gain / np.maximum(split_info, GAIN_EPS), -np.inf)
    return int(np.argmax(ratio))


def _choose_random_subset(gain, rng, max_features):
    perm = rng.permutation(len(gain))
    best, best_gain = None, GAIN_EPS
    for i, f in enumerate(perm):
        if i >= max_features and best is not None:
            break
        if gain[f] > best_gain:
            best, best_gain = int(f), gain[f]
    return best


@dataclass
class Tree:
    feature: np.ndarray    # -1 at leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # fraction of positive training rows at the node
    n_samples: np.ndarray

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=np.int64)
        active = np.arange(len(X))
        while active.size:
            f = self.feature[node[active]]
            internal = f >= 0
            active = active[internal]
            if not active.size:
                break
            f = f[internal]
            cur = node[active]
            go_left = X[active, f] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
        return self.value[node]

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_samples": self.n_samples.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=float),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=np.asarray(d["value"], dtype=float),
            n_samples=np.asarray(d["n_samples"], dtype=np.int64),
        )


def grow_tree(X: np.ndarray, y: np.ndarray, min_leaf: int = 2,
              criterion: str = "gain_ratio", max_features: Optional[int] = None,
              rng: Optional[np.random.Generator] = None) -> Tree:
    """Grow an unpruned tree.

    ``criterion="gain_ratio"`` is the C4.5 selection; ``"gain"`` with
    ``max_features`` picks the best information gain among a random feature
    subset per node (random-forest style, needs ``rng``).
    """
    if min_leaf < 1:
        raise ValueError("min_leaf must be >= 1")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if criterion not in ("gain_ratio", "gain"):
        raise ValueError(f"unknown criterion {criterion!r}")
    if max_features is not None and rng is None:
        raise ValueError("max_features needs an rng")

    feature, threshold, left, right, value, n_samples = [], [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()) if len(idx) else 0.0)
        n_samples.append(len(idx))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)))]
    while stack:
        node, idx = stack.pop()
        yi = y[idx]
        pos = yi.sum()
        if pos == 0 or pos == len(idx) or len(idx) < 2 * min_leaf:
            continue
        Xi = X[idx]
        gain, split_info, thr = _split_scores(Xi, yi, min_leaf)
        if max_features is not None:
            f = _choose_random_subset(gain, rng, max_features)
        elif criterion == "gain":
            f = int(np.argmax(gain)) if gain.max() > GAIN_EPS else None
        else:
            f = _choose_gain_ratio(gain, split_info)
        if f is None:
            continue
        mask = Xi[:, f] <= thr[f]
        li, ri = idx[mask], idx[~mask]
        feature[node] = f
        threshold[node] = float(thr[f])
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # right pushed first so the left subtree is expanded first
        stack.append((right[node], ri))
        stack.append((left[node], li))

    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=float),
        n_samples=np.asarray(n_samples, dtype=np.int64),
    )
