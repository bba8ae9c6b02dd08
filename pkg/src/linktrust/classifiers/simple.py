"""Single-model families: OneR, k-nearest neighbours, naive Bayes, C4.5 tree."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .tree import Tree, grow_tree


class ConstantEstimator:
    """Used whenever the training set holds a single class."""

    name = "constant"

    def __init__(self, p: float = 0.0):
        self.p = float(p)

    def fit(self, X, y, seed, workers=1):
        self.p = float(np.mean(y)) if len(y) else 0.0
        return self

    def predict_proba(self, X):
        return np.full(len(X), self.p)

    def to_dict(self):
        return {"p": self.p}

    @classmethod
    def from_dict(cls, d, spec):
        return cls(d["p"])


class DecisionTree:
    def __init__(self, min_leaf: int = 2):
        self.min_leaf = min_leaf
        self.tree: Tree | None = None

    def fit(self, X, y, seed, workers=1):
        self.tree = grow_tree(X, y, min_leaf=self.min_leaf)
        return self

    def predict_proba(self, X):
        return self.tree.predict_proba(X)

    def to_dict(self):
        return {"tree": self.tree.to_dict()}

    @classmethod
    def from_dict(cls, d, spec):
        est = cls(spec.min_leaf)
        est.tree = Tree.from_dict(d["tree"])
        return est


def _value_groups(xs: np.ndarray):
    """Start/end offsets of runs of equal values in a sorted array."""
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], len(xs)]
    return starts, ends


def one_r_buckets(x: np.ndarray, y: np.ndarray, min_bucket: int):
    """Holte's adaptive bucketing of one numeric attribute.

    A bucket closes once its majority class has ``min_bucket`` members and the
    next run of equal values is not entirely of that class; equal values never
    straddle a boundary. Adjacent buckets with the same majority are merged.
    Returns ``(boundaries, pos_counts, totals)``.
    """
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    starts, ends = _value_groups(xs)
    cum = np.r_[0, np.cumsum(ys)]
    group_pos = cum[ends] - cum[starts]
    group_n = ends - starts

    buckets = []  # [last_group_index, pos, n]
    g, n_groups = 0, len(starts)
    while g < n_groups:
        pos = n = 0
        while g < n_groups and max(pos, n - pos) < min_bucket:
            pos += group_pos[g]
            n += group_n[g]
            g += 1
        majority = 1 if pos > n - pos else 0
        while g < n_groups and group_pos[g] == (group_n[g] if majority else 0):
            pos += group_pos[g]
            n += group_n[g]
            g += 1
        buckets.append([g - 1, int(pos), int(n)])

    merged = [buckets[0]]
    for b in buckets[1:]:
        prev = merged[-1]
        if (prev[1] > prev[2] - prev[1]) == (b[1] > b[2] - b[1]):
            prev[0], prev[1], prev[2] = b[0], prev[1] + b[1], prev[2] + b[2]
        else:
            merged.append(b)

    boundaries = [(xs[ends[b[0]] - 1] + xs[starts[b[0] + 1]]) / 2.0 for b in merged[:-1]]
    pos = np.array([b[1] for b in merged], dtype=float)
    tot = np.array([b[2] for b in merged], dtype=float)
    return np.asarray(boundaries, dtype=float), pos, tot


class OneR:
    def __init__(self, min_bucket: int = 6):
        self.min_bucket = min_bucket
        self.feature = 0
        self.boundaries = np.empty(0)
        self.probs = np.array([0.0])

    def fit(self, X, y, seed, workers=1):
        best_err = None
        for f in range(X.shape[1]):
            boundaries, pos, tot = one_r_buckets(X[:, f], y, self.min_bucket)
            err = float(np.sum(np.minimum(pos, tot - pos)))
            if best_err is None or err < best_err:
                best_err = err
                self.feature = f
                self.boundaries = boundaries
                self.probs = pos / tot
        return self

    def predict_proba(self, X):
        bucket = np.searchsorted(self.boundaries, X[:, self.feature], side="left")
        return self.probs[bucket]

    def to_dict(self):
        return {"feature": self.feature, "boundaries": self.boundaries.tolist(),
                "probs": self.probs.tolist()}

    @classmethod
    def from_dict(cls, d, spec):
        est = cls()
        est.feature = d["feature"]
        est.boundaries = np.asarray(d["boundaries"], dtype=float)
        est.probs = np.asarray(d["probs"], dtype=float)
        return est


class KNearest:
    """Vote fraction among the k nearest (Euclidean) training rows.

    Expects min-max normalised input. Distance ties go to the lower row index.
    """

    normalize = True

    def __init__(self, k: int = 10, chunk: int = 512):
        self.k = k
        self.chunk = chunk
        self.X = np.empty((0, 0))
        self.y = np.empty(0)

    def fit(self, X, y, seed, workers=1):
        self.X = np.asarray(X, dtype=float).copy()
        self.y = np.asarray(y, dtype=float).copy()
        return self

    def neighbours(self, X):
        k = min(self.k, len(self.y))
        out = np.empty((len(X), k), dtype=np.int64)
        for s in range(0, len(X), self.chunk):
            block = X[s:s + self.chunk]
            d2 = np.zeros((len(block), len(self.X)))
            for f in range(self.X.shape[1]):
                d2 += (block[:, f, None] - self.X[None, :, f]) ** 2
            out[s:s + self.chunk] = np.argsort(d2, axis=1, kind="stable")[:, :k]
        return out

    def predict_proba(self, X):
        return self.y[self.neighbours(np.asarray(X, dtype=float))].mean(axis=1)

    def to_dict(self):
        return {"k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, d, spec):
        est = cls(d["k"])
        est.X = np.asarray(d["X"], dtype=float).reshape(len(d["y"]), -1)
        est.y = np.asarray(d["y"], dtype=float)
        return est


VAR_FLOOR = 1e-9


class NaiveBayes:
    """Gaussian likelihoods, Bernoulli (Laplace-smoothed) for 0/1 columns."""

    def __init__(self):
        self.log_prior = np.zeros(2)
        self.binary = np.zeros(0, dtype=bool)
        self.mean = np.zeros((2, 0))
        self.var = np.ones((2, 0))
        self.p_one = np.full((2, 0), 0.5)

    def fit(self, X, y, seed, workers=1):
        X = np.asarray(X, dtype=float)
        d = X.shape[1]
        self.binary = np.all((X == 0) | (X == 1), axis=0)
        counts = np.array([np.sum(y == 0), np.sum(y == 1)], dtype=float)
        self.log_prior = np.log(counts / counts.sum())
        self.mean = np.zeros((2, d))
        self.var = np.ones((2, d))
        self.p_one = np.full((2, d), 0.5)
        for c in (0, 1):
            Xc = X[y == c]
            self.mean[c] = Xc.mean(axis=0)
            self.var[c] = np.maximum(Xc.var(axis=0), VAR_FLOOR)
            self.p_one[c] = ((Xc == 1).sum(axis=0) + 1.0) / (len(Xc) + 2.0)
        return self

    def _log_likelihood(self, X, c):
        gauss = -0.5 * (np.log(2 * np.pi * self.var[c]) + (X - self.mean[c]) ** 2 / self.var[c])
        ones = X > 0.5
        bern = np.where(ones, np.log(self.p_one[c]), np.log1p(-self.p_one[c]))
        return np.where(self.binary, bern, gauss).sum(axis=1)

    def predict_proba(self, X):
        X = np.asarray(X, dtype=float)
        log_odds = (self.log_prior[1] + self._log_likelihood(X, 1)
                    - self.log_prior[0] - self._log_likelihood(X, 0))
        return expit(log_odds)

    def to_dict(self):
        return {"log_prior": self.log_prior.tolist(), "binary": self.binary.tolist(),
                "mean": self.mean.tolist(), "var": self.var.tolist(),
                "p_one": self.p_one.tolist()}

    @classmethod
    def from_dict(cls, d, spec):
        est = cls()
        est.log_prior = np.asarray(d["log_prior"], dtype=float)
        est.binary = np.asarray(d["binary"], dtype=bool)
        est.mean = np.asarray(d["mean"], dtype=float)
        est.var = np.asarray(d["var"], dtype=float)
        est.p_one = np.asarray(d["p_one"], dtype=float)
        return est
