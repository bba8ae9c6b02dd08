"""Tree ensembles: bagging, AdaBoost.M1, rotation forest, random forest.

Every iteration draws from its own generator seeded by ``(seed, iteration)``,
so results do not depend on how many worker threads build the members.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .tree import Tree, grow_tree


def iteration_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, i])


def _map(fn, n, workers):
    if workers <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


def _bootstrap(rng, n):
    return rng.integers(0, n, size=n)


class Bagging:
    def __init__(self, iterations: int = 100, min_leaf: int = 6):
        self.iterations = iterations
        self.min_leaf = min_leaf
        self.trees: list[Tree] = []

    def fit(self, X, y, seed, workers=1):
        def member(i):
            idx = _bootstrap(iteration_rng(seed, i), len(y))
            return grow_tree(X[idx], y[idx], min_leaf=self.min_leaf)
        self.trees = _map(member, self.iterations, workers)
        return self

    def predict_proba(self, X):
        return np.mean([t.predict_proba(X) for t in self.trees], axis=0)

    def to_dict(self):
        return {"trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d, spec):
        est = cls(spec.iterations, spec.min_leaf)
        est.trees = [Tree.from_dict(t) for t in d["trees"]]
        return est


class RandomForest(Bagging):
    """Bootstrap trees with floor(sqrt(d)) candidate features per split, leaf size 1."""

    def __init__(self, iterations: int = 100, min_leaf: int = 1):
        super().__init__(iterations, min_leaf)

    def fit(self, X, y, seed, workers=1):
        m = max(1, int(math.sqrt(X.shape[1])))

        def member(i):
            rng = iteration_rng(seed, i)
            idx = _bootstrap(rng, len(y))
            return grow_tree(X[idx], y[idx], min_leaf=self.min_leaf,
                             criterion="gain", max_features=m, rng=rng)
        self.trees = _map(member, self.iterations, workers)
        return self

    @classmethod
    def from_dict(cls, d, spec):
        est = cls(spec.iterations)
        est.trees = [Tree.from_dict(t) for t in d["trees"]]
        return est


class AdaBoostM1:
    """Boosting by weighted resampling.

    Stops early when a member's weighted error is 0 or at least 0.5; such a
    member is kept only if it is the first. The score is the vote-weighted
    mean of member leaf frequencies.
    """

    def __init__(self, iterations: int = 100, min_leaf: int = 6):
        self.iterations = iterations
        self.min_leaf = min_leaf
        self.trees: list[Tree] = []
        self.alphas: list[float] = []
        self.weight_sums: list[float] = []

    def fit(self, X, y, seed, workers=1):
        n = len(y)
        w = np.full(n, 1.0 / n)
        self.trees, self.alphas, self.weight_sums = [], [], []
        for i in range(self.iterations):
            rng = iteration_rng(seed, i)
            idx = rng.choice(n, size=n, replace=True, p=w)
            tree = grow_tree(X[idx], y[idx], min_leaf=self.min_leaf)
            wrong = (tree.predict_proba(X) >= 0.5).astype(np.int64) != y
            err = float(w[wrong].sum())
            if err >= 0.5 or err == 0.0:
                if not self.trees:
                    self.trees.append(tree)
                    self.alphas.append(1.0)
                break
            beta = err / (1.0 - err)
            self.trees.append(tree)
            self.alphas.append(math.log(1.0 / beta))
            w = np.where(wrong, w, w * beta)
            w = w / w.sum()
            self.weight_sums.append(float(w.sum()))
        return self

    def predict_proba(self, X):
        alphas = np.asarray(self.alphas)
        probs = np.array([t.predict_proba(X) for t in self.trees])
        return alphas @ probs / alphas.sum()

    def to_dict(self):
        return {"trees": [t.to_dict() for t in self.trees], "alphas": list(self.alphas)}

    @classmethod
    def from_dict(cls, d, spec):
        est = cls(spec.iterations, spec.min_leaf)
        est.trees = [Tree.from_dict(t) for t in d["trees"]]
        est.alphas = [float(a) for a in d["alphas"]]
        return est


def rotation_matrix(X, y, rng, subset_size=3, sample_fraction=0.75):
    """Block rotation from principal axes of random feature subsets.

    Features are split into random groups of ``subset_size``; each group's
    principal axes come from a class-stratified bootstrap holding
    ``sample_fraction`` of every class. Returns ``(R, groups)`` where the
    columns of R belonging to group g are nonzero only on the rows in g.
    """
    n, d = X.shape
    perm = rng.permutation(d)
    groups = [perm[s:s + subset_size] for s in range(0, d, subset_size)]
    classes = [np.flatnonzero(y == c) for c in np.unique(y)]
    R = np.zeros((d, d))
    col = 0
    for g in groups:
        sample = np.concatenate([
            rng.choice(idx, size=max(1, int(round(sample_fraction * len(idx)))), replace=True)
            for idx in classes])
        block = X[np.ix_(sample, g)]
        centred = block - block.mean(axis=0)
        cov = centred.T @ centred / max(1, len(sample) - 1)
        eigval, eigvec = np.linalg.eigh(cov)
        eigvec = eigvec[:, np.argsort(-eigval, kind="stable")]
        R[np.ix_(g, np.arange(col, col + len(g)))] = eigvec
        col += len(g)
    return R, groups


class RotationForest:
    """Trees grown on the full training set after a per-member block rotation.

    Expects min-max normalised input so that no single large-valued feature
    dominates its group's principal axes.
    """

    normalize = True

    def __init__(self, iterations: int = 100, min_leaf: int = 6, subset_size: int = 3,
                 sample_fraction: float = 0.75):
        self.iterations = iterations
        self.min_leaf = min_leaf
        self.subset_size = subset_size
        self.sample_fraction = sample_fraction
        self.rotations: list[np.ndarray] = []
        self.groups: list[list[np.ndarray]] = []
        self.trees: list[Tree] = []

    def fit(self, X, y, seed, workers=1):
        def member(i):
            rng = iteration_rng(seed, i)
            R, groups = rotation_matrix(X, y, rng, self.subset_size, self.sample_fraction)
            return R, groups, grow_tree(X @ R, y, min_leaf=self.min_leaf)
        fitted = _map(member, self.iterations, workers)
        self.rotations = [f[0] for f in fitted]
        self.groups = [f[1] for f in fitted]
        self.trees = [f[2] for f in fitted]
        return self

    def predict_proba(self, X):
        return np.mean([t.predict_proba(X @ R) for R, t in zip(self.rotations, self.trees)],
                       axis=0)

    def to_dict(self):
        return {"rotations": [R.tolist() for R in self.rotations],
                "groups": [[g.tolist() for g in gs] for gs in self.groups],
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d, spec):
        est = cls(spec.iterations, spec.min_leaf)
        est.rotations = [np.asarray(R, dtype=float) for R in d["rotations"]]
        est.groups = [[np.asarray(g, dtype=np.int64) for g in gs] for gs in d["groups"]]
        est.trees = [Tree.from_dict(t) for t in d["trees"]]
        return est
