"""The eight classifier families behind one fit/predict_proba surface."""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from typing import TextIO, Union

import numpy as np

from ..datasets import LabeledDataset
from ..errors import ArityMismatch, EmptyTrainingSet, InvalidConfig
from ..features import FEATURE_NAMES, FeatureVector
from .ensembles import AdaBoostM1, Bagging, RandomForest, RotationForest
from .simple import ConstantEstimator, DecisionTree, KNearest, NaiveBayes, OneR

FORMAT_VERSION = 1


class Family(str, enum.Enum):
    ONE_R = "one-r"
    DECISION_TREE = "decision-tree"
    K_NEAREST = "k-nearest"
    NAIVE_BAYES = "naive-bayes"
    BAGGING = "bagging"
    ADABOOST_M1 = "adaboost-m1"
    ROTATION_FOREST = "rotation-forest"
    RANDOM_FOREST = "random-forest"


@dataclass(frozen=True)
class ClassifierSpec:
    family: Family
    min_leaf: int = 6
    k: int = 10
    iterations: int = 100
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        for name in ("min_leaf", "k", "iterations"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be >= 1")

    def build(self):
        f = self.family
        if f is Family.ONE_R:
            return OneR()
        if f is Family.DECISION_TREE:
            return DecisionTree(self.min_leaf)
        if f is Family.K_NEAREST:
            return KNearest(self.k)
        if f is Family.NAIVE_BAYES:
            return NaiveBayes()
        if f is Family.BAGGING:
            return Bagging(self.iterations, self.min_leaf)
        if f is Family.ADABOOST_M1:
            return AdaBoostM1(self.iterations, self.min_leaf)
        if f is Family.ROTATION_FOREST:
            return RotationForest(self.iterations, self.min_leaf)
        return RandomForest(self.iterations)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        return d


_ESTIMATORS = {
    "constant": ConstantEstimator,
    Family.ONE_R.value: OneR,
    Family.DECISION_TREE.value: DecisionTree,
    Family.K_NEAREST.value: KNearest,
    Family.NAIVE_BAYES.value: NaiveBayes,
    Family.BAGGING.value: Bagging,
    Family.ADABOOST_M1.value: AdaBoostM1,
    Family.ROTATION_FOREST.value: RotationForest,
    Family.RANDOM_FOREST.value: RandomForest,
}


@dataclass
class ClassifierModel:
    spec: ClassifierSpec
    estimator: object
    imputation_means: np.ndarray
    feature_ranges: np.ndarray  # shape (2, n_features): min row, max row
    constant: bool = field(default=False)

    @property
    def family(self) -> Family:
        return self.spec.family

    @property
    def n_features(self) -> int:
        return len(self.imputation_means)

    def prepare(self, X: np.ndarray) -> np.ndarray:
        X = np.array(X, dtype=float, ndmin=2)
        if X.shape[1] != self.n_features:
            raise ArityMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        missing = np.isnan(X)
        if missing.any():
            X = np.where(missing, self.imputation_means, X)
        if getattr(self.estimator, "normalize", False):
            lo, hi = self.feature_ranges
            span = np.where(hi > lo, hi - lo, 1.0)
            X = (X - lo) / span
        return X

    def predict_proba(self, X) -> np.ndarray:
        p = self.estimator.predict_proba(self.prepare(X))
        return np.clip(p, 0.0, 1.0)

    def to_dict(self) -> dict:
        return {
            "format": "linktrust-model",
            "version": FORMAT_VERSION,
            "family": self.spec.family.value,
            "hyperparameters": self.spec.to_dict(),
            "feature_names": list(FEATURE_NAMES[:self.n_features]),
            "imputation_means": self.imputation_means.tolist(),
            "feature_ranges": self.feature_ranges.tolist(),
            "estimator": "constant" if self.constant else self.spec.family.value,
            "fitted": self.estimator.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierModel":
        if d.get("format") != "linktrust-model":
            raise InvalidConfig("not a linktrust model document")
        spec = ClassifierSpec(**d["hyperparameters"])
        est = _ESTIMATORS[d["estimator"]].from_dict(d["fitted"], spec)
        return cls(spec, est, np.asarray(d["imputation_means"], dtype=float),
                   np.asarray(d["feature_ranges"], dtype=float),
                   constant=d["estimator"] == "constant")


def fit(spec: ClassifierSpec, train: LabeledDataset, workers: int = 1) -> ClassifierModel:
    """Train ``spec`` on ``train``; the result depends only on (spec, train)."""
    if len(train) == 0:
        raise EmptyTrainingSet("training set is empty")
    X = np.array(train.X, dtype=float)
    y = np.asarray(train.y, dtype=np.int64)
    means = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        col = X[:, j]
        observed = col[~np.isnan(col)]
        means[j] = observed.mean() if observed.size else 0.0
    X = np.where(np.isnan(X), means, X)
    ranges = np.vstack([X.min(axis=0), X.max(axis=0)])

    constant = len(np.unique(y)) < 2
    estimator = ConstantEstimator() if constant else spec.build()
    model = ClassifierModel(spec, estimator, means, ranges, constant=constant)
    estimator.fit(model.prepare(X), y, spec.seed, workers=workers)
    return model


def predict_proba(model: ClassifierModel, v: Union[FeatureVector, np.ndarray]):
    """Restriction probability for one vector (float) or a matrix (array)."""
    if isinstance(v, FeatureVector):
        return float(model.predict_proba(v.values())[0])
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 1:
        return float(model.predict_proba(arr)[0])
    return model.predict_proba(arr)


def dump_model(model: ClassifierModel, sink: TextIO) -> None:
    json.dump(model.to_dict(), sink, indent=None, separators=(",", ":"))
    sink.write("\n")


def dumps_model(model: ClassifierModel) -> str:
    return json.dumps(model.to_dict(), separators=(",", ":"))


def load_model(source: TextIO) -> ClassifierModel:
    return ClassifierModel.from_dict(json.load(source))


__all__ = [
    "ClassifierModel", "ClassifierSpec", "Family", "fit", "predict_proba",
    "dump_model", "dumps_model", "load_model",
]
