"""Link-set partitioning, the three labeled datasets, and undersampling."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .errors import MalformedRow, NoPositives
from .features import (FEATURE_NAMES, RESTRICTED, UNRESTRICTED, FeatureVector,
                       extract_corpus, feature_matrix)
from .model import LinkDisposition, LinkRecord

D = LinkDisposition


class DatasetKind(str, enum.Enum):
    FAKE_PROFILES = "fake_profiles"
    FRIENDS_RESTRICTION = "friends_restriction"
    ALL_LINKS = "all_links"


# (positive link sets, negative link sets) per dataset.
DATASET_MEMBERSHIP = {
    DatasetKind.FAKE_PROFILES: (
        (D.RECOMMENDED_RESTRICTED,),
        (D.ALL_UNRESTRICTED, D.RECOMMENDED_UNRESTRICTED)),
    DatasetKind.FRIENDS_RESTRICTION: (
        (D.ALPHABETICALLY_RESTRICTED,),
        (D.ALL_UNRESTRICTED,)),
    DatasetKind.ALL_LINKS: (
        (D.RECOMMENDED_RESTRICTED, D.ALPHABETICALLY_RESTRICTED),
        (D.ALL_UNRESTRICTED, D.RECOMMENDED_UNRESTRICTED)),
}


@dataclass
class LabeledDataset:
    """Feature matrix (NaN marks an absent friend degree), 0/1 labels, owners."""

    kind: Optional[DatasetKind]
    X: np.ndarray
    y: np.ndarray
    owners: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float).reshape(-1, len(FEATURE_NAMES))
        self.y = np.asarray(self.y, dtype=np.int64)
        self.owners = np.asarray(self.owners, dtype=object)
        if not (len(self.X) == len(self.y) == len(self.owners)):
            raise ValueError("X, y and owners must have equal length")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def positives(self) -> int:
        return int(self.y.sum())

    @property
    def negatives(self) -> int:
        return len(self.y) - self.positives

    @property
    def imbalance_rate(self) -> float:
        return self.positives / len(self) if len(self) else 0.0

    @property
    def usable(self) -> bool:
        return self.positives > 0 and self.negatives > 0

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx)
        return LabeledDataset(self.kind, self.X[idx], self.y[idx], self.owners[idx])

    @property
    def vectors(self) -> list[FeatureVector]:
        out = []
        for row, label, owner in zip(self.X, self.y, self.owners):
            values = {}
            for name, v in zip(FEATURE_NAMES, row):
                if np.isnan(v):
                    values[name] = None
                elif name in _INTEGER_FEATURES:
                    values[name] = int(v)
                else:
                    values[name] = float(v)
            out.append(FeatureVector(**values, label=RESTRICTED if label else UNRESTRICTED,
                                     owner=owner))
        return out

    @classmethod
    def from_vectors(cls, kind, vectors: Sequence[FeatureVector]) -> "LabeledDataset":
        return cls(kind, feature_matrix(vectors),
                   [int(v.restricted) for v in vectors], [v.owner for v in vectors])


_INTEGER_FEATURES = frozenset(FEATURE_NAMES[:8]) | {"is_friend_profile_private"}


def partition_links(corpus: Iterable[LinkRecord]) -> dict[LinkDisposition, list[LinkRecord]]:
    parts: dict[LinkDisposition, list[LinkRecord]] = {d: [] for d in LinkDisposition}
    for link in corpus:
        parts[link.disposition].append(link)
    return parts


def build_dataset(kind: DatasetKind, partition: dict[LinkDisposition, Sequence],
                  ) -> LabeledDataset:
    """Assemble a dataset from a partition.

    The partition may hold ``LinkRecord`` lists (features are extracted against
    the full corpus) or already-extracted ``FeatureVector`` lists.
    """
    kind = DatasetKind(kind)
    positives, negatives = DATASET_MEMBERSHIP[kind]
    vectors = _vectors_by_disposition(partition)
    chosen = [v for d in positives for v in vectors[d]] + [v for d in negatives for v in vectors[d]]
    return LabeledDataset.from_vectors(kind, chosen)


def _vectors_by_disposition(partition) -> dict[LinkDisposition, list[FeatureVector]]:
    items = [x for d in LinkDisposition for x in partition.get(d, ())]
    if not items or isinstance(items[0], FeatureVector):
        return {d: list(partition.get(d, ())) for d in LinkDisposition}
    # Ratio denominators need every link of an owner, so extract on the whole corpus.
    extracted = extract_corpus(items)
    out, i = {}, 0
    for d in LinkDisposition:
        n = len(partition.get(d, ()))
        out[d] = extracted[i:i + n]
        i += n
    return out


def build_all_datasets(corpus: Sequence[LinkRecord]) -> dict[DatasetKind, LabeledDataset]:
    partition = partition_links(corpus)
    vectors = _vectors_by_disposition(partition)
    return {kind: build_dataset(kind, vectors) for kind in DatasetKind}


def balance_undersample(dataset: LabeledDataset, seed: int) -> LabeledDataset:
    """Keep every positive plus an equal-size uniform sample of negatives."""
    pos = np.flatnonzero(dataset.y == 1)
    neg = np.flatnonzero(dataset.y == 0)
    if len(pos) == 0:
        raise NoPositives("dataset has no restricted links")
    if len(neg) < len(pos):
        raise NoPositives(f"only {len(neg)} negatives for {len(pos)} positives")
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.choice(neg, size=len(pos), replace=False))
    return dataset.subset(np.concatenate([pos, picked]))


# ---------------------------------------------------------------------------
# dataset CSV

DATASET_COLUMNS = FEATURE_NAMES + ("owner", "label")


def write_dataset(dataset: LabeledDataset, sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(DATASET_COLUMNS)
    for row, label, owner in zip(dataset.X, dataset.y, dataset.owners):
        cells = []
        for name, v in zip(FEATURE_NAMES, row):
            if np.isnan(v):
                cells.append("")
            elif name in _INTEGER_FEATURES:
                cells.append(str(int(v)))
            else:
                cells.append(repr(float(v)))
        writer.writerow(cells + [owner, RESTRICTED if label else UNRESTRICTED])


def read_dataset(source: TextIO, kind: Optional[DatasetKind] = None) -> LabeledDataset:
    reader = csv.DictReader(source)
    if reader.fieldnames is None or any(c not in reader.fieldnames for c in DATASET_COLUMNS):
        raise MalformedRow(1, f"dataset header must contain {list(DATASET_COLUMNS)}")
    X, y, owners = [], [], []
    for row in reader:
        line = reader.line_num
        try:
            X.append([float(row[n]) if row[n].strip() != "" else np.nan for n in FEATURE_NAMES])
        except ValueError as exc:
            raise MalformedRow(line, str(exc)) from None
        label = row["label"].strip()
        if label not in (RESTRICTED, UNRESTRICTED):
            raise MalformedRow(line, f"label must be restricted/unrestricted, got {label!r}")
        y.append(int(label == RESTRICTED))
        owners.append(row["owner"])
    return LabeledDataset(kind, np.array(X, dtype=float).reshape(-1, len(FEATURE_NAMES)), y, owners)
