import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_link
from linktrust.datasets import (DatasetKind, LabeledDataset, balance_undersample,
                                build_all_datasets, build_dataset, partition_links, read_dataset,
                                write_dataset)
from linktrust.errors import MalformedRow, NoPositives
from linktrust.model import LinkDisposition as D


def corpus(counts):
    """Links for one owner per disposition block, counts keyed by disposition."""
    links = []
    for d, n in counts.items():
        for i in range(n):
            links.append(make_link(owner=f"o{i % 7}", friend=f"{d.value}-{i}", chat=i % 5,
                                   cf=i % 3, ofc=200, ffc=None if i % 4 == 0 else 40,
                                   disposition=d))
    return links


def test_membership_and_sizes():
    links = corpus({D.ALL_UNRESTRICTED: 40, D.RECOMMENDED_UNRESTRICTED: 5,
                    D.RECOMMENDED_RESTRICTED: 3, D.ALPHABETICALLY_RESTRICTED: 4})
    ds = build_all_datasets(links)
    fake, friends, both = (ds[k] for k in DatasetKind)
    assert (fake.positives, fake.negatives) == (3, 45)
    assert (friends.positives, friends.negatives) == (4, 40)
    assert (both.positives, both.negatives) == (7, 45)
    assert fake.imbalance_rate == 3 / 48


def test_features_use_whole_owner_corpus():
    # the ratio denominator includes links outside the dataset's sets
    links = [make_link("o", "a", chat=1, disposition=D.RECOMMENDED_RESTRICTED),
             make_link("o", "b", chat=3, disposition=D.RECOMMENDED_UNRESTRICTED)]
    ds = build_dataset(DatasetKind.FRIENDS_RESTRICTION, partition_links(links))
    assert len(ds) == 0
    fake = build_dataset(DatasetKind.FAKE_PROFILES, partition_links(links))
    assert fake.X[0, 8] == 0.25


@given(st.integers(1, 40), st.integers(0, 80), st.integers(0, 10_000))
def test_balance_is_one_to_one(pos, extra, seed):
    n = 2 * pos + extra
    y = np.r_[np.ones(pos), np.zeros(n - pos)].astype(int)
    ds = LabeledDataset(None, np.arange(n * 15, dtype=float).reshape(n, 15), y,
                        [f"o{i}" for i in range(n)])
    bal = balance_undersample(ds, seed)
    assert bal.positives == bal.negatives == pos
    # every positive row kept exactly once
    kept = set(bal.X[bal.y == 1, 0].tolist())
    assert kept == set(ds.X[ds.y == 1, 0].tolist())
    assert len(set(bal.X[:, 0].tolist())) == len(bal)
    assert np.array_equal(balance_undersample(ds, seed).X, bal.X)


def test_balance_errors():
    ds = LabeledDataset(None, np.zeros((3, 15)), [0, 0, 0], ["a"] * 3)
    with pytest.raises(NoPositives):
        balance_undersample(ds, 0)
    ds = LabeledDataset(None, np.zeros((3, 15)), [1, 1, 0], ["a"] * 3)
    with pytest.raises(NoPositives):
        balance_undersample(ds, 0)


def test_dataset_csv_roundtrip():
    links = corpus({D.ALL_UNRESTRICTED: 20, D.RECOMMENDED_RESTRICTED: 4})
    ds = build_all_datasets(links)[DatasetKind.FAKE_PROFILES]
    buf = io.StringIO()
    write_dataset(ds, buf)
    header = buf.getvalue().splitlines()[0].split(",")
    assert header[-2:] == ["owner", "label"] and len(header) == 17
    buf.seek(0)
    back = read_dataset(buf, DatasetKind.FAKE_PROFILES)
    assert np.array_equal(back.X, ds.X, equal_nan=True)
    assert np.array_equal(back.y, ds.y)
    assert list(back.owners) == list(ds.owners)
    assert back.vectors == ds.vectors


def test_dataset_csv_bad_label():
    links = corpus({D.ALL_UNRESTRICTED: 2, D.RECOMMENDED_RESTRICTED: 1})
    buf = io.StringIO()
    write_dataset(build_all_datasets(links)[DatasetKind.FAKE_PROFILES], buf)
    text = buf.getvalue().replace("unrestricted", "maybe")
    with pytest.raises(MalformedRow):
        read_dataset(io.StringIO(text))
