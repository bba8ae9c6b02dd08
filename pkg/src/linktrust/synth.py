"""Seeded synthetic link corpora calibrated to published per-class feature means.

Each link belongs to one hidden class: a genuine friend left unrestricted, a
fake profile, or a genuine friend the owner restricted by hand. Counters are
drawn per class; dispositions then follow from the owner's Connection-Strength
ranking, so the recommended-and-restricted set really is the bottom 10%.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidConfig
from .heuristic import FAMILY_WEIGHT, RECOMMEND_PERCENT
from .model import LinkDisposition, LinkRecord

GENUINE, FAKE, GENUINE_RESTRICTED = 0, 1, 2
CLASS_NAMES = ("genuine", "fake", "genuine_restricted")

COUNTERS = ("common_chat_messages", "common_friends", "common_groups", "common_posts",
            "tagged_photos", "tagged_videos")

# Per-class means: (genuine unrestricted, fake, genuine restricted).
DEFAULT_MEANS = {
    "common_chat_messages": (30.86, 0.02, 6.35),
    "common_friends": (36.78, 1.44, 19.8),
    "common_groups": (0.689, 0.028, 0.56),
    "common_posts": (0.147, 0.008, 0.069),
    "tagged_photos": (0.3, 0.004, 0.208),
    "tagged_videos": (0.017, 0.0, 0.007),
    "friend_friend_count": (703.31, 627.31, 819.57),
}
DEFAULT_PRIVATE = (0.0981, 0.0587, 0.1079)
DEFAULT_FAMILY = (9 / 138286, 0.0, 1 / 6145)
# Gamma-Poisson shape per feature; None keeps a plain Poisson draw.
DEFAULT_DISPERSION = {
    "common_chat_messages": 0.15,
    "common_friends": 2.0,
    "common_groups": None,
    "common_posts": None,
    "tagged_photos": None,
    "tagged_videos": None,
    "friend_friend_count": 1.5,
}

DISPOSITION_CODES = tuple(LinkDisposition)


@dataclass
class PopulationConfig:
    n_users: int = 300
    friends_per_user: float = 138.0
    fake_fraction: float = 0.087
    alpha_restrict_fraction: float = 0.0425
    recommended_unrestricted_prob: float = 0.5
    means: dict = field(default_factory=lambda: dict(DEFAULT_MEANS))
    private_profile_prob: tuple = DEFAULT_PRIVATE
    family_prob: tuple = DEFAULT_FAMILY
    dispersion: dict = field(default_factory=lambda: dict(DEFAULT_DISPERSION))
    seed: int = 0

    def validate(self) -> None:
        if self.n_users < 1:
            raise InvalidConfig("n_users must be >= 1")
        if self.friends_per_user <= 0:
            raise InvalidConfig("friends_per_user must be > 0")
        for name in ("fake_fraction", "alpha_restrict_fraction", "recommended_unrestricted_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must lie in [0, 1], got {v}")
        for name in ("private_profile_prob", "family_prob"):
            v = getattr(self, name)
            if len(v) != 3 or not all(0.0 <= p <= 1.0 for p in v):
                raise InvalidConfig(f"{name} needs three probabilities in [0, 1]")
        for name in COUNTERS + ("friend_friend_count",):
            if name not in self.means:
                raise InvalidConfig(f"missing means for {name}")
            if len(self.means[name]) != 3 or min(self.means[name]) < 0:
                raise InvalidConfig(f"means for {name} need three values >= 0")
        for name, shape in self.dispersion.items():
            if shape is not None and shape <= 0:
                raise InvalidConfig(f"dispersion for {name} must be > 0")


@dataclass
class Population:
    """Columnar corpus; ``friend_friend_count`` is -1 where unobservable."""

    owner: np.ndarray
    friend: np.ndarray           # index within the owner's list
    link_class: np.ndarray
    are_family: np.ndarray
    counters: dict
    owner_friend_count: np.ndarray
    friend_friend_count: np.ndarray
    disposition: np.ndarray      # index into DISPOSITION_CODES
    n_users: int

    def __len__(self) -> int:
        return len(self.owner)

    def connection_strength(self) -> np.ndarray:
        c = self.counters
        return (c["common_friends"] + c["common_chat_messages"]
                + 2 * (c["common_groups"] + c["common_posts"]
                       + c["tagged_photos"] + c["tagged_videos"])
                + FAMILY_WEIGHT * self.are_family)

    def user_ids(self):
        width = len(str(max(self.n_users - 1, 0)))
        fwidth = len(str(max(int(self.friend.max(initial=0)), 0)))
        owners = [f"u{o:0{width}d}" for o in range(self.n_users)]
        return owners, fwidth

    def to_records(self) -> list[LinkRecord]:
        owners, fwidth = self.user_ids()
        c = {k: v.tolist() for k, v in self.counters.items()}
        fam = self.are_family.tolist()
        ofc = self.owner_friend_count.tolist()
        ffc = self.friend_friend_count.tolist()
        disp = self.disposition.tolist()
        records = []
        for i, (o, f) in enumerate(zip(self.owner.tolist(), self.friend.tolist())):
            records.append(LinkRecord(
                owner=owners[o],
                friend=f"{owners[o]}-f{f:0{fwidth}d}",
                are_family=bool(fam[i]),
                common_chat_messages=c["common_chat_messages"][i],
                common_friends=c["common_friends"][i],
                common_groups=c["common_groups"][i],
                common_posts=c["common_posts"][i],
                tagged_photos=c["tagged_photos"][i],
                tagged_videos=c["tagged_videos"][i],
                owner_friend_count=ofc[i],
                friend_friend_count=None if ffc[i] < 0 else ffc[i],
                disposition=DISPOSITION_CODES[disp[i]],
            ))
        return records


def _draw_counts(rng, means: np.ndarray, shape: Optional[float]) -> np.ndarray:
    if shape is None:
        return rng.poisson(means)
    lam = rng.gamma(shape, 1.0, size=means.shape) * (means / shape)
    return rng.poisson(lam)


def _p_positive(mean: float, shape: Optional[float]) -> float:
    """P(count > 0) under the configured count distribution."""
    if mean <= 0:
        return 0.0
    if shape is None:
        return 1.0 - np.exp(-mean)
    return 1.0 - (shape / (shape + mean)) ** shape


def simulate(config: PopulationConfig) -> Population:
    config.validate()
    rng = np.random.default_rng(config.seed)
    n_friends = np.maximum(1, rng.poisson(config.friends_per_user, size=config.n_users))
    total = int(n_friends.sum())
    owner = np.repeat(np.arange(config.n_users), n_friends)
    starts = np.r_[0, np.cumsum(n_friends)[:-1]]
    friend = np.arange(total) - starts[owner]

    fake = rng.random(total) < config.fake_fraction
    hand_restricted = rng.random(total) < config.alpha_restrict_fraction
    cls = np.where(fake, FAKE, np.where(hand_restricted, GENUINE_RESTRICTED, GENUINE))

    counters = {}
    for name in COUNTERS:
        means = np.asarray(config.means[name], dtype=float)[cls]
        counters[name] = _draw_counts(rng, means, config.dispersion.get(name))
    ofc = n_friends[owner]
    counters["common_friends"] = np.minimum(counters["common_friends"], ofc - 1).clip(0)
    are_family = (rng.random(total) < np.asarray(config.family_prob)[cls]).astype(np.int64)

    ffc = _draw_counts(rng, np.asarray(config.means["friend_friend_count"], dtype=float)[cls],
                       config.dispersion.get("friend_friend_count"))
    ffc = np.maximum(ffc, counters["common_friends"])
    # Hide the degree often enough that "hidden degree and some common friends"
    # occurs at the configured private-profile rate.
    cf_shape = config.dispersion.get("common_friends")
    hide_prob = np.array([
        min(1.0, p / q) if q > 0 else 0.0
        for p, q in zip(config.private_profile_prob,
                        (_p_positive(m, cf_shape) for m in config.means["common_friends"]))])
    hidden = rng.random(total) < hide_prob[cls]
    ffc = np.where(hidden, -1, ffc)

    pop = Population(owner=owner, friend=friend, link_class=cls, are_family=are_family,
                     counters=counters, owner_friend_count=ofc, friend_friend_count=ffc,
                     disposition=np.zeros(total, dtype=np.int64), n_users=config.n_users)
    pop.disposition = _assign_dispositions(pop, rng, config)
    return pop


def _assign_dispositions(pop: Population, rng, config: PopulationConfig) -> np.ndarray:
    cs = pop.connection_strength()
    order = np.lexsort((pop.friend, cs, pop.owner))
    n_friends = np.bincount(pop.owner, minlength=pop.n_users)
    starts = np.r_[0, np.cumsum(n_friends)[:-1]]
    position = np.empty(len(pop), dtype=np.int64)
    position[order] = np.arange(len(pop)) - starts[pop.owner[order]]
    shown = np.maximum(1, (n_friends * RECOMMEND_PERCENT + 99) // 100)
    recommended = position < shown[pop.owner]

    coin = rng.random(len(pop)) < config.recommended_unrestricted_prob
    code = {d: i for i, d in enumerate(DISPOSITION_CODES)}
    disp = np.full(len(pop), code[LinkDisposition.ALL_UNRESTRICTED])
    fake = pop.link_class == FAKE
    by_hand = pop.link_class == GENUINE_RESTRICTED
    disp[fake & ~recommended & coin] = code[LinkDisposition.RECOMMENDED_UNRESTRICTED]
    disp[by_hand] = code[LinkDisposition.ALPHABETICALLY_RESTRICTED]
    # a restricted friend who was also on the recommendation list counts as recommended
    disp[(fake | by_hand) & recommended] = code[LinkDisposition.RECOMMENDED_RESTRICTED]
    return disp


def generate_population(config: PopulationConfig) -> list[LinkRecord]:
    return simulate(config).to_records()
