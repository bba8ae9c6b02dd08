"""Per-link feature vectors, including the owner-level ratio denominators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import AggregateMismatch, MixedOwners
from .model import LinkRecord, UserId, group_by_owner

FEATURE_NAMES = (
    "are_family",
    "common_chat_messages",
    "common_friends",
    "common_groups",
    "common_posts",
    "tagged_photos",
    "tagged_videos",
    "friend_friend_count",
    "chat_messages_ratio",
    "common_groups_ratio",
    "common_posts_ratio",
    "common_photos_ratio",
    "common_video_ratio",
    "is_friend_profile_private",
    "jaccard_coefficient",
)
FRIEND_FRIEND_COUNT = FEATURE_NAMES.index("friend_friend_count")

RESTRICTED = "restricted"
UNRESTRICTED = "unrestricted"


@dataclass(frozen=True)
class UserAggregates:
    owner: UserId
    total_chat_messages: int
    max_common_groups: int
    total_posts: int
    total_tagged_photos: int
    total_tagged_videos: int


@dataclass(frozen=True)
class FeatureVector:
    are_family: int
    common_chat_messages: int
    common_friends: int
    common_groups: int
    common_posts: int
    tagged_photos: int
    tagged_videos: int
    friend_friend_count: Optional[int]
    chat_messages_ratio: float
    common_groups_ratio: float
    common_posts_ratio: float
    common_photos_ratio: float
    common_video_ratio: float
    is_friend_profile_private: int
    jaccard_coefficient: float
    label: str
    owner: UserId

    def values(self) -> np.ndarray:
        """The 15 features as floats; an absent friend degree becomes NaN."""
        return np.array(self.row(), dtype=float)

    def row(self) -> list:
        return [np.nan if v is None else v for v in (getattr(self, n) for n in FEATURE_NAMES)]

    @property
    def restricted(self) -> bool:
        return self.label == RESTRICTED


def compute_user_aggregates(links: Sequence[LinkRecord]) -> UserAggregates:
    if not links:
        raise ValueError("need at least one link")
    owner = links[0].owner
    if any(l.owner != owner for l in links):
        raise MixedOwners(f"links span several owners, first is {owner!r}")
    return UserAggregates(
        owner=owner,
        total_chat_messages=sum(l.common_chat_messages for l in links),
        max_common_groups=max(l.common_groups for l in links),
        total_posts=sum(l.common_posts for l in links),
        total_tagged_photos=sum(l.tagged_photos for l in links),
        total_tagged_videos=sum(l.tagged_videos for l in links),
    )


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def jaccard(common: int, deg_u: int, deg_v: Optional[int]) -> float:
    if deg_v is None:
        return 0.0
    union = deg_u + deg_v - common
    return common / union if union > 0 else 0.0


def extract_features(link: LinkRecord, agg: UserAggregates) -> FeatureVector:
    if agg.owner != link.owner:
        raise AggregateMismatch(f"aggregates for {agg.owner!r} used on a link of {link.owner!r}")
    if (link.common_chat_messages > agg.total_chat_messages
            or link.common_groups > agg.max_common_groups
            or link.common_posts > agg.total_posts
            or link.tagged_photos > agg.total_tagged_photos
            or link.tagged_videos > agg.total_tagged_videos):
        raise AggregateMismatch(f"link ({link.owner}, {link.friend}) exceeds its owner's totals")
    private = link.friend_friend_count is None and link.common_friends > 0
    return FeatureVector(
        are_family=int(link.are_family),
        common_chat_messages=link.common_chat_messages,
        common_friends=link.common_friends,
        common_groups=link.common_groups,
        common_posts=link.common_posts,
        tagged_photos=link.tagged_photos,
        tagged_videos=link.tagged_videos,
        friend_friend_count=link.friend_friend_count,
        chat_messages_ratio=_ratio(link.common_chat_messages, agg.total_chat_messages),
        common_groups_ratio=_ratio(link.common_groups, agg.max_common_groups),
        common_posts_ratio=_ratio(link.common_posts, agg.total_posts),
        common_photos_ratio=_ratio(link.tagged_photos, agg.total_tagged_photos),
        common_video_ratio=_ratio(link.tagged_videos, agg.total_tagged_videos),
        is_friend_profile_private=int(private),
        jaccard_coefficient=jaccard(link.common_friends, link.owner_friend_count,
                                    link.friend_friend_count),
        label=RESTRICTED if link.restricted else UNRESTRICTED,
        owner=link.owner,
    )


def extract_corpus(records: Sequence[LinkRecord]) -> list[FeatureVector]:
    """Feature vectors for every link, in input order."""
    aggs = {owner: compute_user_aggregates(links)
            for owner, links in group_by_owner(records).items()}
    return [extract_features(r, aggs[r.owner]) for r in records]


def feature_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    if not vectors:
        return np.empty((0, len(FEATURE_NAMES)))
    return np.array([v.row() for v in vectors], dtype=float)
