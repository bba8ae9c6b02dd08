"""Connection-Strength scoring and the bottom-10% restriction recommendation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import MixedOwners
from .model import LinkRecord, UserId

FAMILY_WEIGHT = 1000
RECOMMEND_PERCENT = 10


@dataclass(frozen=True)
class ScoredFriend:
    friend: UserId
    score: int
    rank_position: int


def connection_strength(link: LinkRecord) -> int:
    return (link.common_friends
            + link.common_chat_messages
            + 2 * link.common_groups
            + 2 * link.common_posts
            + 2 * link.tagged_photos
            + 2 * link.tagged_videos
            + FAMILY_WEIGHT * int(link.are_family))


def _single_owner(links: Sequence[LinkRecord]) -> None:
    if not links:
        raise ValueError("need at least one link")
    owner = links[0].owner
    if any(l.owner != owner for l in links):
        raise MixedOwners(f"links span several owners, first is {owner!r}")


def rank_friends(links: Sequence[LinkRecord]) -> list[ScoredFriend]:
    """Ascending by score; equal scores ordered by friend id."""
    _single_owner(links)
    scored = sorted(((connection_strength(l), l.friend) for l in links))
    return [ScoredFriend(friend=f, score=s, rank_position=i + 1)
            for i, (s, f) in enumerate(scored)]


def recommendation_size(n: int) -> int:
    """ceil(n / 10), never below one; integer arithmetic avoids 0.1 * 30 > 3."""
    return max(1, (n * RECOMMEND_PERCENT + 99) // 100)


def recommend_restrictions(links: Sequence[LinkRecord]) -> list[ScoredFriend]:
    ranking = rank_friends(links)
    return ranking[:recommendation_size(len(ranking))]
