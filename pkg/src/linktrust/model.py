"""Domain records and their CSV interchange formats."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Optional, TextIO

from .errors import DuplicateLink, IllegalAudience, MalformedRow, SelfLink

UserId = str


class LinkDisposition(str, enum.Enum):
    ALL_UNRESTRICTED = "all_unrestricted"
    RECOMMENDED_UNRESTRICTED = "recommended_unrestricted"
    RECOMMENDED_RESTRICTED = "recommended_restricted"
    ALPHABETICALLY_RESTRICTED = "alphabetically_restricted"

    @property
    def restricted(self) -> bool:
        return self in (LinkDisposition.RECOMMENDED_RESTRICTED,
                        LinkDisposition.ALPHABETICALLY_RESTRICTED)


class AudienceLevel(str, enum.Enum):
    EVERYONE = "everyone"
    FRIENDS = "friends"
    FRIENDS_OF_FRIENDS = "friends_of_friends"
    NO_ONE = "no_one"
    CUSTOM = "custom"


LINK_COLUMNS = (
    "owner", "friend", "are_family", "common_chat_messages", "common_friends",
    "common_groups", "common_posts", "tagged_photos", "tagged_videos",
    "owner_friend_count", "friend_friend_count", "disposition",
)

COUNTER_FIELDS = (
    "common_chat_messages", "common_friends", "common_groups", "common_posts",
    "tagged_photos", "tagged_videos",
)


@dataclass(frozen=True)
class LinkRecord:
    owner: UserId
    friend: UserId
    are_family: bool
    common_chat_messages: int
    common_friends: int
    common_groups: int
    common_posts: int
    tagged_photos: int
    tagged_videos: int
    owner_friend_count: int
    friend_friend_count: Optional[int]
    disposition: LinkDisposition

    def __post_init__(self):
        validate_link(self)

    @property
    def restricted(self) -> bool:
        return self.disposition.restricted


def validate_link(link: LinkRecord) -> None:
    """Raise ``ValueError`` or ``SelfLink`` when a record breaks a type invariant."""
    if not link.owner or not link.friend:
        raise ValueError("user ids must be non-empty")
    if link.owner == link.friend:
        raise SelfLink(f"owner and friend are both {link.owner!r}")
    for name in COUNTER_FIELDS:
        if getattr(link, name) < 0:
            raise ValueError(f"{name} must be >= 0")
    if link.owner_friend_count < 1:
        raise ValueError("owner_friend_count must be >= 1")
    if link.friend_friend_count is not None:
        if link.friend_friend_count < 0:
            raise ValueError("friend_friend_count must be >= 0")
        if link.common_friends > link.friend_friend_count:
            raise ValueError("common_friends exceeds friend_friend_count")
    if link.common_friends > link.owner_friend_count:
        raise ValueError("common_friends exceeds owner_friend_count")
    if not isinstance(link.disposition, LinkDisposition):
        raise ValueError(f"bad disposition {link.disposition!r}")


# Allowed audience values per privacy setting.
SETTING_AUDIENCES = {
    "default_privacy": frozenset({AudienceLevel.EVERYONE, AudienceLevel.FRIENDS, AudienceLevel.CUSTOM}),
    "lookup": frozenset({AudienceLevel.EVERYONE, AudienceLevel.FRIENDS, AudienceLevel.FRIENDS_OF_FRIENDS}),
    "share_address": frozenset({AudienceLevel.EVERYONE, AudienceLevel.FRIENDS, AudienceLevel.FRIENDS_OF_FRIENDS}),
    "send_messages": frozenset({AudienceLevel.EVERYONE, AudienceLevel.FRIENDS, AudienceLevel.FRIENDS_OF_FRIENDS}),
    "receive_friend_requests": frozenset({AudienceLevel.EVERYONE, AudienceLevel.FRIENDS_OF_FRIENDS}),
    "tag_suggestions": frozenset({AudienceLevel.NO_ONE, AudienceLevel.FRIENDS}),
    "view_birthday": frozenset({AudienceLevel.EVERYONE, AudienceLevel.FRIENDS, AudienceLevel.FRIENDS_OF_FRIENDS}),
}
SETTINGS = tuple(SETTING_AUDIENCES)

SNAPSHOT_COLUMNS = ("user", "timestamp_iso8601", "installed_app_count") + SETTINGS


@dataclass(frozen=True)
class PrivacySnapshot:
    user: UserId
    timestamp: datetime
    installed_app_count: int
    default_privacy: AudienceLevel
    lookup: AudienceLevel
    share_address: AudienceLevel
    send_messages: AudienceLevel
    receive_friend_requests: AudienceLevel
    tag_suggestions: AudienceLevel
    view_birthday: AudienceLevel

    def __post_init__(self):
        if not self.user:
            raise ValueError("user id must be non-empty")
        if self.installed_app_count < 0:
            raise ValueError("installed_app_count must be >= 0")
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")
        for name, allowed in SETTING_AUDIENCES.items():
            value = getattr(self, name)
            if value not in allowed:
                raise IllegalAudience(f"{name}={value.value} not in "
                                      f"{sorted(a.value for a in allowed)}")

    def settings(self) -> tuple:
        return tuple(getattr(self, name) for name in SETTINGS)


# ---------------------------------------------------------------------------
# CSV ingestion

def _int_field(row: dict, name: str, line: int, minimum: int = 0) -> int:
    raw = (row.get(name) or "").strip()
    try:
        value = int(raw)
    except ValueError:
        raise MalformedRow(line, f"{name}: expected integer, got {raw!r}") from None
    if value < minimum:
        raise MalformedRow(line, f"{name}: must be >= {minimum}, got {value}")
    return value


def _bool_field(row: dict, name: str, line: int) -> bool:
    raw = (row.get(name) or "").strip().lower()
    if raw in ("1", "true"):
        return True
    if raw in ("0", "false"):
        return False
    raise MalformedRow(line, f"{name}: expected 0/1, got {raw!r}")


def _check_header(reader: csv.DictReader, required: Iterable[str]) -> None:
    header = reader.fieldnames
    if header is None:
        raise MalformedRow(1, "missing header row")
    missing = [c for c in required if c not in header]
    if missing:
        raise MalformedRow(1, f"header lacks columns {missing}")


def parse_link_records(source: TextIO) -> list[LinkRecord]:
    """Parse the links CSV into validated records, preserving row order."""
    reader = csv.DictReader(source)
    _check_header(reader, LINK_COLUMNS)
    records = []
    seen = set()
    for row in reader:
        line = reader.line_num
        owner = (row["owner"] or "").strip()
        friend = (row["friend"] or "").strip()
        if not owner or not friend:
            raise MalformedRow(line, "owner and friend must be non-empty")
        if owner == friend:
            raise SelfLink(f"line {line}: owner and friend are both {owner!r}")
        if (owner, friend) in seen:
            raise DuplicateLink(f"line {line}: duplicate link ({owner}, {friend})")
        seen.add((owner, friend))
        raw_ffc = (row["friend_friend_count"] or "").strip()
        ffc = None if raw_ffc == "" else _int_field(row, "friend_friend_count", line)
        try:
            disposition = LinkDisposition((row["disposition"] or "").strip())
        except ValueError:
            raise MalformedRow(line, f"unknown disposition {row['disposition']!r}") from None
        try:
            record = LinkRecord(
                owner=owner,
                friend=friend,
                are_family=_bool_field(row, "are_family", line),
                common_chat_messages=_int_field(row, "common_chat_messages", line),
                common_friends=_int_field(row, "common_friends", line),
                common_groups=_int_field(row, "common_groups", line),
                common_posts=_int_field(row, "common_posts", line),
                tagged_photos=_int_field(row, "tagged_photos", line),
                tagged_videos=_int_field(row, "tagged_videos", line),
                owner_friend_count=_int_field(row, "owner_friend_count", line, minimum=1),
                friend_friend_count=ffc,
                disposition=disposition,
            )
        except ValueError as exc:
            raise MalformedRow(line, str(exc)) from None
        records.append(record)
    return records


def write_link_records(records: Iterable[LinkRecord], sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(LINK_COLUMNS)
    for r in records:
        writer.writerow([
            r.owner, r.friend, int(r.are_family), r.common_chat_messages,
            r.common_friends, r.common_groups, r.common_posts, r.tagged_photos,
            r.tagged_videos, r.owner_friend_count,
            "" if r.friend_friend_count is None else r.friend_friend_count,
            r.disposition.value,
        ])


def links_to_csv(records: Iterable[LinkRecord]) -> str:
    buf = io.StringIO()
    write_link_records(records, buf)
    return buf.getvalue()


def parse_timestamp(raw: str) -> datetime:
    raw = raw.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_privacy_snapshots(source: TextIO) -> list[PrivacySnapshot]:
    """Parse the snapshots CSV; result is sorted by (user, timestamp)."""
    reader = csv.DictReader(source)
    _check_header(reader, SNAPSHOT_COLUMNS)
    snapshots = []
    for row in reader:
        line = reader.line_num
        user = (row["user"] or "").strip()
        if not user:
            raise MalformedRow(line, "user must be non-empty")
        try:
            ts = parse_timestamp(row["timestamp_iso8601"] or "")
        except ValueError:
            raise MalformedRow(line, f"bad timestamp {row['timestamp_iso8601']!r}") from None
        levels = {}
        for name in SETTINGS:
            raw = (row[name] or "").strip().lower()
            try:
                level = AudienceLevel(raw)
            except ValueError:
                raise MalformedRow(line, f"{name}: unknown audience {raw!r}") from None
            if level not in SETTING_AUDIENCES[name]:
                raise IllegalAudience(f"line {line}: {name}={raw} not allowed")
            levels[name] = level
        snapshots.append(PrivacySnapshot(
            user=user, timestamp=ts,
            installed_app_count=_int_field(row, "installed_app_count", line),
            **levels,
        ))
    snapshots.sort(key=lambda s: (s.user, s.timestamp))
    return snapshots


def write_privacy_snapshots(snapshots: Iterable[PrivacySnapshot], sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(SNAPSHOT_COLUMNS)
    for s in snapshots:
        writer.writerow([s.user, s.timestamp.isoformat(), s.installed_app_count]
                        + [getattr(s, name).value for name in SETTINGS])


def group_by_owner(records: Iterable[LinkRecord]) -> dict[UserId, list[LinkRecord]]:
    """Group links by owner; owners appear in first-seen order."""
    groups: dict[UserId, list[LinkRecord]] = {}
    for r in records:
        groups.setdefault(r.owner, []).append(r)
    return groups
