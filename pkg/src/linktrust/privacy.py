"""Installed-application and privacy-setting statistics over snapshot streams."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import timedelta
from statistics import median
from typing import Iterable, Sequence

from .errors import EmptySnapshots
from .model import SETTINGS, AudienceLevel, PrivacySnapshot, UserId

DAY = timedelta(days=1)
WEEK = timedelta(weeks=1)

# Higher is more restrictive. Custom audiences are treated like Friends.
RESTRICTIVENESS = {
    AudienceLevel.EVERYONE: 0,
    AudienceLevel.FRIENDS_OF_FRIENDS: 1,
    AudienceLevel.FRIENDS: 2,
    AudienceLevel.CUSTOM: 2,
    AudienceLevel.NO_ONE: 3,
}

DEFAULT_THRESHOLDS = (10, 40, 100)
DEFAULT_HISTOGRAM_EDGES = (0, 10, 20, 40, 100, 200, 500, 1000)


def by_user(snapshots: Iterable[PrivacySnapshot]) -> dict[UserId, list[PrivacySnapshot]]:
    groups: dict[UserId, list[PrivacySnapshot]] = defaultdict(list)
    for s in snapshots:
        groups[s.user].append(s)
    return {u: sorted(v, key=lambda s: s.timestamp) for u, v in sorted(groups.items())}


@dataclass
class AppCountSummary:
    users: int
    mean_apps: float
    fraction_below: dict[int, float]
    fraction_at_least: dict[int, float]
    fraction_above: dict[int, float]
    histogram: list[tuple[str, int]]

    def to_dict(self) -> dict:
        return {
            "users": self.users,
            "mean_apps": self.mean_apps,
            "fraction_below": {str(k): v for k, v in self.fraction_below.items()},
            "fraction_at_least": {str(k): v for k, v in self.fraction_at_least.items()},
            "fraction_above": {str(k): v for k, v in self.fraction_above.items()},
            "histogram": [{"bin": b, "users": n} for b, n in self.histogram],
        }


def app_count_summary(snapshots: Sequence[PrivacySnapshot],
                      thresholds: Sequence[int] = DEFAULT_THRESHOLDS,
                      edges: Sequence[int] = DEFAULT_HISTOGRAM_EDGES) -> AppCountSummary:
    """Statistics of each user's first observed installed-application count."""
    groups = by_user(snapshots)
    if not groups:
        raise EmptySnapshots("no snapshots")
    counts = [snaps[0].installed_app_count for snaps in groups.values()]
    n = len(counts)
    hist = []
    for lo, hi in zip(edges, list(edges[1:]) + [None]):
        label = f"{lo}-{hi - 1}" if hi is not None else f"{lo}+"
        hist.append((label, sum(1 for c in counts if c >= lo and (hi is None or c < hi))))
    below_first = sum(1 for c in counts if c < edges[0])
    if below_first:
        hist.insert(0, (f"<{edges[0]}", below_first))
    return AppCountSummary(
        users=n,
        mean_apps=sum(counts) / n,
        fraction_below={t: sum(c < t for c in counts) / n for t in thresholds},
        fraction_at_least={t: sum(c >= t for c in counts) / n for t in thresholds},
        fraction_above={t: sum(c > t for c in counts) / n for t in thresholds},
        histogram=hist,
    )


@dataclass
class UserDelta:
    user: UserId
    first_count: int
    day_after_count: int
    removed: int
    added: int
    removal_ratio: float

    @property
    def outcome(self) -> str:
        if self.removed:
            return "removed"
        if self.added:
            return "added"
        return "unchanged"


@dataclass
class RemovalReport:
    users: list[UserDelta]
    ineligible: int

    def summary(self) -> dict:
        removers = [u for u in self.users if u.outcome == "removed"]
        adders = [u for u in self.users if u.outcome == "added"]
        return {
            "eligible_users": len(self.users),
            "ineligible_users": self.ineligible,
            "removed_users": len(removers),
            "added_users": len(adders),
            "unchanged_users": len(self.users) - len(removers) - len(adders),
            "apps_removed": sum(u.removed for u in removers),
            "apps_added": sum(u.added for u in adders),
            "mean_removal_ratio": (sum(u.removal_ratio for u in removers) / len(removers)
                                   if removers else 0.0),
            "removed_at_least_half": sum(u.removal_ratio >= 0.5 for u in removers),
        }

    def to_dict(self) -> dict:
        return {"summary": self.summary(),
                "users": [{"user": u.user, "first": u.first_count,
                           "day_after": u.day_after_count, "removed": u.removed,
                           "added": u.added, "removal_ratio": u.removal_ratio,
                           "outcome": u.outcome} for u in self.users]}


def day_after_removal_report(snapshots: Sequence[PrivacySnapshot]) -> RemovalReport:
    """Compare each user's first count with the latest one taken within 24 hours."""
    deltas, ineligible = [], 0
    for user, snaps in by_user(snapshots).items():
        first = snaps[0]
        window = [s for s in snaps[1:]
                  if first.timestamp < s.timestamp <= first.timestamp + DAY]
        if not window:
            ineligible += 1
            continue
        later = window[-1]
        diff = later.installed_app_count - first.installed_app_count
        removed, added = max(0, -diff), max(0, diff)
        ratio = removed / first.installed_app_count if first.installed_app_count else 0.0
        deltas.append(UserDelta(user, first.installed_app_count,
                                later.installed_app_count, removed, added, ratio))
    return RemovalReport(deltas, ineligible)


@dataclass
class InstallRateReport:
    rates_per_day: dict[UserId, float]
    rates_per_window: dict[UserId, float]
    window_days: float
    users_considered: int

    def to_dict(self) -> dict:
        def stats(rates):
            vals = list(rates.values())
            return {"median": median(vals) if vals else 0.0,
                    "mean": sum(vals) / len(vals) if vals else 0.0}
        return {"users_considered": self.users_considered,
                "increased_users": len(self.rates_per_window),
                "window_days": self.window_days,
                "per_window": {**stats(self.rates_per_window), "users": self.rates_per_window},
                "per_day": {**stats(self.rates_per_day), "users": self.rates_per_day}}


def install_rate_report(snapshots: Sequence[PrivacySnapshot],
                        window: timedelta = WEEK) -> InstallRateReport:
    """Average installs per window for users whose count grew from first to last snapshot."""
    per_day, per_window, considered = {}, {}, 0
    for user, snaps in by_user(snapshots).items():
        if len(snaps) < 2:
            continue
        elapsed = snaps[-1].timestamp - snaps[0].timestamp
        if elapsed <= timedelta(0):
            continue
        considered += 1
        delta = snaps[-1].installed_app_count - snaps[0].installed_app_count
        if delta <= 0:
            continue
        per_day[user] = delta / (elapsed / DAY)
        per_window[user] = delta / (elapsed / window)
    return InstallRateReport(per_day, per_window, window / DAY, considered)


def settings_distribution(snapshots: Sequence[PrivacySnapshot]) -> dict[str, dict[str, float]]:
    """Per setting, the share of users at each audience level (earliest snapshot per user)."""
    groups = by_user(snapshots)
    if not groups:
        raise EmptySnapshots("no snapshots")
    firsts = [snaps[0] for snaps in groups.values()]
    out = {}
    for name in SETTINGS:
        tally = Counter(getattr(s, name) for s in firsts)
        out[name] = {level.value: tally[level] / len(firsts)
                     for level in AudienceLevel if tally[level]}
    return out


def _less_restrictive(a: tuple, b: tuple) -> bool:
    """True when configuration a is nowhere stricter than b and looser somewhere."""
    ra = [RESTRICTIVENESS[x] for x in a]
    rb = [RESTRICTIVENESS[x] for x in b]
    return all(x <= y for x, y in zip(ra, rb)) and ra != rb


@dataclass(frozen=True)
class SettingsChange:
    user: UserId
    changed: bool
    reverted_to_less_restrictive: bool


def settings_change_detection(snapshots: Sequence[PrivacySnapshot]) -> list[SettingsChange]:
    results = []
    for user, snaps in by_user(snapshots).items():
        if len(snaps) < 2:
            continue
        configs = [s.settings() for s in snaps]
        changed = any(a != b for a, b in zip(configs, configs[1:]))
        reverted = any(
            configs[l] == configs[i] and _less_restrictive(configs[i], configs[j])
            for i in range(len(configs))
            for j in range(i + 1, len(configs))
            for l in range(j + 1, len(configs)))
        results.append(SettingsChange(user, changed, reverted))
    return results
