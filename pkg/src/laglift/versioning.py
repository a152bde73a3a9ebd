"""Version parsing, Maven-style total ordering, and technical-lag metrics.

Versions are tokenized on '.', '-', and letter/digit boundaries. Numeric
tokens compare numerically and rank above qualifiers; known qualifiers
rank alpha < beta < milestone < rc < snapshot < release < sp, and unknown
qualifiers sort lexicographically after sp. Trailing zero segments are
insignificant, so "1.0" and "1" compare equal.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable

from .errors import UnknownVersionError, VersionParseError

_QUALIFIER_RANK = {
    "alpha": 0,
    "beta": 1,
    "milestone": 2,
    "rc": 3,
    "snapshot": 4,
    "": 5,
    "sp": 6,
}
_UNKNOWN_RANK = 7
_PRERELEASE_QUALIFIERS = frozenset({"alpha", "beta", "milestone", "rc", "snapshot"})

# Key shared by plain-release padding and zero-valued numeric tokens. Giving
# both the same key keeps the order a true total order (elementwise
# lexicographic with a fixed pad) while preserving "missing segment compares
# as release/zero".
_RELEASE_KEY = (0, _QUALIFIER_RANK[""], "")

_SEGMENT_RUN = re.compile(r"\d+|\D+")


def _token_key(token: int | str) -> tuple[int, int, str]:
    if isinstance(token, int):
        return (1, token, "") if token else _RELEASE_KEY
    rank = _QUALIFIER_RANK.get(token, _UNKNOWN_RANK)
    return (0, rank, token if rank == _UNKNOWN_RANK else "")


@functools.total_ordering
class Version:
    """An immutable version identifier with Maven-flavoured ordering.

    Equality and hashing use the normalized comparison key, so "1.0" and
    "1.0.0" are the same version with different renderings.
    """

    __slots__ = ("raw", "segments", "_key")

    def __init__(self, raw: str, segments: tuple[int | str, ...]):
        self.raw = raw
        self.segments = segments
        key = [_token_key(t) for t in segments]
        while key and key[-1] == _RELEASE_KEY:
            key.pop()
        self._key = tuple(key)

    def __str__(self) -> str:
        return self.raw

    def __repr__(self) -> str:
        return f"Version({self.raw!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Version):
            return NotImplemented
        return self._key == other._key

    def __lt__(self, other: "Version") -> bool:
        if not isinstance(other, Version):
            return NotImplemented
        return compare_versions(self, other) < 0

    def __hash__(self) -> int:
        return hash(self._key)


@dataclass(frozen=True)
class LagMeasure:
    """Technical lag of one artifact: releases behind and days behind."""

    version_lag: int
    time_lag_days: int


def parse_version(text: str) -> Version:
    """Parse version text into tokens split on '.', '-', and digit/letter edges."""
    if not text:
        raise VersionParseError("empty version string")
    if any(ch.isspace() for ch in text):
        raise VersionParseError(f"whitespace in version: {text!r}")
    segments: list[int | str] = []
    for part in re.split(r"[.\-]", text):
        if not part:
            raise VersionParseError(f"empty segment in version: {text!r}")
        for run in _SEGMENT_RUN.findall(part):
            if run.isdigit():
                segments.append(int(run))
            else:
                segments.append(run.lower())
    return Version(raw=text, segments=tuple(segments))


def compare_versions(a: Version, b: Version) -> int:
    """Total order over versions: negative, zero, or positive like a C comparator."""
    ka, kb = a._key, b._key
    for i in range(max(len(ka), len(kb))):
        ta = ka[i] if i < len(ka) else _RELEASE_KEY
        tb = kb[i] if i < len(kb) else _RELEASE_KEY
        if ta != tb:
            return -1 if ta < tb else 1
    return 0


def is_stable(version: Version) -> bool:
    """True unless some segment is a pre-release qualifier (alpha..snapshot)."""
    return not any(
        isinstance(t, str) and t in _PRERELEASE_QUALIFIERS for t in version.segments
    )


def version_lag(current: Version, all_releases: Iterable[Version]) -> int:
    """Count stable releases strictly newer than ``current``.

    ``current`` must itself appear in ``all_releases``.
    """
    releases = list(all_releases)
    if current not in releases:
        raise UnknownVersionError(f"version {current} not in release list")
    return sum(1 for r in releases if is_stable(r) and r > current)


def time_lag(current_released_at: datetime, latest_released_at: datetime) -> int:
    """Whole days from the current release to the latest one, clamped at zero."""
    delta = latest_released_at - current_released_at
    # timedelta.days already floors toward -inf, so only the clamp is needed.
    return max(delta.days, 0)


def lag_measure(
    current: Version,
    all_releases: Iterable[Version],
    current_released_at: datetime,
    latest_stable_released_at: datetime | None,
) -> LagMeasure:
    """Bundle version lag and time lag for one artifact."""
    vlag = version_lag(current, all_releases)
    if latest_stable_released_at is None:
        tlag = 0
    else:
        tlag = time_lag(current_released_at, latest_stable_released_at)
    return LagMeasure(version_lag=vlag, time_lag_days=tlag)
