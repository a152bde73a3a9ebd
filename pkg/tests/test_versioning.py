"""Version parsing, ordering laws, and lag metrics."""

from __future__ import annotations

import re
from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from laglift.errors import UnknownVersionError, VersionParseError
from laglift.versioning import (
    compare_versions,
    is_stable,
    parse_version,
    time_lag,
    version_lag,
)

V = parse_version


def oracle_tokens(text: str) -> list:
    """Independent tokenizer: split on separators and digit/letter boundaries."""
    out = []
    for run in re.findall(r"\d+|[^\d.\-]+", text):
        out.append(int(run) if run.isdigit() else run.lower())
    return out


def oracle_normalize(text: str) -> list:
    """Trailing-zero trim used to predict equality of numeric versions."""
    tokens = oracle_tokens(text)
    while tokens and tokens[-1] == 0:
        tokens.pop()
    return tokens


class TestParsing:
    def test_plain_numeric(self):
        assert V("1.0.0").segments == (1, 0, 0)

    def test_qualifier_segment(self):
        assert V("1.0-alpha").segments == (1, 0, "alpha")

    def test_digit_letter_boundary(self):
        assert oracle_tokens("2.0-rc1") == [2, 0, "rc", 1]
        assert V("2.0-rc1").segments == (2, 0, "rc", 1)

    def test_render_is_identity(self):
        for text in ("1.0.0", "2.0-rc1", "1.0-SP1", "3-final"):
            assert str(V(text)) == text

    def test_empty_rejected(self):
        with pytest.raises(VersionParseError):
            V("")

    def test_whitespace_rejected(self):
        with pytest.raises(VersionParseError):
            V("1. 0")

    def test_empty_segment_rejected(self):
        with pytest.raises(VersionParseError):
            V("1..2")


class TestOrdering:
    def test_numeric_order(self):
        assert compare_versions(V("1.0"), V("1.1")) < 0

    def test_trailing_zero_equality(self):
        assert oracle_normalize("1.0") == oracle_normalize("1.0.0")
        assert compare_versions(V("1.0"), V("1.0.0")) == 0
        assert V("1.0") == V("1.0.0")
        assert hash(V("1.0")) == hash(V("1.0.0"))

    def test_qualifier_below_release(self):
        # rank table: alpha < beta < milestone < rc < snapshot < release < sp
        assert compare_versions(V("1.0-alpha"), V("1.0")) < 0

    def test_qualifier_rank_chain(self):
        ranked = ["1-alpha", "1-beta", "1-milestone", "1-rc", "1-snapshot", "1", "1-sp"]
        for lower, higher in zip(ranked, ranked[1:]):
            assert compare_versions(V(lower), V(higher)) < 0

    def test_unknown_qualifiers_after_sp(self):
        assert compare_versions(V("1-sp"), V("1-zzz")) < 0
        assert compare_versions(V("1-abc"), V("1-abd")) < 0

    def test_numeric_beats_qualifier(self):
        assert compare_versions(V("1.0-sp"), V("1.0.1")) < 0

    def test_missing_segment_as_release(self):
        assert compare_versions(V("1.0-alpha"), V("1")) < 0
        assert compare_versions(V("1-sp"), V("1")) > 0


class TestStability:
    def test_plain_release_stable(self):
        assert is_stable(V("2.0"))

    def test_rc_unstable(self):
        assert not is_stable(V("2.0-rc1"))

    def test_sp_stable(self):
        # sp ranks above release, so it is not a pre-release
        assert is_stable(V("1.0-sp1"))


class TestVersionLag:
    def test_counts_stable_strictly_newer(self):
        releases = [V("1.0"), V("1.1"), V("2.0-beta"), V("2.0")]
        brute = sum(1 for r in releases if is_stable(r) and compare_versions(r, V("1.0")) > 0)
        assert brute == 2
        assert version_lag(V("1.0"), releases) == 2

    def test_latest_has_zero_lag(self):
        assert version_lag(V("2.0"), [V("1.0"), V("2.0")]) == 0

    def test_singleton(self):
        assert version_lag(V("1.0"), [V("1.0")]) == 0

    def test_absent_current_rejected(self):
        with pytest.raises(UnknownVersionError):
            version_lag(V("9.9"), [V("1.0")])


class TestTimeLag:
    def test_calendar_difference(self):
        a = datetime(2020, 1, 1, tzinfo=timezone.utc)
        b = datetime(2020, 1, 31, tzinfo=timezone.utc)
        assert time_lag(a, b) == 30

    def test_identical_timestamps(self):
        a = datetime(2020, 1, 1, tzinfo=timezone.utc)
        assert time_lag(a, a) == 0

    def test_rereleased_history_clamps(self):
        a = datetime(2020, 6, 1, tzinfo=timezone.utc)
        b = datetime(2020, 1, 1, tzinfo=timezone.utc)
        assert time_lag(a, b) == 0


_tokens = st.one_of(
    st.integers(0, 40).map(str),
    st.sampled_from(["alpha", "beta", "milestone", "rc", "snapshot", "sp", "ga", "xy", "final"]),
)


@st.composite
def version_texts(draw):
    parts = draw(st.lists(_tokens, min_size=1, max_size=5))
    text = parts[0]
    for part in parts[1:]:
        text += draw(st.sampled_from([".", "-"])) + part
    return text


@given(version_texts())
def test_parse_then_render_is_identity(text):
    assert str(parse_version(text)) == text


@given(version_texts(), version_texts())
def test_antisymmetry_and_totality(a_text, b_text):
    a, b = V(a_text), V(b_text)
    assert compare_versions(a, b) == -compare_versions(b, a)
    assert (compare_versions(a, b) == 0) == (a == b)


@given(version_texts(), version_texts(), version_texts())
def test_transitivity(a_text, b_text, c_text):
    a, b, c = V(a_text), V(b_text), V(c_text)
    if compare_versions(a, b) <= 0 and compare_versions(b, c) <= 0:
        assert compare_versions(a, c) <= 0


@given(st.lists(version_texts(), min_size=1, max_size=8), version_texts())
def test_version_lag_matches_brute_force(texts, current_text):
    releases = [V(t) for t in texts] + [V(current_text)]
    current = V(current_text)
    brute = sum(1 for r in releases if is_stable(r) and compare_versions(r, current) > 0)
    assert version_lag(current, releases) == brute


@given(st.lists(version_texts(), min_size=2, max_size=8))
def test_version_lag_antitone_in_current(texts):
    releases = sorted({V(t) for t in texts})
    stable = [r for r in releases if is_stable(r)]
    if len(stable) < 2:
        return
    current, newer = stable[0], stable[-1]
    assert version_lag(newer, releases) <= version_lag(current, releases)
