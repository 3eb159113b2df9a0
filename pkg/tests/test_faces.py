"""Identity adapter: tag passthrough and cosine matching."""

from __future__ import annotations

import math

import pytest

from photochat.domain import FamilyMember
from photochat.errors import MatcherError
from photochat.faces import (
    CaregiverTagMatcher,
    EmbeddingMatcher,
    cosine_similarity,
    identify_members,
)

ROSTER = [FamilyMember(name="grandson"), FamilyMember(name="daughter")]


def unit_pair(cos: float, dim: int = 4):
    """Two unit vectors with a known cosine between them."""
    u = [1.0] + [0.0] * (dim - 1)
    v = [cos, math.sqrt(1 - cos * cos)] + [0.0] * (dim - 2)
    return u, v


class TestCaregiverTags:
    def test_passthrough_at_full_confidence(self):
        matcher = CaregiverTagMatcher(["grandson", "daughter"])
        assert identify_members(None, ROSTER, matcher) == [
            ("grandson", 1.0),
            ("daughter", 1.0),
        ]

    def test_unknown_tags_ignored(self):
        matcher = CaregiverTagMatcher(["grandson", "neighbor"])
        assert identify_members(None, ROSTER, matcher) == [("grandson", 1.0)]

    def test_tag_spelling_normalized_to_roster(self):
        matcher = CaregiverTagMatcher(["  GRANDSON "])
        assert identify_members(None, ROSTER, matcher) == [("grandson", 1.0)]

    def test_duplicates_collapsed(self):
        matcher = CaregiverTagMatcher(["grandson", "Grandson"])
        assert identify_members(None, ROSTER, matcher) == [("grandson", 1.0)]


class TestCosine:
    def test_known_cosine(self):
        u, v = unit_pair(0.98)
        assert cosine_similarity(u, v) == pytest.approx(0.98)

    def test_symmetric(self):
        u, v = unit_pair(0.37)
        assert cosine_similarity(u, v) == pytest.approx(cosine_similarity(v, u))

    def test_zero_vector_scores_zero(self):
        assert cosine_similarity([0.0, 0.0], [1.0, 0.0]) == 0.0

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(MatcherError):
            cosine_similarity([1.0], [1.0, 0.0])


class TestEmbeddingMatcher:
    def test_above_threshold_matches(self):
        u, v = unit_pair(0.98)
        matcher = EmbeddingMatcher([v], {"grandson": u}, threshold=0.8)
        matches = identify_members(None, ROSTER, matcher)
        assert len(matches) == 1
        assert matches[0][0] == "grandson"
        assert matches[0][1] == pytest.approx(0.98)

    def test_below_threshold_does_not_match(self):
        u, v = unit_pair(0.5)
        matcher = EmbeddingMatcher([v], {"grandson": u}, threshold=0.8)
        assert identify_members(None, ROSTER, matcher) == []

    def test_best_photo_face_is_used(self):
        u, near = unit_pair(0.9)
        _, far = unit_pair(0.1)
        matcher = EmbeddingMatcher([far, near], {"grandson": u}, threshold=0.8)
        assert identify_members(None, ROSTER, matcher)[0][1] == pytest.approx(0.9)

    def test_members_without_vectors_skipped(self):
        u, v = unit_pair(0.95)
        matcher = EmbeddingMatcher([v], {"grandson": u}, threshold=0.8)
        names = [n for n, _ in identify_members(None, ROSTER, matcher)]
        assert "daughter" not in names


class TestIdentifyMembers:
    def test_missing_matcher_rejected(self):
        with pytest.raises(MatcherError) as err:
            identify_members(None, ROSTER, None)
        assert err.value.code == "MATCHER_UNAVAILABLE"

    def test_output_always_within_roster_and_unit_interval(self):
        class NoisyMatcher:
            def match(self, blob, roster):
                return [("grandson", 1.7), ("stranger", 0.9), ("daughter", -0.2)]

        matches = identify_members(None, ROSTER, NoisyMatcher())
        assert [n for n, _ in matches] == ["grandson", "daughter"]
        assert all(0.0 <= c <= 1.0 for _, c in matches)
