"""Pluggable face-identity adapter.

Answers "which roster members appear in this photo" without shipping a
vision stack: the default matcher passes through caregiver tags, and an
optional embedding matcher compares caregiver-supplied face vectors by
cosine similarity.
"""

from __future__ import annotations

import math
from typing import Protocol, Sequence

from .domain import FamilyMember, norm_key
from .errors import MatcherError

DEFAULT_COSINE_THRESHOLD = 0.6
DEFAULT_EMBEDDING_DIM = 128


class IdentityMatcher(Protocol):
    def match(
        self, photo_blob_ref: str | None, roster: Sequence[FamilyMember]
    ) -> list[tuple[str, float]]: ...


class CaregiverTagMatcher:
    """Trusts the caregiver's member tags at full confidence."""

    def __init__(self, tags: Sequence[str]):
        self.tags = list(tags)

    def match(
        self, photo_blob_ref: str | None, roster: Sequence[FamilyMember]
    ) -> list[tuple[str, float]]:
        return [(tag, 1.0) for tag in self.tags]


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    if len(u) != len(v):
        raise MatcherError(
            f"embedding dimensions differ: {len(u)} vs {len(v)}", code="MATCHER_UNAVAILABLE"
        )
    dot = sum(a * b for a, b in zip(u, v))
    norm_u = math.sqrt(sum(a * a for a in u))
    norm_v = math.sqrt(sum(b * b for b in v))
    if norm_u == 0.0 or norm_v == 0.0:
        return 0.0
    return dot / (norm_u * norm_v)


class EmbeddingMatcher:
    """Matches photo face vectors against roster face vectors.

    member_vectors maps member name to its reference embedding. A member
    matches when its best cosine over the photo's face vectors reaches the
    threshold; the similarity (clamped to [0, 1]) is the confidence.
    """

    def __init__(
        self,
        photo_vectors: Sequence[Sequence[float]],
        member_vectors: dict[str, Sequence[float]],
        threshold: float = DEFAULT_COSINE_THRESHOLD,
    ):
        self.photo_vectors = [list(v) for v in photo_vectors]
        self.member_vectors = {name: list(v) for name, v in member_vectors.items()}
        self.threshold = threshold

    def match(
        self, photo_blob_ref: str | None, roster: Sequence[FamilyMember]
    ) -> list[tuple[str, float]]:
        matches = []
        for member in roster:
            reference = self.member_vectors.get(member.name)
            if reference is None or not self.photo_vectors:
                continue
            best = max(cosine_similarity(reference, v) for v in self.photo_vectors)
            if best >= self.threshold:
                matches.append((member.name, min(max(best, 0.0), 1.0)))
        return matches


def identify_members(
    photo_blob_ref: str | None,
    roster: Sequence[FamilyMember],
    matcher: IdentityMatcher | None,
) -> list[tuple[str, float]]:
    """Run the matcher and keep only roster members with valid confidences.

    Unknown names are ignored; matched names are returned in roster
    spelling. Raises MatcherError(MATCHER_UNAVAILABLE) when no matcher is
    configured.
    """
    if matcher is None:
        raise MatcherError("no identity matcher configured", code="MATCHER_UNAVAILABLE")
    by_key = {norm_key(m.name): m.name for m in roster}
    results = []
    seen: set[str] = set()
    for name, confidence in matcher.match(photo_blob_ref, roster):
        canonical = by_key.get(norm_key(name))
        if canonical is None or canonical in seen:
            continue
        seen.add(canonical)
        results.append((canonical, min(max(float(confidence), 0.0), 1.0)))
    return results
