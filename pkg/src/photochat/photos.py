"""Next-photo selection and discussion bookkeeping.

Selection walks four tiers: fresh (never-discussed) photos featuring the
target person, then any fresh photo, then the longest-undiscussed photo
featuring the target person, then the longest-undiscussed overall. Fresh
tiers prefer the newest upload; discussed tiers the oldest last discussion.
Ties always break on ascending photo id.
"""

from __future__ import annotations

from .domain import Photo, norm_key
from .errors import PolicyError


def _features(photo: Photo, target_key: str) -> bool:
    return any(norm_key(name) == target_key for name in photo.members_present)


def select_next_photo(
    photos: list[Photo], target_person: str | None = None, now: int | None = None
) -> Photo:
    """Pick the photo to discuss next. Pure function of its inputs."""
    if not photos:
        raise PolicyError("no photos to choose from", code="NO_PHOTOS")
    target_key = norm_key(target_person) if target_person else None

    fresh = [p for p in photos if p.discussed_count == 0]
    if target_key is not None:
        tier1 = [p for p in fresh if _features(p, target_key)]
        if tier1:
            return min(tier1, key=lambda p: (-p.uploaded_at, p.photo_id))
    if fresh:
        return min(fresh, key=lambda p: (-p.uploaded_at, p.photo_id))
    if target_key is not None:
        tier3 = [p for p in photos if _features(p, target_key)]
        if tier3:
            return min(tier3, key=lambda p: (p.last_discussed_at, p.photo_id))
    return min(photos, key=lambda p: (p.last_discussed_at, p.photo_id))


def mark_discussed(photo: Photo, now: int) -> Photo:
    photo.last_discussed_at = now
    photo.discussed_count += 1
    return photo
