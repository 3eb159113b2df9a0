"""Shared domain types and their validation. No I/O lives here.

Conventions used throughout the package:

* timestamps are UTC integers, seconds since the epoch;
* name and profile-entry comparisons are case-insensitive after trimming;
* profile entries are capped at ``MAX_PROFILE_ENTRY_WORDS`` words and are
  truncated (with a warning), never silently dropped.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import ValidationError

MAX_PROFILE_ENTRY_WORDS = 6


def utc_now() -> int:
    return int(time.time())


def norm_key(text: str) -> str:
    """Canonical comparison key: trimmed, lowercased, single-spaced."""
    return " ".join(text.split()).lower()


class QaKind(str, Enum):
    WHO = "WHO"
    WHERE = "WHERE"
    WHEN = "WHEN"
    WHAT = "WHAT"
    OPEN = "OPEN"


class QaStatus(str, Enum):
    PENDING = "PENDING"
    ASKED = "ASKED"
    DONE = "DONE"


class AgentOption(str, Enum):
    """The five flow-control actions the agent can pick each turn."""

    A = "A"  # correct answer: acknowledge, ask next question
    B = "B"  # incorrect answer: gently correct, ask next question
    C = "C"  # off-topic reply: engage with it
    D = "D"  # conversation stalls: re-ask, or offer a new photo
    E = "E"  # disinterest: say goodbye


class Phase(str, Enum):
    STRUCTURED = "STRUCTURED"
    OPEN = "OPEN"
    SUMMARIZING = "SUMMARIZING"
    ENDED = "ENDED"


class Role(str, Enum):
    CHATBOT = "CHATBOT"
    ELDERLY = "ELDERLY"


@dataclass
class Profile:
    """Evolving likes/dislikes, short phrases in caregiver-visible order."""

    likes: list[str] = field(default_factory=list)
    dislikes: list[str] = field(default_factory=list)

    def normalized(self) -> tuple["Profile", list[str]]:
        """Trim, drop empties, cap entry length, dedupe case-insensitively.

        Returns the cleaned profile and a list of warning strings. Idempotent:
        normalizing an already-normalized profile is a no-op.
        """
        warnings: list[str] = []
        return (
            Profile(
                likes=_clean_entries(self.likes, warnings),
                dislikes=_clean_entries(self.dislikes, warnings),
            ),
            warnings,
        )

    def render(self) -> str:
        """Prompt-facing form, e.g. ``Like=[tea, walks], Dislike=[]``."""
        return f"Like=[{', '.join(self.likes)}], Dislike=[{', '.join(self.dislikes)}]"

    def to_dict(self) -> dict[str, Any]:
        return {"likes": list(self.likes), "dislikes": list(self.dislikes)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Profile":
        return cls(likes=list(data.get("likes", [])), dislikes=list(data.get("dislikes", [])))


def _clean_entries(entries: list[str], warnings: list[str]) -> list[str]:
    seen: set[str] = set()
    cleaned: list[str] = []
    for raw in entries:
        entry = " ".join(raw.split())
        if not entry:
            continue
        words = entry.split(" ")
        if len(words) > MAX_PROFILE_ENTRY_WORDS:
            entry = " ".join(words[:MAX_PROFILE_ENTRY_WORDS])
            warnings.append(f"profile entry truncated to {MAX_PROFILE_ENTRY_WORDS} words: {raw!r}")
        key = entry.lower()
        if key in seen:
            continue
        seen.add(key)
        cleaned.append(entry)
    return cleaned


@dataclass
class FamilyMember:
    name: str
    relationship: str = ""
    face_ref: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "relationship": self.relationship, "face_ref": self.face_ref}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FamilyMember":
        return cls(
            name=data["name"],
            relationship=data.get("relationship", ""),
            face_ref=data.get("face_ref"),
        )


@dataclass
class UserRecord:
    user_id: str
    display_name: str
    background: str = ""
    profile: Profile = field(default_factory=Profile)
    family: list[FamilyMember] = field(default_factory=list)

    def member_names(self) -> list[str]:
        return [m.name for m in self.family]

    def find_member(self, name: str) -> FamilyMember | None:
        key = norm_key(name)
        for member in self.family:
            if norm_key(member.name) == key:
                return member
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "user_id": self.user_id,
            "display_name": self.display_name,
            "background": self.background,
            "profile": self.profile.to_dict(),
            "family": [m.to_dict() for m in self.family],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "UserRecord":
        return cls(
            user_id=data["user_id"],
            display_name=data["display_name"],
            background=data.get("background", ""),
            profile=Profile.from_dict(data.get("profile", {})),
            family=[FamilyMember.from_dict(m) for m in data.get("family", [])],
        )


def validate_user(record: UserRecord) -> UserRecord:
    """Check user invariants; returns the record with a normalized profile.

    Raises ValidationError(EMPTY_NAME) for blank ids/names and
    ValidationError(DUPLICATE_MEMBER) for roster name collisions
    (case-insensitive, whitespace-trimmed).
    """
    if not record.user_id.strip():
        raise ValidationError("user_id must be non-empty", code="EMPTY_NAME")
    if not record.display_name.strip():
        raise ValidationError("display_name must be non-empty", code="EMPTY_NAME")
    seen: set[str] = set()
    for member in record.family:
        if not member.name.strip():
            raise ValidationError("family member name must be non-empty", code="EMPTY_NAME")
        key = norm_key(member.name)
        if key in seen:
            raise ValidationError(f"duplicate family member: {member.name}", code="DUPLICATE_MEMBER")
        seen.add(key)
    record.profile, _ = record.profile.normalized()
    return record


@dataclass
class Photo:
    """Caregiver-described image; also used for imported text topics (no blob)."""

    photo_id: str
    owner: str
    uploaded_at: int
    description: str
    members_present: list[str] = field(default_factory=list)
    last_discussed_at: int | None = None
    discussed_count: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "photo_id": self.photo_id,
            "owner": self.owner,
            "uploaded_at": self.uploaded_at,
            "description": self.description,
            "members_present": list(self.members_present),
            "last_discussed_at": self.last_discussed_at,
            "discussed_count": self.discussed_count,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Photo":
        return cls(
            photo_id=data["photo_id"],
            owner=data["owner"],
            uploaded_at=data["uploaded_at"],
            description=data.get("description", ""),
            members_present=list(data.get("members_present", [])),
            last_discussed_at=data.get("last_discussed_at"),
            discussed_count=data.get("discussed_count", 0),
        )


def validate_photo(photo: Photo, roster_names: list[str]) -> Photo:
    """Photo invariants: members within roster, discussion bookkeeping coherent."""
    roster = {norm_key(n) for n in roster_names}
    for name in photo.members_present:
        if norm_key(name) not in roster:
            raise ValidationError(f"unknown member tagged on photo: {name}", code="EMPTY_NAME")
    if (photo.discussed_count == 0) != (photo.last_discussed_at is None):
        raise ValidationError(
            "discussed_count and last_discussed_at out of sync", code="FIXTURE_INVALID"
        )
    return photo


@dataclass
class QaItem:
    kind: QaKind
    question: str
    expected_answer: str = ""
    status: QaStatus = QaStatus.PENDING

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "question": self.question,
            "expected_answer": self.expected_answer,
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "QaItem":
        return cls(
            kind=QaKind(data["kind"]),
            question=data["question"],
            expected_answer=data.get("expected_answer", ""),
            status=QaStatus(data.get("status", "PENDING")),
        )


@dataclass
class QuestionPlan:
    """Ordered question sequence with a monotone cursor.

    items[0] is always the WHO question and items[-1] the open-ended one.
    """

    items: list[QaItem]
    cursor: int = 0

    def current(self) -> QaItem | None:
        if 0 <= self.cursor < len(self.items):
            return self.items[self.cursor]
        return None

    def next_pending(self) -> QaItem | None:
        if self.cursor + 1 < len(self.items):
            return self.items[self.cursor + 1]
        return None

    def to_dict(self) -> dict[str, Any]:
        return {"items": [i.to_dict() for i in self.items], "cursor": self.cursor}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "QuestionPlan":
        return cls(
            items=[QaItem.from_dict(i) for i in data["items"]],
            cursor=data.get("cursor", 0),
        )


@dataclass
class Turn:
    index: int
    role: Role
    text: str
    option: AgentOption | None = None
    question_kind: QaKind | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "role": self.role.value,
            "text": self.text,
            "option": self.option.value if self.option else None,
            "question_kind": self.question_kind.value if self.question_kind else None,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Turn":
        return cls(
            index=data["index"],
            role=Role(data["role"]),
            text=data["text"],
            option=AgentOption(data["option"]) if data.get("option") else None,
            question_kind=QaKind(data["question_kind"]) if data.get("question_kind") else None,
        )


@dataclass
class DialogueState:
    """Per-session machine state. Owned and mutated only by the engine."""

    session_id: str
    user_id: str
    photo_id: str
    plan: QuestionPlan
    option_history: list[AgentOption] = field(default_factory=list)
    consecutive_c: int = 0
    phase: Phase = Phase.STRUCTURED
    open_exchanges: int = 0
    turns: list[Turn] = field(default_factory=list)

    def elderly_turn_count(self) -> int:
        return sum(1 for t in self.turns if t.role is Role.ELDERLY)

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "user_id": self.user_id,
            "photo_id": self.photo_id,
            "plan": self.plan.to_dict(),
            "option_history": [o.value for o in self.option_history],
            "consecutive_c": self.consecutive_c,
            "phase": self.phase.value,
            "open_exchanges": self.open_exchanges,
            "turns": [t.to_dict() for t in self.turns],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DialogueState":
        return cls(
            session_id=data["session_id"],
            user_id=data["user_id"],
            photo_id=data["photo_id"],
            plan=QuestionPlan.from_dict(data["plan"]),
            option_history=[AgentOption(o) for o in data.get("option_history", [])],
            consecutive_c=data.get("consecutive_c", 0),
            phase=Phase(data.get("phase", "STRUCTURED")),
            open_exchanges=data.get("open_exchanges", 0),
            turns=[Turn.from_dict(t) for t in data.get("turns", [])],
        )


def trailing_c_count(history: list[AgentOption]) -> int:
    """Length of the maximal all-C suffix of the option history."""
    count = 0
    for option in reversed(history):
        if option is not AgentOption.C:
            break
        count += 1
    return count


@dataclass
class ChatSummary:
    """Output of the post-photo summary pass."""

    summary_text: str
    new_profile: Profile
    target_person: str | None
    photo_id: str
    created_at: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "summary_text": self.summary_text,
            "new_profile": self.new_profile.to_dict(),
            "target_person": self.target_person,
            "photo_id": self.photo_id,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ChatSummary":
        return cls(
            summary_text=data["summary_text"],
            new_profile=Profile.from_dict(data.get("new_profile", {})),
            target_person=data.get("target_person"),
            photo_id=data["photo_id"],
            created_at=data["created_at"],
        )


@dataclass
class SummaryRecord:
    """Storage envelope for a ChatSummary: links it to user and session.

    ``unparsed`` marks summaries whose model output failed to parse; the raw
    text is kept so caregivers never lose the history.
    """

    summary_id: str
    user_id: str
    session_id: str
    summary: ChatSummary
    unparsed: bool = False
    raw_text: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "summary_id": self.summary_id,
            "user_id": self.user_id,
            "session_id": self.session_id,
            "summary": self.summary.to_dict(),
            "unparsed": self.unparsed,
            "raw_text": self.raw_text,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SummaryRecord":
        return cls(
            summary_id=data["summary_id"],
            user_id=data["user_id"],
            session_id=data["session_id"],
            summary=ChatSummary.from_dict(data["summary"]),
            unparsed=data.get("unparsed", False),
            raw_text=data.get("raw_text"),
        )
