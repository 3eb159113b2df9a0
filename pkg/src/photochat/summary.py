"""Post-photo chat summary: trigger rule, prompt, parsing, profile update.

The model receives the previous profile and the whole chat and answers with
three labeled blocks (new summary, new profile, target person). The profile
it returns REPLACES the stored one: the old profile is part of the prompt,
so merging is the model's job, not ours.
"""

from __future__ import annotations

import logging
import re

from .domain import (
    ChatSummary,
    DialogueState,
    Phase,
    Profile,
    Role,
    UserRecord,
    norm_key,
)
from .errors import ParseError, ValidationError
from .llm import ChatMessage, LlmProvider, MessageRole, SUMMARY_TEMPERATURE
from .prompts import load_template, render

logger = logging.getLogger(__name__)

DEFAULT_OPEN_EXCHANGE_THRESHOLD = 4

ROLE_LABELS = {Role.CHATBOT: "Chatbot", Role.ELDERLY: "Elderly"}


def should_summarize(
    state: DialogueState, *, open_exchange_threshold: int = DEFAULT_OPEN_EXCHANGE_THRESHOLD
) -> bool:
    """Summary is due when the photo's conversation has run its course.

    A session where the elder never spoke has nothing to summarize, no
    matter how it ended.
    """
    if state.elderly_turn_count() == 0:
        return False
    if state.phase in (Phase.SUMMARIZING, Phase.ENDED):
        return True
    return state.phase is Phase.OPEN and state.open_exchanges >= open_exchange_threshold


def render_chat_history(state: DialogueState) -> str:
    return "\n".join(f"{ROLE_LABELS[t.role]}: {t.text}" for t in state.turns)


def build_summary_prompt(user: UserRecord, state: DialogueState) -> str:
    if state.elderly_turn_count() == 0:
        raise ValidationError("nothing to summarize: the elder never spoke", code="EMPTY_CHAT")
    return render(
        load_template("summary_v1"),
        {
            "background": user.background,
            "profile": user.profile.render(),
            "chat_history": render_chat_history(state),
            "family members": ", ".join(user.member_names()),
        },
    )


# Likes/dislikes appear as "Like= [a, b]" / "Dislikes =[...]", with or
# without braces around the whole profile. The lookbehind keeps the likes
# pattern from matching inside "Dislike".
_LIKES_RE = re.compile(r"(?<![a-z])likes?\s*=\s*\[([^\]]*)\]", re.IGNORECASE)
_DISLIKES_RE = re.compile(r"dis\s?likes?\s*=\s*\[([^\]]*)\]", re.IGNORECASE)

_LABELS = ("new summary", "new profile", "target person")


def _split_blocks(raw: str) -> dict[str, str]:
    lowered = raw.lower()
    found: list[tuple[int, int, str]] = []
    for label in _LABELS:
        at = lowered.find(label)
        if at >= 0:
            found.append((at, at + len(label), label))
    found.sort()
    blocks: dict[str, str] = {}
    for i, (start, end, label) in enumerate(found):
        stop = found[i + 1][0] if i + 1 < len(found) else len(raw)
        blocks[label] = raw[end:stop].lstrip(":= \t").strip()
    return blocks


def _split_items(bracket_body: str) -> list[str]:
    items = []
    for piece in bracket_body.split(","):
        piece = piece.strip().strip("\"'").strip()
        if piece:
            items.append(piece)
    return items


def _strip_wrapping(text: str, open_ch: str, close_ch: str) -> str:
    text = text.strip()
    if text.startswith(open_ch) and text.endswith(close_ch):
        return text[1:-1].strip()
    return text


def parse_summary_response(
    raw: str,
    roster: list[str],
    *,
    photo_id: str = "",
    created_at: int = 0,
) -> tuple[ChatSummary, list[str]]:
    """Extract summary text, replacement profile, and target person.

    The target person is kept only when it names a roster member
    (case-insensitive); otherwise it is dropped with a warning. Raises
    ParseError(MISSING_BLOCK) when the summary or profile block is absent.
    """
    blocks = _split_blocks(raw)
    if "new summary" not in blocks or not blocks["new summary"]:
        raise ParseError("summary block missing from model output", code="MISSING_BLOCK")
    summary_text = _strip_wrapping(blocks["new summary"], "[", "]")

    profile_section = blocks.get("new profile", "") or raw
    likes_match = _LIKES_RE.search(profile_section)
    dislikes_match = _DISLIKES_RE.search(profile_section)
    if likes_match is None and dislikes_match is None:
        raise ParseError("profile block missing from model output", code="MISSING_BLOCK")
    profile = Profile(
        likes=_split_items(likes_match.group(1)) if likes_match else [],
        dislikes=_split_items(dislikes_match.group(1)) if dislikes_match else [],
    )
    profile, warnings = profile.normalized()

    target: str | None = None
    target_block = blocks.get("target person", "").strip()
    target_raw = target_block.splitlines()[0].strip() if target_block else ""
    target_raw = _strip_wrapping(target_raw, "[", "]").strip().rstrip(".").strip()
    if target_raw:
        by_key = {norm_key(name): name for name in roster}
        target = by_key.get(norm_key(target_raw))
        if target is None:
            warnings.append(f"target person {target_raw!r} not in family roster; dropped")
            logger.warning("summary target person %r not in roster", target_raw)

    summary = ChatSummary(
        summary_text=summary_text,
        new_profile=profile,
        target_person=target,
        photo_id=photo_id,
        created_at=created_at,
    )
    return summary, warnings


def format_summary(summary: ChatSummary) -> str:
    """Render a summary the way the model is asked to (inverse of parsing)."""
    lines = [
        f"New summary: {summary.summary_text}",
        f"New profile: {{Like= [{', '.join(summary.new_profile.likes)}], "
        f"Dislike= [{', '.join(summary.new_profile.dislikes)}]}}",
    ]
    if summary.target_person:
        lines.append(f"Target Person: {summary.target_person}")
    return "\n".join(lines)


def apply_summary(user: UserRecord, summary: ChatSummary) -> UserRecord:
    """Replace the user's profile with the summary's (normalized)."""
    new_profile, _ = summary.new_profile.normalized()
    user.profile = new_profile
    return user


def summarize_session(
    user: UserRecord,
    state: DialogueState,
    llm: LlmProvider,
    *,
    created_at: int = 0,
) -> tuple[ChatSummary, list[str], str]:
    """Run the summary pass once: prompt, completion, parse.

    Retries the completion once when the output cannot be parsed; raises
    ParseError(MISSING_BLOCK) after the retry so callers can store the raw
    text unparsed rather than lose the session.
    """
    prompt = build_summary_prompt(user, state)
    messages = [ChatMessage(MessageRole.SYSTEM, prompt)]
    raw = llm.complete(messages, temperature=SUMMARY_TEMPERATURE)
    try:
        summary, warnings = parse_summary_response(
            raw, user.member_names(), photo_id=state.photo_id, created_at=created_at
        )
    except ParseError:
        raw = llm.complete(messages, temperature=SUMMARY_TEMPERATURE)
        summary, warnings = parse_summary_response(
            raw, user.member_names(), photo_id=state.photo_id, created_at=created_at
        )
    return summary, warnings, raw
