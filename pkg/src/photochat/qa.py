"""Question/answer generation for a photo.

Renders the generation prompt, parses the model's ``Question###Answer;``
output, and assembles the full question plan: the fixed WHO opener, the
generated where/when/what questions, and the fixed open-ended closer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .domain import FamilyMember, Photo, QaItem, QaKind, QuestionPlan, norm_key
from .errors import ParseError, ValidationError
from .prompts import load_template, render

logger = logging.getLogger(__name__)

WHO_QUESTION = "Do you recognize anyone in this photo?"
OPEN_QUESTION = "Anything else special about this photo?"
NO_MEMBERS_ANSWER = "no familiar faces"

# Generated questions are mapped to kinds by position, per the mandated
# generation order. Extras beyond the third become additional WHAT items.
_POSITIONAL_KINDS = (QaKind.WHERE, QaKind.WHEN, QaKind.WHAT)

MIN_PAIRS = 3

PAIR_SEPARATOR = ";"
FIELD_SEPARATOR = "###"


@dataclass
class QaPair:
    question: str
    answer: str


def escape_description(description: str) -> str:
    """Neutralize parse delimiters inside caregiver text before rendering."""
    return description.replace(FIELD_SEPARATOR, "# # #").replace(PAIR_SEPARATOR, ",")


def build_qa_prompt(photo: Photo) -> str:
    if not photo.description.strip():
        raise ValidationError("photo description is empty", code="EMPTY_DESCRIPTION")
    return render(
        load_template("qa_gen_v1"),
        {"image_description": escape_description(photo.description)},
    )


def _strip_field(text: str) -> str:
    text = text.strip()
    while len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        text = text[1:-1].strip()
    return text


def parse_qa_response(raw: str) -> tuple[list[QaPair], list[str]]:
    """Split model output into (question, answer) pairs, in source order.

    Segments without the field separator are recorded as warnings and
    skipped. Raises ParseError(TOO_FEW_PAIRS) when fewer than MIN_PAIRS
    valid pairs remain.
    """
    pairs: list[QaPair] = []
    warnings: list[str] = []
    for segment in raw.split(PAIR_SEPARATOR):
        if not segment.strip():
            continue
        if FIELD_SEPARATOR not in segment:
            warnings.append(f"MALFORMED_SEGMENT: {segment.strip()[:80]!r}")
            continue
        question, _, answer = segment.partition(FIELD_SEPARATOR)
        question = _strip_field(question)
        answer = _strip_field(answer)
        if not question or not answer:
            warnings.append(f"MALFORMED_SEGMENT: {segment.strip()[:80]!r}")
            continue
        pairs.append(QaPair(question=question, answer=answer))
    if len(pairs) < MIN_PAIRS:
        raise ParseError(
            f"expected at least {MIN_PAIRS} question-answer pairs, got {len(pairs)}",
            code="TOO_FEW_PAIRS",
        )
    for warning in warnings:
        logger.warning("qa parse: %s", warning)
    return pairs, warnings


def format_qa_pairs(pairs: list[QaPair]) -> str:
    """Inverse of parse_qa_response for well-formed pairs."""
    return "".join(f"{p.question}{FIELD_SEPARATOR}{p.answer}{PAIR_SEPARATOR}" for p in pairs)


def who_expected_answer(photo: Photo, family: list[FamilyMember] | None = None) -> str:
    """Comma-joined ``name (relationship)`` for the members in the photo."""
    if not photo.members_present:
        return NO_MEMBERS_ANSWER
    by_key = {norm_key(m.name): m for m in family or []}
    parts = []
    for name in photo.members_present:
        member = by_key.get(norm_key(name))
        if member and member.relationship:
            parts.append(f"{name} ({member.relationship})")
        else:
            parts.append(name)
    return ", ".join(parts)


def assemble_question_plan(
    photo: Photo,
    pairs: list[QaPair],
    family: list[FamilyMember] | None = None,
) -> QuestionPlan:
    """Build the full plan: WHO, generated questions, open-ended closer.

    Kinds are assigned positionally (1st pair WHERE, 2nd WHEN, 3rd WHAT);
    pairs beyond the third are kept as extra WHAT items.
    """
    if len(pairs) < MIN_PAIRS:
        raise ParseError(
            f"need at least {MIN_PAIRS} pairs to assemble a plan", code="TOO_FEW_PAIRS"
        )
    items = [
        QaItem(
            kind=QaKind.WHO,
            question=WHO_QUESTION,
            expected_answer=who_expected_answer(photo, family),
        )
    ]
    for position, pair in enumerate(pairs):
        kind = _POSITIONAL_KINDS[position] if position < len(_POSITIONAL_KINDS) else QaKind.WHAT
        items.append(QaItem(kind=kind, question=pair.question, expected_answer=pair.answer))
    items.append(QaItem(kind=QaKind.OPEN, question=OPEN_QUESTION, expected_answer=""))
    return QuestionPlan(items=items, cursor=0)


def plan_from_items(photo: Photo, middle: list[QaItem], family: list[FamilyMember] | None = None) -> QuestionPlan:
    """Build a plan around pre-authored middle items (fixture/import path).

    Middle items keep their stated kinds and order; WHO and OPEN are still
    fixed so the plan shape invariant holds.
    """
    for item in middle:
        if item.kind in (QaKind.WHO, QaKind.OPEN):
            raise ValidationError(
                "middle plan items must not be WHO or OPEN", code="FIXTURE_INVALID"
            )
        if not item.expected_answer.strip():
            raise ValidationError(
                f"item {item.question!r} needs an expected answer", code="FIXTURE_INVALID"
            )
    items = [
        QaItem(
            kind=QaKind.WHO,
            question=WHO_QUESTION,
            expected_answer=who_expected_answer(photo, family),
        ),
        *(QaItem(kind=i.kind, question=i.question, expected_answer=i.expected_answer) for i in middle),
        QaItem(kind=QaKind.OPEN, question=OPEN_QUESTION, expected_answer=""),
    ]
    return QuestionPlan(items=items, cursor=0)


def generate_plan(photo: Photo, llm, family: list[FamilyMember] | None = None) -> QuestionPlan:
    """End-to-end generation: prompt, completion, parse, assemble."""
    from .llm import ChatMessage, MessageRole

    prompt = build_qa_prompt(photo)
    raw = llm.complete(
        [ChatMessage(MessageRole.SYSTEM, prompt)], temperature=0.7, max_tokens=600
    )
    pairs, _ = parse_qa_response(raw)
    return assemble_question_plan(photo, pairs, family)
