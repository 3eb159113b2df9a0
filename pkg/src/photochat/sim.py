"""Simulation harness: chatbot vs. simulated elder, with flow metrics.

Runs one photo's conversation to completion (farewell, new-photo offer, or
round cutoff), then the summary pass, and reports the transcript in the
round/role/question/choice/message shape along with an option histogram,
the longest C run, the constraint-violation count (always expected to be
zero) and the coercion count. With scripted providers and a fixed start
time the report is byte-identical across runs.
"""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .domain import (
    AgentOption,
    DialogueState,
    Photo,
    Profile,
    QaItem,
    QaKind,
    UserRecord,
    validate_photo,
    validate_user,
)
from .engine import (
    FlowConfig,
    StepEffect,
    end_session,
    record_offer_reply,
    start_session,
    step,
    transcript_messages,
    verify_history,
)
from .errors import ParseError, ProviderError, ValidationError
from .llm import LlmProvider, PersonaConfig, persona_reply
from .qa import generate_plan, plan_from_items
from .summary import apply_summary, should_summarize, summarize_session

logger = logging.getLogger(__name__)

ROLE_LABELS = {"CHATBOT": "Chatbot", "ELDERLY": "Elderly"}


@dataclass
class SimulationReport:
    transcript: list[dict[str, Any]]
    option_histogram: dict[str, int]
    max_consecutive_c: int
    constraint_violations: int
    coercions: int
    fallbacks: int
    rounds: int
    final_phase: str
    offer_made: bool
    offer_reply: str | None
    summary: dict[str, Any] | None
    profile_before: dict[str, Any]
    profile_after: dict[str, Any]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "transcript": self.transcript,
            "option_histogram": self.option_histogram,
            "max_consecutive_c": self.max_consecutive_c,
            "constraint_violations": self.constraint_violations,
            "coercions": self.coercions,
            "fallbacks": self.fallbacks,
            "rounds": self.rounds,
            "final_phase": self.final_phase,
            "offer_made": self.offer_made,
            "offer_reply": self.offer_reply,
            "summary": self.summary,
            "profile_before": self.profile_before,
            "profile_after": self.profile_after,
            "warnings": self.warnings,
        }


def load_user_fixture(path: str | Path) -> UserRecord:
    data = _load_json(path)
    try:
        user = UserRecord.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad user fixture {path}: {exc}", code="FIXTURE_INVALID")
    return validate_user(user)


def load_photo_fixture(path: str | Path, owner: str) -> tuple[Photo, list[QaItem] | None]:
    data = _load_json(path)
    try:
        photo = Photo(
            photo_id=data.get("photo_id", "photo-fixture"),
            owner=data.get("owner", owner),
            uploaded_at=data.get("uploaded_at", 0),
            description=data["description"],
            members_present=list(data.get("members_present", [])),
            last_discussed_at=data.get("last_discussed_at"),
            discussed_count=data.get("discussed_count", 0),
        )
        middle = None
        if "qa_items" in data:
            middle = [
                QaItem(kind=QaKind(item["kind"]), question=item["question"], expected_answer=item["answer"])
                for item in data["qa_items"]
            ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad photo fixture {path}: {exc}", code="FIXTURE_INVALID")
    return photo, middle


def load_persona_fixture(path: str | Path) -> PersonaConfig:
    data = _load_json(path)
    try:
        config = PersonaConfig(
            persona_prompt=data["persona_prompt"], max_rounds=data.get("max_rounds", 20)
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad persona fixture {path}: {exc}", code="FIXTURE_INVALID")
    return config.validate()


def _load_json(path: str | Path) -> dict[str, Any]:
    try:
        return json.loads(Path(path).read_text("utf-8"))
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot load fixture {path}: {exc}", code="FIXTURE_INVALID")


def _histogram(history: list[AgentOption]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for option in history:
        counts[option.value] = counts.get(option.value, 0) + 1
    return dict(sorted(counts.items()))


def _max_c_run(history: list[AgentOption]) -> int:
    best = run = 0
    for option in history:
        run = run + 1 if option is AgentOption.C else 0
        best = max(best, run)
    return best


def transcript_rows(state: DialogueState) -> list[dict[str, Any]]:
    return [
        {
            "round": t.index,
            "role": ROLE_LABELS[t.role.value],
            "question": t.question_kind.value if t.question_kind else "",
            "option": t.option.value if t.option else "",
            "message": t.text,
        }
        for t in state.turns
    ]


def run_simulation(
    user: UserRecord,
    photo: Photo,
    persona: PersonaConfig,
    chatbot_provider: LlmProvider,
    persona_provider: LlmProvider,
    *,
    flow_config: FlowConfig | None = None,
    plan_items: list[QaItem] | None = None,
    start_time: int = 0,
    session_id: str = "sim-session",
) -> SimulationReport:
    """Alternate engine steps and persona replies until the chat concludes."""
    persona.validate()
    user = validate_user(copy.deepcopy(user))
    validate_photo(photo, user.member_names())
    flow_config = flow_config or FlowConfig()

    if plan_items:
        plan = plan_from_items(photo, plan_items, user.family)
    else:
        plan = generate_plan(photo, chatbot_provider, user.family)

    profile_before = user.profile.to_dict()
    state, _ = start_session(session_id, user, photo, plan)

    coercions = fallbacks = 0
    warnings: list[str] = []
    effect: StepEffect | None = None
    replies = 0
    while replies < persona.max_rounds:
        user_text = persona_reply(persona, transcript_messages(state), persona_provider)
        result = step(state, user_text, chatbot_provider, user=user, photo=photo, config=flow_config)
        state = result.state
        replies += 1
        coercions += int(result.coerced)
        fallbacks += int(result.used_fallback)
        effect = result.effect
        if effect in (StepEffect.OFFER_NEW_PHOTO, StepEffect.FAREWELL):
            break
    else:
        end_session(state)
        logger.info("simulation cut off after %d rounds", replies)

    summary_dict: dict[str, Any] | None = None
    user_after = user
    if should_summarize(state):
        try:
            summary, summary_warnings, _ = summarize_session(
                user, state, chatbot_provider, created_at=start_time
            )
            warnings.extend(summary_warnings)
            user_after = apply_summary(user, summary)
            summary_dict = {
                "summary_text": summary.summary_text,
                "new_profile": summary.new_profile.to_dict(),
                "target_person": summary.target_person,
                "unparsed": False,
            }
        except (ParseError, ProviderError) as exc:
            warnings.append(f"summary failed: {exc}")
            summary_dict = {"summary_text": "", "new_profile": None, "target_person": None, "unparsed": True}

    offer_reply: str | None = None
    if effect is StepEffect.OFFER_NEW_PHOTO:
        try:
            offer_reply = persona_reply(persona, transcript_messages(state), persona_provider)
            record_offer_reply(state, offer_reply)
        except ProviderError:
            pass  # persona script ended exactly at the offer

    return SimulationReport(
        transcript=transcript_rows(state),
        option_histogram=_histogram(state.option_history),
        max_consecutive_c=_max_c_run(state.option_history),
        constraint_violations=verify_history(
            state.option_history, max_consecutive_c=flow_config.max_consecutive_c
        ),
        coercions=coercions,
        fallbacks=fallbacks,
        rounds=len(state.turns),
        final_phase=state.phase.value,
        offer_made=effect is StepEffect.OFFER_NEW_PHOTO,
        offer_reply=offer_reply,
        summary=summary_dict,
        profile_before=profile_before,
        profile_after=user_after.profile.to_dict(),
        warnings=warnings,
    )


def _format_text(report: SimulationReport) -> str:
    headers = ("Round", "Role", "Question", "Choice", "Message")
    rows = [
        (str(r["round"]), r["role"], r["question"], r["option"], r["message"])
        for r in report.transcript
    ]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in rows)) if rows else len(headers[i])
        for i in range(4)
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers[:4])) + "  " + headers[4],
        "  ".join("-" * widths[i] for i in range(4)) + "  " + "-" * len(headers[4]),
    ]
    for row in rows:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(4)) + "  " + row[4])
    lines.append("")
    lines.append(f"options: {report.option_histogram}")
    lines.append(f"max consecutive C: {report.max_consecutive_c}")
    lines.append(f"constraint violations: {report.constraint_violations}")
    lines.append(f"coercions: {report.coercions}  fallbacks: {report.fallbacks}")
    lines.append(f"final phase: {report.final_phase}  offer made: {report.offer_made}")
    if report.summary and not report.summary.get("unparsed"):
        profile = Profile.from_dict(report.summary["new_profile"])
        lines.append(f"summary: {report.summary['summary_text']}")
        lines.append(f"new profile: {profile.render()}")
        lines.append(f"target person: {report.summary['target_person'] or '(none)'}")
    elif report.summary:
        lines.append("summary: (unparsed; raw text stored)")
    return "\n".join(lines) + "\n"


def emit_report(report: SimulationReport, format: str = "text") -> str:
    """Render a report: a readable grid, or stable-ordered JSON for diffing."""
    if format == "json":
        return json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if format == "text":
        return _format_text(report)
    raise ValidationError(f"unknown report format: {format}", code="FIXTURE_INVALID")
