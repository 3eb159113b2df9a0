"""Goal-oriented flow controller.

Each round the model picks one of five actions for the chatbot:

* A/B judge the elder's answer (right/wrong) and move to the next question,
* C engages with an off-topic reply,
* D steers back: re-asks the open question of the moment, or offers a new
  photo when none remain,
* E closes the chat.

The engine constrains which actions are available as a function of the
option history: after a C only C/D/E remain, after too many consecutive Cs
only D/E, and a D (or an answered question) restores the full set. E is
never removed. Constraints are enforced twice: disallowed action lines are
stripped from the rendered prompt, and any disallowed choice the model
still makes is coerced (to D when possible, else E) and logged.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass
from enum import Enum

from .domain import (
    AgentOption,
    DialogueState,
    Phase,
    Photo,
    QaKind,
    QaStatus,
    QuestionPlan,
    Role,
    Turn,
    UserRecord,
    trailing_c_count,
)
from .errors import EngineError, ParseError, ProviderError
from .llm import ChatMessage, LlmProvider, MessageRole
from .prompts import load_template, render

logger = logging.getLogger(__name__)

DEFAULT_MAX_CONSECUTIVE_C = 2

OPEN_ANSWER_SLOT = "(open-ended)"
NO_NEXT_QUESTION_SLOT = "(none - offer a new photo)"

PARSE_RETRY_INSTRUCTION = (
    "Your reply could not be read. Answer again using exactly this format: "
    "option:<letter>, response: <your message>. The letter must be one of A, B, C, D, E."
)


@dataclass
class FlowConfig:
    max_consecutive_c: int = DEFAULT_MAX_CONSECUTIVE_C


class StepEffect(str, Enum):
    CONTINUE = "CONTINUE"  # A, B or C: conversation moves on
    REASK = "REASK"  # D with a question still unanswered
    OFFER_NEW_PHOTO = "OFFER_NEW_PHOTO"  # D with nothing left to ask
    FAREWELL = "FAREWELL"  # E


@dataclass
class AgentDecision:
    option: AgentOption
    response_text: str


@dataclass
class StepResult:
    message: str
    state: DialogueState
    effect: StepEffect
    option: AgentOption
    coerced: bool = False
    used_fallback: bool = False


def allowed_options(
    history: list[AgentOption],
    consecutive_c: int | None = None,
    *,
    max_consecutive_c: int = DEFAULT_MAX_CONSECUTIVE_C,
) -> set[AgentOption]:
    """Options the agent may pick next, given what it picked so far.

    consecutive_c is the length of the trailing all-C run; it is recomputed
    from the history when not supplied.
    """
    if consecutive_c is None:
        consecutive_c = trailing_c_count(history)
    last = history[-1] if history else None
    if last is AgentOption.C:
        if consecutive_c >= max_consecutive_c:
            return {AgentOption.D, AgentOption.E}
        return {AgentOption.C, AgentOption.D, AgentOption.E}
    return {AgentOption.A, AgentOption.B, AgentOption.C, AgentOption.E}


def verify_history(
    history: list[AgentOption], *, max_consecutive_c: int = DEFAULT_MAX_CONSECUTIVE_C
) -> int:
    """Count positions where an option fell outside its allowed set."""
    violations = 0
    for i, option in enumerate(history):
        if option not in allowed_options(history[:i], max_consecutive_c=max_consecutive_c):
            violations += 1
    return violations


def build_role_prompt(user: UserRecord, photo: Photo) -> str:
    return render(
        load_template("role_v1"),
        {
            "background": user.background,
            "profile": user.profile.render(),
            "image_description": photo.description,
        },
    )


def _prompt_item(plan: QuestionPlan):
    # Past-the-end cursor (open question already answered) keeps pointing at
    # the open item so the prompt stays coherent.
    index = min(plan.cursor, len(plan.items) - 1)
    return plan.items[index]


def build_flow_prompt(
    state: DialogueState,
    user_reply: str,
    *,
    config: FlowConfig | None = None,
) -> str:
    """Render the action-selection prompt for the current round.

    Action lines for disallowed options are removed and the format line
    lists only the allowed letters.
    """
    if state.phase not in (Phase.STRUCTURED, Phase.OPEN):
        raise EngineError("session is no longer accepting messages", code="SESSION_ENDED")
    config = config or FlowConfig()
    current = _prompt_item(state.plan)
    following = state.plan.next_pending()
    rendered = render(
        load_template("flow_v1"),
        {
            "q": current.question,
            "a": current.expected_answer if current.kind is not QaKind.OPEN else OPEN_ANSWER_SLOT,
            "reply": user_reply,
            "q_next": following.question if following else NO_NEXT_QUESTION_SLOT,
        },
    )
    allowed = allowed_options(
        state.option_history, state.consecutive_c, max_consecutive_c=config.max_consecutive_c
    )
    letters = [o.value for o in AgentOption if o in allowed]
    lines = []
    for line in rendered.splitlines():
        is_action_line = len(line) >= 2 and line[0] in "ABCDE" and line[1] == ":"
        if is_action_line and line[0] not in letters:
            continue
        if line.startswith("Response format:"):
            line = f"Response format: option:{'/'.join(letters)}, response: xxxx"
        lines.append(line)
    return "\n".join(lines)


_SEPARATORS = set(" \t\r\n:,=.*\"'()-")


def parse_agent_decision(raw: str) -> AgentDecision:
    """Extract the chosen option letter and the chat message from raw output."""
    lowered = raw.lower()
    option_at = lowered.find("option")
    if option_at < 0:
        raise ParseError("no option marker in agent output", code="UNPARSEABLE")
    i = option_at + len("option")
    while i < len(raw) and raw[i] in _SEPARATORS:
        i += 1
    if i >= len(raw) or raw[i].upper() not in "ABCDE":
        raise ParseError("no option letter in agent output", code="UNPARSEABLE")
    if i + 1 < len(raw) and raw[i + 1].isalpha():
        raise ParseError("option letter is part of a longer word", code="UNPARSEABLE")
    option = AgentOption(raw[i].upper())

    response_at = lowered.find("response", i + 1)
    if response_at < 0:
        raise ParseError("no response marker in agent output", code="UNPARSEABLE")
    text = raw[response_at + len("response"):]
    j = 0
    while j < len(text) and text[j] in ":,= \t\r\n\"'":
        j += 1
    text = text[j:].strip()
    # drop an unpaired trailing quote (JSON-ish output wraps the message)
    if text and text[-1] in "\"'" and text.count(text[-1]) % 2 == 1:
        text = text[:-1].strip()
    if not text:
        raise ParseError("empty response text in agent output", code="UNPARSEABLE")
    return AgentDecision(option=option, response_text=text)


def coerce_decision(decision: AgentDecision, allowed: set[AgentOption]) -> AgentDecision:
    """Force the decision into the allowed set; D preferred, E otherwise."""
    if decision.option in allowed:
        return decision
    replacement = AgentOption.D if AgentOption.D in allowed else AgentOption.E
    logger.warning(
        "coerced disallowed option %s -> %s (allowed: %s)",
        decision.option.value,
        replacement.value,
        "".join(sorted(o.value for o in allowed)),
    )
    return AgentDecision(option=replacement, response_text=decision.response_text)


def _append_turn(
    state: DialogueState,
    role: Role,
    text: str,
    option: AgentOption | None = None,
    question_kind: QaKind | None = None,
) -> Turn:
    if state.phase is Phase.ENDED:
        raise EngineError("session has ended", code="SESSION_ENDED")
    turn = Turn(
        index=len(state.turns) + 1,
        role=role,
        text=text,
        option=option,
        question_kind=question_kind,
    )
    state.turns.append(turn)
    return turn


def apply_option(state: DialogueState, decision: AgentDecision) -> tuple[DialogueState, StepEffect]:
    """Advance the state machine by one agent decision.

    The caller must have coerced the decision into the allowed set first;
    a disallowed option here is a programming error.
    """
    allowed = allowed_options(state.option_history, state.consecutive_c)
    if decision.option not in allowed:
        raise EngineError(
            f"option {decision.option.value} not allowed here", code="OPTION_NOT_ALLOWED"
        )

    option = decision.option
    question_kind: QaKind | None = None
    effect = StepEffect.CONTINUE

    if option in (AgentOption.A, AgentOption.B):
        current = state.plan.current()
        if current is not None:
            current.status = QaStatus.DONE
            state.plan.cursor += 1
        state.consecutive_c = 0
        advanced = state.plan.current()
        if advanced is not None:
            advanced.status = QaStatus.ASKED
            question_kind = advanced.kind
            if advanced.kind is QaKind.OPEN:
                state.phase = Phase.OPEN
    elif option is AgentOption.C:
        state.consecutive_c += 1
    elif option is AgentOption.D:
        state.consecutive_c = 0
        if state.phase is Phase.STRUCTURED:
            effect = StepEffect.REASK
            current = state.plan.current()
            question_kind = current.kind if current else None
        else:
            effect = StepEffect.OFFER_NEW_PHOTO
    else:  # E
        state.consecutive_c = 0
        effect = StepEffect.FAREWELL

    state.option_history.append(option)
    _append_turn(state, Role.CHATBOT, decision.response_text, option, question_kind)
    if option is AgentOption.E:
        state.phase = Phase.ENDED
    elif effect is StepEffect.OFFER_NEW_PHOTO:
        state.phase = Phase.SUMMARIZING
    _check_state(state)
    return state, effect


def _check_state(state: DialogueState) -> None:
    # Post-step self-checks; cheap enough to run unconditionally.
    if state.consecutive_c != trailing_c_count(state.option_history):
        raise EngineError(
            "consecutive-C counter diverged from option history", code="OPTION_NOT_ALLOWED"
        )
    if not 0 <= state.plan.cursor <= len(state.plan.items):
        raise EngineError("plan cursor out of range", code="OPTION_NOT_ALLOWED")


def start_session(
    session_id: str, user: UserRecord, photo: Photo, plan: QuestionPlan
) -> tuple[DialogueState, str]:
    """Open a session: the chatbot asks the WHO question, no option attached."""
    plan = copy.deepcopy(plan)
    plan.cursor = 0
    for item in plan.items:
        item.status = QaStatus.PENDING
    opening = plan.items[0]
    opening.status = QaStatus.ASKED
    state = DialogueState(
        session_id=session_id,
        user_id=user.user_id,
        photo_id=photo.photo_id,
        plan=plan,
    )
    _append_turn(state, Role.CHATBOT, opening.question, None, opening.kind)
    return state, opening.question


def end_session(state: DialogueState) -> DialogueState:
    """Caller-initiated close (UI end button, declined offer, cutoff)."""
    state.phase = Phase.ENDED
    return state


def record_offer_reply(state: DialogueState, text: str) -> DialogueState:
    """Log the elder's answer to a new-photo offer (session is summarizing)."""
    _append_turn(state, Role.ELDERLY, text)
    return state


def transcript_messages(state: DialogueState) -> list[ChatMessage]:
    """Turns as chat messages: chatbot speaks as assistant, elder as user."""
    role_map = {Role.CHATBOT: MessageRole.ASSISTANT, Role.ELDERLY: MessageRole.USER}
    return [ChatMessage(role_map[t.role], t.text) for t in state.turns]


def step(
    state: DialogueState,
    user_reply: str,
    llm: LlmProvider,
    *,
    user: UserRecord,
    photo: Photo,
    config: FlowConfig | None = None,
) -> StepResult:
    """One conversational round: elder speaks, agent decides, state advances.

    On unparseable model output the call is retried once with a corrective
    instruction, then falls back to a D decision that re-asks the current
    question (coerced like any other decision). Provider failures surface
    as LLM_UNAVAILABLE with the caller's state untouched.
    """
    if state.phase not in (Phase.STRUCTURED, Phase.OPEN):
        raise EngineError("session is no longer accepting messages", code="SESSION_ENDED")
    config = config or FlowConfig()
    state = copy.deepcopy(state)

    _append_turn(state, Role.ELDERLY, user_reply)
    if state.phase is Phase.OPEN:
        state.open_exchanges += 1

    flow_prompt = build_flow_prompt(state, user_reply, config=config)
    messages = [
        ChatMessage(MessageRole.SYSTEM, build_role_prompt(user, photo)),
        *transcript_messages(state),
        ChatMessage(MessageRole.USER, flow_prompt),
    ]

    used_fallback = False
    try:
        raw = llm.complete(messages)
    except ProviderError as exc:
        raise ProviderError(f"chat provider failed: {exc}", code="LLM_UNAVAILABLE") from exc
    try:
        decision = parse_agent_decision(raw)
    except ParseError:
        retry_messages = [
            *messages,
            ChatMessage(MessageRole.ASSISTANT, raw if raw.strip() else "(empty)"),
            ChatMessage(MessageRole.USER, PARSE_RETRY_INSTRUCTION),
        ]
        try:
            raw = llm.complete(retry_messages)
            decision = parse_agent_decision(raw)
        except ProviderError as exc:
            raise ProviderError(f"chat provider failed: {exc}", code="LLM_UNAVAILABLE") from exc
        except ParseError:
            used_fallback = True
            decision = AgentDecision(
                option=AgentOption.D, response_text=_prompt_item(state.plan).question
            )
            logger.warning("agent output unparseable twice; falling back to re-ask")

    allowed = allowed_options(
        state.option_history, state.consecutive_c, max_consecutive_c=config.max_consecutive_c
    )
    coerced_decision = coerce_decision(decision, allowed)
    state, effect = apply_option(state, coerced_decision)
    return StepResult(
        message=coerced_decision.response_text,
        state=state,
        effect=effect,
        option=coerced_decision.option,
        coerced=coerced_decision.option is not decision.option,
        used_fallback=used_fallback,
    )
