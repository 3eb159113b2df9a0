"""Goal-oriented reminiscence chatbot for family-photo conversations.

The package splits into:

* domain, qa, engine, summary, photos: the conversational core
  (types, question generation, flow control, summaries, photo policy);
* llm, faces, store: gateways and plumbing (providers, identity
  matching, file persistence);
* service, sim, cli: the REST facade and the simulation harness.
"""

from .domain import (
    AgentOption,
    ChatSummary,
    DialogueState,
    FamilyMember,
    Phase,
    Photo,
    Profile,
    QaItem,
    QaKind,
    QaStatus,
    QuestionPlan,
    Role,
    SummaryRecord,
    Turn,
    UserRecord,
    validate_user,
)
from .engine import (
    AgentDecision,
    FlowConfig,
    StepEffect,
    StepResult,
    allowed_options,
    apply_option,
    build_flow_prompt,
    build_role_prompt,
    coerce_decision,
    parse_agent_decision,
    start_session,
    step,
)
from .errors import (
    EngineError,
    MatcherError,
    ParseError,
    PhotoChatError,
    PolicyError,
    ProviderError,
    StoreError,
    ValidationError,
)
from .llm import ChatMessage, MessageRole, PersonaConfig, RemoteProvider, ScriptedProvider, persona_reply
from .photos import mark_discussed, select_next_photo
from .qa import QaPair, assemble_question_plan, build_qa_prompt, parse_qa_response
from .store import Store
from .summary import apply_summary, build_summary_prompt, parse_summary_response, should_summarize

__version__ = "0.1.0"

__all__ = [
    "AgentDecision",
    "AgentOption",
    "ChatMessage",
    "ChatSummary",
    "DialogueState",
    "EngineError",
    "FamilyMember",
    "FlowConfig",
    "MatcherError",
    "MessageRole",
    "ParseError",
    "PersonaConfig",
    "Phase",
    "Photo",
    "PhotoChatError",
    "PolicyError",
    "Profile",
    "ProviderError",
    "QaItem",
    "QaKind",
    "QaPair",
    "QaStatus",
    "QuestionPlan",
    "RemoteProvider",
    "Role",
    "ScriptedProvider",
    "StepEffect",
    "StepResult",
    "Store",
    "StoreError",
    "SummaryRecord",
    "Turn",
    "UserRecord",
    "ValidationError",
    "allowed_options",
    "apply_option",
    "apply_summary",
    "assemble_question_plan",
    "build_flow_prompt",
    "build_qa_prompt",
    "build_role_prompt",
    "build_summary_prompt",
    "coerce_decision",
    "mark_discussed",
    "parse_agent_decision",
    "parse_qa_response",
    "parse_summary_response",
    "persona_reply",
    "select_next_photo",
    "should_summarize",
    "start_session",
    "step",
    "validate_user",
]
