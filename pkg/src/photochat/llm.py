"""Chat-completion providers behind one interface.

Three implementations:

* RemoteProvider: HTTP client for any chat-completion endpoint speaking the
  de-facto JSON schema (messages in, choices[0].message.content out).
* ScriptedProvider: deterministic fixture playback keyed by call order;
  drives offline replay tests and CI.
* persona_reply: turns any provider into a simulated elderly user by
  swapping transcript roles under a persona system prompt.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Protocol, Sequence

import httpx

from .errors import ProviderError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.7
SUMMARY_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 600


class MessageRole(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass
class ChatMessage:
    role: MessageRole
    content: str

    def to_wire(self) -> dict[str, str]:
        return {"role": self.role.value, "content": self.content}


def validate_messages(messages: Sequence[ChatMessage]) -> None:
    if not messages:
        raise ValidationError("messages must be non-empty", code="FIXTURE_INVALID")
    if messages[0].role is not MessageRole.SYSTEM:
        raise ValidationError("first message must be the system prompt", code="FIXTURE_INVALID")
    for message in messages:
        if message.role is not MessageRole.SYSTEM and not message.content.strip():
            raise ValidationError("user/assistant content must be non-empty", code="FIXTURE_INVALID")


class LlmProvider(Protocol):
    def complete(
        self,
        messages: Sequence[ChatMessage],
        *,
        temperature: float = DEFAULT_TEMPERATURE,
        max_tokens: int = DEFAULT_MAX_TOKENS,
    ) -> str: ...


@dataclass
class RemoteConfig:
    url: str
    api_key: str = ""
    model: str = ""
    timeout_secs: float = 30.0
    backoff_secs: float = 0.5  # doubled on the single retry

    @classmethod
    def from_env(cls) -> "RemoteConfig":
        url = os.environ.get("CHAT_API_URL", "")
        if not url:
            raise ValidationError("CHAT_API_URL is not configured", code="FIXTURE_INVALID")
        return cls(
            url=url,
            api_key=os.environ.get("CHAT_API_KEY", ""),
            model=os.environ.get("CHAT_MODEL", ""),
            timeout_secs=float(os.environ.get("CHAT_TIMEOUT_SECS", "30")),
        )


class RemoteProvider:
    """HTTP chat-completion client: bearer auth, bounded timeout, one retry."""

    def __init__(self, config: RemoteConfig):
        self.config = config

    def complete(
        self,
        messages: Sequence[ChatMessage],
        *,
        temperature: float = DEFAULT_TEMPERATURE,
        max_tokens: int = DEFAULT_MAX_TOKENS,
    ) -> str:
        validate_messages(messages)
        body = {
            "model": self.config.model,
            "messages": [m.to_wire() for m in messages],
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"

        last_error: ProviderError | None = None
        for attempt in range(2):
            if attempt:
                time.sleep(self.config.backoff_secs * (2 ** (attempt - 1)))
            try:
                response = httpx.post(
                    self.config.url,
                    json=body,
                    headers=headers,
                    timeout=self.config.timeout_secs,
                )
            except httpx.TimeoutException:
                last_error = ProviderError(
                    f"chat endpoint timed out after {self.config.timeout_secs}s",
                    code="TIMEOUT",
                )
                continue
            except httpx.HTTPError as exc:
                last_error = ProviderError(f"chat endpoint unreachable: {exc}", code="TIMEOUT")
                continue
            if response.status_code != 200:
                last_error = ProviderError(
                    f"chat endpoint returned {response.status_code}",
                    code="REMOTE_ERROR",
                    status=response.status_code,
                    body=response.text[:200],
                )
                continue
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError):
                last_error = ProviderError(
                    "malformed completion payload",
                    code="REMOTE_ERROR",
                    status=response.status_code,
                    body=response.text[:200],
                )
        assert last_error is not None
        raise last_error


class ScriptedProvider:
    """Plays back a fixed response list, one per call, in order.

    Script files hold one utterance per line; a literal ``\\n`` inside a
    line expands to a newline so multi-line fixtures (summary responses)
    still fit the one-utterance-per-line format.
    """

    def __init__(self, responses: Sequence[str]):
        self.responses = list(responses)
        self.cursor = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedProvider":
        lines = Path(path).read_text("utf-8").splitlines()
        return cls([line.replace("\\n", "\n") for line in lines if line.strip()])

    def complete(
        self,
        messages: Sequence[ChatMessage],
        *,
        temperature: float = DEFAULT_TEMPERATURE,
        max_tokens: int = DEFAULT_MAX_TOKENS,
    ) -> str:
        validate_messages(messages)
        if self.cursor >= len(self.responses):
            raise ProviderError(
                f"script exhausted after {len(self.responses)} responses",
                code="SCRIPT_EXHAUSTED",
            )
        response = self.responses[self.cursor]
        self.cursor += 1
        return response


@dataclass
class PersonaConfig:
    """Simulated elderly user: interests, conversational tendencies."""

    persona_prompt: str
    max_rounds: int = 20

    def validate(self) -> "PersonaConfig":
        if self.max_rounds < 1:
            raise ValidationError("max_rounds must be >= 1", code="FIXTURE_INVALID")
        return self


DEFAULT_PERSONA_PROMPT = (
    "You are role-playing an elderly person chatting with a companion about a family photo. "
    "You love talking about your grandson and often drift to side topics before answering. "
    "Keep replies to one or two warm, informal sentences."
)


def swap_roles(transcript: Sequence[ChatMessage]) -> list[ChatMessage]:
    """Exchange user/assistant roles; system messages pass through.

    Applying it twice restores the original transcript.
    """
    flipped = {MessageRole.USER: MessageRole.ASSISTANT, MessageRole.ASSISTANT: MessageRole.USER}
    return [
        ChatMessage(flipped.get(m.role, m.role), m.content) for m in transcript
    ]


def persona_reply(
    config: PersonaConfig,
    transcript: Sequence[ChatMessage],
    llm: LlmProvider,
    *,
    temperature: float = DEFAULT_TEMPERATURE,
) -> str:
    """Next utterance of the simulated elder.

    The chatbot's lines become user input to the persona model, and the
    elder's own lines become its assistant history.
    """
    if not transcript or transcript[-1].role is not MessageRole.ASSISTANT:
        raise ValidationError(
            "persona replies only to a chatbot message", code="FIXTURE_INVALID"
        )
    messages = [ChatMessage(MessageRole.SYSTEM, config.persona_prompt)]
    messages.extend(m for m in swap_roles(transcript) if m.role is not MessageRole.SYSTEM)
    return llm.complete(messages, temperature=temperature)


@dataclass
class RecordingProvider:
    """Wraps a provider and keeps the exchanged messages; test/debug aid."""

    inner: LlmProvider
    calls: list[tuple[list[ChatMessage], str]] = field(default_factory=list)

    def complete(
        self,
        messages: Sequence[ChatMessage],
        *,
        temperature: float = DEFAULT_TEMPERATURE,
        max_tokens: int = DEFAULT_MAX_TOKENS,
    ) -> str:
        response = self.inner.complete(messages, temperature=temperature, max_tokens=max_tokens)
        self.calls.append((list(messages), response))
        return response
