"""Error hierarchy shared across the package.

Every exception carries a stable ``code`` string so callers (REST layer,
CLI, tests) can branch on the failure class without parsing messages.
"""

from __future__ import annotations


class PhotoChatError(Exception):
    """Base class; ``code`` identifies the failure kind."""

    code = "ERROR"

    def __init__(self, message: str = "", *, code: str | None = None):
        super().__init__(message or self.__class__.code)
        if code is not None:
            self.code = code


class ValidationError(PhotoChatError):
    """Malformed caregiver or client input.

    Codes: DUPLICATE_MEMBER, EMPTY_NAME, EMPTY_DESCRIPTION, FIXTURE_INVALID.
    """

    code = "VALIDATION"


class ParseError(PhotoChatError):
    """Model output that cannot be turned into a structured value.

    Codes: TOO_FEW_PAIRS, UNPARSEABLE, MISSING_BLOCK.
    """

    code = "PARSE"


class EngineError(PhotoChatError):
    """Dialogue-engine contract violations.

    Codes: SESSION_ENDED, OPTION_NOT_ALLOWED.
    """

    code = "ENGINE"


class ProviderError(PhotoChatError):
    """Chat-completion provider failures.

    Codes: TIMEOUT, REMOTE_ERROR, SCRIPT_EXHAUSTED, LLM_UNAVAILABLE.
    """

    code = "PROVIDER"

    def __init__(
        self,
        message: str = "",
        *,
        code: str | None = None,
        status: int | None = None,
        body: str | None = None,
    ):
        super().__init__(message, code=code)
        self.status = status
        self.body = body


class PolicyError(PhotoChatError):
    """Photo-policy failures. Codes: NO_PHOTOS."""

    code = "POLICY"


class MatcherError(PhotoChatError):
    """Face-identity adapter failures. Codes: MATCHER_UNAVAILABLE."""

    code = "MATCHER_UNAVAILABLE"


class StoreError(PhotoChatError):
    """Persistence failures. Codes: NOT_FOUND, VERSION_CONFLICT, STORAGE_IO."""

    code = "STORE"
