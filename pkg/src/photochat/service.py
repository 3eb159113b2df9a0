"""REST facade over the engine, store, and policies.

Caregiver workflows (users, photos, imports, summary review) and chat
sessions ride the same JSON API the web client uses. Sessions are
persisted after every step, so a restarted service resumes mid-chat from
the stored snapshot. Requests for one session are serialized by a
per-session lock; unrelated sessions proceed concurrently.
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Callable

from fastapi import Depends, FastAPI, File, Form, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .domain import (
    ChatSummary,
    FamilyMember,
    Phase,
    Photo,
    Profile,
    QaItem,
    QaKind,
    SummaryRecord,
    UserRecord,
    utc_now,
    validate_photo,
    validate_user,
)
from .engine import (
    FlowConfig,
    StepEffect,
    end_session,
    start_session,
    step,
)
from .errors import PhotoChatError, ParseError, ProviderError, ValidationError
from .faces import CaregiverTagMatcher, EmbeddingMatcher, identify_members
from .llm import LlmProvider, RemoteConfig, RemoteProvider
from .photos import mark_discussed, select_next_photo
from .qa import generate_plan, plan_from_items
from .sim import transcript_rows
from .store import Store
from .summary import apply_summary, should_summarize, summarize_session

logger = logging.getLogger(__name__)

_STATUS_BY_CODE = {
    "EMPTY_NAME": 400,
    "DUPLICATE_MEMBER": 400,
    "EMPTY_DESCRIPTION": 400,
    "EMPTY_CHAT": 400,
    "FIXTURE_INVALID": 400,
    "TOO_FEW_PAIRS": 400,
    "NO_PHOTOS": 400,
    "MATCHER_UNAVAILABLE": 400,
    "UNAUTHORIZED": 401,
    "NOT_FOUND": 404,
    "VERSION_CONFLICT": 409,
    "SESSION_ENDED": 410,
    "LLM_UNAVAILABLE": 502,
    "TIMEOUT": 502,
    "REMOTE_ERROR": 502,
    "SCRIPT_EXHAUSTED": 502,
}


@dataclass
class ServiceConfig:
    api_token: str | None = None
    embedding_dim: int = 128
    flow: FlowConfig = dataclass_field(default_factory=FlowConfig)
    open_exchange_threshold: int = 4
    clock: Callable[[], int] = utc_now
    static_dir: str | None = None  # serve the web client from here when set


class FamilyMemberBody(BaseModel):
    name: str
    relationship: str = ""
    embedding: list[float] | None = None


class ProfileBody(BaseModel):
    likes: list[str] = Field(default_factory=list)
    dislikes: list[str] = Field(default_factory=list)


class UserCreateBody(BaseModel):
    display_name: str
    background: str = ""
    profile: ProfileBody = Field(default_factory=ProfileBody)
    family: list[FamilyMemberBody] = Field(default_factory=list)


class ImportBody(BaseModel):
    text: str = ""
    messages: list[str] = Field(default_factory=list)


class QaItemBody(BaseModel):
    kind: str
    question: str
    answer: str


class SessionCreateBody(BaseModel):
    photo_id: str | None = None
    qa_items: list[QaItemBody] | None = None


class MessageBody(BaseModel):
    text: str


def _new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


class SessionManager:
    """Per-session serialization plus the step/summary orchestration."""

    def __init__(self, store: Store, provider: LlmProvider, config: ServiceConfig):
        self.store = store
        self.provider = provider
        self.config = config
        self._locks: dict[str, threading.Lock] = {}
        self._master = threading.Lock()

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._master:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def summary_id(self, session_id: str) -> str:
        return f"{session_id}-summary"

    def existing_summary(self, session_id: str) -> SummaryRecord | None:
        try:
            record, _ = self.store.get_summary(self.summary_id(session_id))
            return record
        except PhotoChatError:
            return None

    def run_summary(self, state, *, refresh: bool) -> SummaryRecord | None:
        existing = self.existing_summary(state.session_id)
        if existing is not None and not refresh:
            return existing
        user, user_version = self.store.get_user(state.user_id)
        record_id = self.summary_id(state.session_id)
        try:
            summary, _, raw = summarize_session(
                user, state, self.provider, created_at=self.config.clock()
            )
            record = SummaryRecord(
                summary_id=record_id,
                user_id=user.user_id,
                session_id=state.session_id,
                summary=summary,
                unparsed=False,
                raw_text=raw,
            )
            user = apply_summary(user, summary)
            self.store.put_user(user, expected_version=user_version)
        except ParseError as exc:
            # Keep the caregiver-visible history even when parsing fails;
            # the previous profile stays untouched.
            logger.warning("summary unparseable for %s: %s", state.session_id, exc)
            record = SummaryRecord(
                summary_id=record_id,
                user_id=user.user_id,
                session_id=state.session_id,
                summary=ChatSummary(
                    summary_text="",
                    new_profile=user.profile,
                    target_person=None,
                    photo_id=state.photo_id,
                    created_at=self.config.clock(),
                ),
                unparsed=True,
                raw_text=getattr(exc, "raw", None) or str(exc),
            )
        if existing is None:
            self.store.put_summary(record)
        else:
            _, version = self.store.get_summary(record_id)
            self.store.put_summary(record, expected_version=version)
        return record

    def try_summary(self, state, *, refresh: bool) -> SummaryRecord | None:
        """run_summary, but a dead provider must not fail the enclosing
        request: the step already happened, and the summary can be retried
        at session end."""
        try:
            return self.run_summary(state, refresh=refresh)
        except ProviderError as exc:
            logger.warning("summary pass skipped for %s: %s", state.session_id, exc)
            return self.existing_summary(state.session_id)

    def mark_photo_discussed(self, photo_id: str) -> None:
        photo, version = self.store.get_photo(photo_id)
        mark_discussed(photo, now=self.config.clock())
        self.store.put_photo(photo, expected_version=version)

    def propose_next_photo(self, state, target_person: str | None) -> dict[str, Any] | None:
        photos = self.store.list_photos(owner=state.user_id)
        alternatives = [p for p in photos if p.photo_id != state.photo_id] or photos
        try:
            chosen = select_next_photo(alternatives, target_person, now=self.config.clock())
        except PhotoChatError:
            return None
        return {
            "photo_id": chosen.photo_id,
            "description": chosen.description,
            "members_present": chosen.members_present,
        }


def create_app(
    store: Store, provider: LlmProvider, config: ServiceConfig | None = None
) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="photochat", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions = SessionManager(store, provider, config)

    @app.exception_handler(PhotoChatError)
    def domain_error_handler(request: Request, exc: PhotoChatError):
        status = _STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(status_code=status, content={"code": exc.code, "detail": str(exc)})

    def require_token(request: Request) -> None:
        if config.api_token is None:
            return
        header = request.headers.get("Authorization", "")
        if header != f"Bearer {config.api_token}":
            raise PhotoChatError("missing or invalid bearer token", code="UNAUTHORIZED")

    guarded = [Depends(require_token)]

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    # -- caregiver: users ----------------------------------------------------

    @app.post("/api/users", status_code=201, dependencies=guarded)
    def create_user(body: UserCreateBody):
        family = []
        for member in body.family:
            face_ref = None
            if member.embedding is not None:
                if len(member.embedding) != config.embedding_dim:
                    raise ValidationError(
                        f"member embedding must have {config.embedding_dim} numbers",
                        code="FIXTURE_INVALID",
                    )
                face_ref = _new_id("face")
                store.put_blob(face_ref, json.dumps(member.embedding).encode())
            family.append(
                FamilyMember(name=member.name, relationship=member.relationship, face_ref=face_ref)
            )
        user = UserRecord(
            user_id=_new_id("user"),
            display_name=body.display_name,
            background=body.background,
            profile=Profile(likes=body.profile.likes, dislikes=body.profile.dislikes),
            family=family,
        )
        validate_user(user)
        version = store.put_user(user)
        return {**user.to_dict(), "version": version}

    @app.get("/api/users/{user_id}", dependencies=guarded)
    def get_user(user_id: str):
        user, version = store.get_user(user_id)
        return {**user.to_dict(), "version": version}

    # -- caregiver: photos and imports ----------------------------------------

    @app.get("/api/users/{user_id}/photos", dependencies=guarded)
    def list_photos(user_id: str, member: str | None = None):
        store.get_user(user_id)
        return [p.to_dict() for p in store.list_photos(owner=user_id, member=member)]

    @app.post("/api/users/{user_id}/photos", status_code=201, dependencies=guarded)
    def upload_photo(
        user_id: str,
        description: str = Form(...),
        members: str = Form(""),
        embeddings: str = Form(""),
        image: UploadFile | None = File(None),
    ):
        user, _ = store.get_user(user_id)
        if not description.strip():
            raise ValidationError("photo description is required", code="EMPTY_DESCRIPTION")

        tags = _parse_members_field(members)
        matched = identify_members(None, user.family, CaregiverTagMatcher(tags)) if tags else []

        if embeddings.strip():
            photo_vectors = _parse_embeddings_field(embeddings, config.embedding_dim)
            member_vectors = {}
            for member in user.family:
                if member.face_ref and store.has_blob(member.face_ref):
                    member_vectors[member.name] = json.loads(store.get_blob(member.face_ref))
            if member_vectors:
                matcher = EmbeddingMatcher(photo_vectors, member_vectors)
                matched.extend(identify_members(None, user.family, matcher))

        names_seen: list[str] = []
        for name, _confidence in matched:
            if name not in names_seen:
                names_seen.append(name)

        photo = Photo(
            photo_id=_new_id("photo"),
            owner=user_id,
            uploaded_at=config.clock(),
            description=description,
            members_present=names_seen,
        )
        validate_photo(photo, user.member_names())
        if image is not None:
            store.put_blob(photo.photo_id, image.file.read())
        version = store.put_photo(photo)
        return {**photo.to_dict(), "version": version, "has_image": image is not None}

    @app.get("/api/photos/{photo_id}/image", dependencies=guarded)
    def get_photo_image(photo_id: str):
        store.get_photo(photo_id)
        return Response(content=store.get_blob(photo_id), media_type="application/octet-stream")

    @app.post("/api/users/{user_id}/imports/messages", status_code=201, dependencies=guarded)
    def import_messages(user_id: str, body: ImportBody):
        store.get_user(user_id)
        text = body.text.strip() or "\n".join(m.strip() for m in body.messages if m.strip())
        if not text:
            raise ValidationError("no imported text", code="EMPTY_DESCRIPTION")
        # Imported conversations enter the photo pool as fresh, imageless
        # topics, so the policy offers them when no new photo exists.
        topic = Photo(
            photo_id=_new_id("topic"),
            owner=user_id,
            uploaded_at=config.clock(),
            description=text,
            members_present=[],
        )
        version = store.put_photo(topic)
        return {**topic.to_dict(), "version": version, "has_image": False}

    # -- chat sessions ---------------------------------------------------------

    @app.post("/api/users/{user_id}/sessions", status_code=201, dependencies=guarded)
    def create_session(user_id: str, body: SessionCreateBody | None = None):
        body = body or SessionCreateBody()
        user, _ = store.get_user(user_id)
        if body.photo_id:
            photo, _version = store.get_photo(body.photo_id)
            if photo.owner != user_id:
                raise PhotoChatError("photo belongs to another user", code="NOT_FOUND")
        else:
            summaries = store.list_summaries(user_id)
            target = summaries[-1].summary.target_person if summaries else None
            photo = select_next_photo(store.list_photos(owner=user_id), target)
        if body.qa_items:
            middle = [
                QaItem(kind=QaKind(i.kind), question=i.question, expected_answer=i.answer)
                for i in body.qa_items
            ]
            plan = plan_from_items(photo, middle, user.family)
        else:
            plan = generate_plan(photo, provider, user.family)
        state, opening = start_session(_new_id("session"), user, photo, plan)
        store.put_session(state)
        return {
            "session_id": state.session_id,
            "photo": photo.to_dict(),
            "opening_question": opening,
            "phase": state.phase.value,
        }

    @app.post("/api/sessions/{session_id}/messages", dependencies=guarded)
    def post_message(session_id: str, body: MessageBody):
        if not body.text.strip():
            raise ValidationError("message text is empty", code="EMPTY_NAME")
        with sessions.lock_for(session_id):
            state, version = store.get_session(session_id)
            user, _ = store.get_user(state.user_id)
            photo, _ = store.get_photo(state.photo_id)
            was_active = state.phase in (Phase.STRUCTURED, Phase.OPEN)
            result = step(
                state, body.text, provider, user=user, photo=photo, config=config.flow
            )
            state = result.state
            store.put_session(state, expected_version=version)

            response: dict[str, Any] = {
                "session_id": session_id,
                "message": result.message,
                "option": result.option.value,
                "phase": state.phase.value,
                "effect": result.effect.value,
                "round": state.turns[-1].index,
                "coerced": result.coerced,
            }
            if was_active and state.phase not in (Phase.STRUCTURED, Phase.OPEN):
                sessions.mark_photo_discussed(state.photo_id)
            if should_summarize(state, open_exchange_threshold=config.open_exchange_threshold):
                terminal = state.phase in (Phase.SUMMARIZING, Phase.ENDED)
                record = sessions.try_summary(state, refresh=terminal)
                if record is not None and not record.unparsed:
                    response["summary"] = record.to_dict()
            if result.effect is StepEffect.OFFER_NEW_PHOTO:
                record = sessions.existing_summary(session_id)
                target = record.summary.target_person if record and not record.unparsed else None
                proposal = sessions.propose_next_photo(state, target)
                if proposal is not None:
                    response["proposal"] = proposal
            return response

    @app.post("/api/sessions/{session_id}/end", dependencies=guarded)
    def end_session_endpoint(session_id: str):
        with sessions.lock_for(session_id):
            state, version = store.get_session(session_id)
            was_active = state.phase in (Phase.STRUCTURED, Phase.OPEN)
            if state.phase is not Phase.ENDED:
                end_session(state)
                store.put_session(state, expected_version=version)
            if was_active:
                sessions.mark_photo_discussed(state.photo_id)
            record = None
            if should_summarize(state, open_exchange_threshold=config.open_exchange_threshold):
                record = sessions.try_summary(state, refresh=was_active)
            return {
                "session_id": session_id,
                "phase": state.phase.value,
                "summary": record.to_dict() if record else None,
            }

    @app.get("/api/sessions/{session_id}", dependencies=guarded)
    def get_session(session_id: str):
        state, _ = store.get_session(session_id)
        return {
            "session_id": state.session_id,
            "user_id": state.user_id,
            "photo_id": state.photo_id,
            "phase": state.phase.value,
            "option_history": [o.value for o in state.option_history],
            "open_exchanges": state.open_exchanges,
            "rounds": transcript_rows(state),
        }

    @app.get("/api/users/{user_id}/summaries", dependencies=guarded)
    def list_summaries(user_id: str):
        store.get_user(user_id)
        return [r.to_dict() for r in store.list_summaries(user_id)]

    if config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def _parse_members_field(raw: str) -> list[str]:
    raw = raw.strip()
    if not raw:
        return []
    if raw.startswith("["):
        try:
            parsed = json.loads(raw)
        except ValueError:
            raise ValidationError("members must be JSON array or comma-separated", code="FIXTURE_INVALID")
        return [str(item) for item in parsed]
    return [piece.strip() for piece in raw.split(",") if piece.strip()]


def _parse_embeddings_field(raw: str, dim: int) -> list[list[float]]:
    try:
        parsed = json.loads(raw)
    except ValueError:
        raise ValidationError("embeddings must be a JSON array of arrays", code="FIXTURE_INVALID")
    if not isinstance(parsed, list) or not all(isinstance(v, list) for v in parsed):
        raise ValidationError("embeddings must be a JSON array of arrays", code="FIXTURE_INVALID")
    vectors = [[float(x) for x in v] for v in parsed]
    for vector in vectors:
        if len(vector) != dim:
            raise ValidationError(
                f"each embedding must have {dim} numbers", code="FIXTURE_INVALID"
            )
    return vectors


def create_app_from_env() -> FastAPI:
    import os

    store = Store.from_env()
    provider: LlmProvider
    script = os.environ.get("CHAT_SCRIPT", "")
    if script:
        from .llm import ScriptedProvider

        provider = ScriptedProvider.from_file(script)
    else:
        provider = RemoteProvider(RemoteConfig.from_env())
    static_dir = os.environ.get("UI_DIR") or None
    if static_dir and not os.path.isdir(static_dir):
        logger.warning("UI_DIR %s does not exist; serving API only", static_dir)
        static_dir = None
    config = ServiceConfig(api_token=os.environ.get("API_TOKEN") or None, static_dir=static_dir)
    return create_app(store, provider, config)
