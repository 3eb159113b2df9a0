"""File-backed store for users, photos (metadata + blobs), sessions, summaries.

One directory per record kind, one UTF-8 JSON document per record, plus a
blobs/ directory for raw photo bytes. Documents carry a schema_version and
a per-record version counter used for compare-and-swap updates. Writes go
to a temp file followed by an atomic rename.

Concurrency contract: safe for concurrent readers/writers within one
process (per-record locking + CAS); multi-process access is not supported.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from pathlib import Path
from typing import Any, Iterator

from .domain import DialogueState, Photo, SummaryRecord, UserRecord, norm_key
from .errors import StoreError

SCHEMA_VERSION = 1

KIND_USERS = "users"
KIND_PHOTOS = "photos"
KIND_SESSIONS = "sessions"
KIND_SUMMARIES = "summaries"
_KINDS = (KIND_USERS, KIND_PHOTOS, KIND_SESSIONS, KIND_SUMMARIES)


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        try:
            for kind in _KINDS:
                (self.root / kind).mkdir(parents=True, exist_ok=True)
            (self.root / "blobs").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StoreError(f"cannot initialize store at {root}: {exc}", code="STORAGE_IO")
        self._master_lock = threading.Lock()
        self._record_locks: dict[tuple[str, str], threading.Lock] = {}

    @classmethod
    def from_env(cls) -> "Store":
        return cls(os.environ.get("DATA_DIR", "./data"))

    # -- generic record plumbing -------------------------------------------

    def _lock_for(self, kind: str, record_id: str) -> threading.Lock:
        key = (kind, record_id)
        with self._master_lock:
            if key not in self._record_locks:
                self._record_locks[key] = threading.Lock()
            return self._record_locks[key]

    def _path(self, kind: str, record_id: str) -> Path:
        if not record_id or "/" in record_id or record_id.startswith("."):
            raise StoreError(f"malformed record id: {record_id!r}", code="STORAGE_IO")
        return self.root / kind / f"{record_id}.json"

    def _read(self, kind: str, record_id: str) -> dict[str, Any]:
        path = self._path(kind, record_id)
        try:
            raw = path.read_text("utf-8")
        except FileNotFoundError:
            raise StoreError(f"{kind[:-1]} {record_id} not found", code="NOT_FOUND")
        except OSError as exc:
            raise StoreError(f"cannot read {path}: {exc}", code="STORAGE_IO")
        try:
            return json.loads(raw)
        except ValueError as exc:
            raise StoreError(f"corrupt record {path}: {exc}", code="STORAGE_IO")

    def _write_atomic(self, path: Path, document: dict[str, Any]) -> None:
        try:
            fd, temp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(document, handle, ensure_ascii=False, indent=0)
            os.replace(temp_name, path)
        except OSError as exc:
            raise StoreError(f"cannot write {path}: {exc}", code="STORAGE_IO")

    def put(
        self,
        kind: str,
        record_id: str,
        data: dict[str, Any],
        expected_version: int | None = None,
    ) -> int:
        """Create (expected_version None) or CAS-update a record.

        Returns the new version. Raises VERSION_CONFLICT when the record
        already exists on create, or when the stored version moved.
        """
        path = self._path(kind, record_id)
        with self._lock_for(kind, record_id):
            current_version = 0
            if path.exists():
                current_version = self._read(kind, record_id).get("version", 0)
                if expected_version is None:
                    raise StoreError(
                        f"{kind[:-1]} {record_id} already exists", code="VERSION_CONFLICT"
                    )
            if expected_version is not None and expected_version != current_version:
                raise StoreError(
                    f"{kind[:-1]} {record_id}: version {expected_version} is stale "
                    f"(current {current_version})",
                    code="VERSION_CONFLICT",
                )
            new_version = current_version + 1
            self._write_atomic(
                path,
                {
                    "schema_version": SCHEMA_VERSION,
                    "version": new_version,
                    "kind": kind,
                    "data": data,
                },
            )
            return new_version

    def get(self, kind: str, record_id: str) -> tuple[dict[str, Any], int]:
        document = self._read(kind, record_id)
        return document["data"], document.get("version", 0)

    def delete(self, kind: str, record_id: str) -> None:
        path = self._path(kind, record_id)
        with self._lock_for(kind, record_id):
            try:
                path.unlink()
            except FileNotFoundError:
                raise StoreError(f"{kind[:-1]} {record_id} not found", code="NOT_FOUND")
            except OSError as exc:
                raise StoreError(f"cannot delete {path}: {exc}", code="STORAGE_IO")

    def _iter_kind(self, kind: str) -> Iterator[dict[str, Any]]:
        for path in sorted((self.root / kind).glob("*.json")):
            try:
                yield json.loads(path.read_text("utf-8"))["data"]
            except (OSError, ValueError, KeyError) as exc:
                raise StoreError(f"corrupt record {path}: {exc}", code="STORAGE_IO")

    # -- typed helpers ------------------------------------------------------

    def put_user(self, user: UserRecord, expected_version: int | None = None) -> int:
        return self.put(KIND_USERS, user.user_id, user.to_dict(), expected_version)

    def get_user(self, user_id: str) -> tuple[UserRecord, int]:
        data, version = self.get(KIND_USERS, user_id)
        return UserRecord.from_dict(data), version

    def list_users(self) -> list[UserRecord]:
        return [UserRecord.from_dict(d) for d in self._iter_kind(KIND_USERS)]

    def put_photo(self, photo: Photo, expected_version: int | None = None) -> int:
        return self.put(KIND_PHOTOS, photo.photo_id, photo.to_dict(), expected_version)

    def get_photo(self, photo_id: str) -> tuple[Photo, int]:
        data, version = self.get(KIND_PHOTOS, photo_id)
        return Photo.from_dict(data), version

    def list_photos(self, owner: str | None = None, member: str | None = None) -> list[Photo]:
        photos = [Photo.from_dict(d) for d in self._iter_kind(KIND_PHOTOS)]
        if owner is not None:
            photos = [p for p in photos if p.owner == owner]
        if member is not None:
            member_key = norm_key(member)
            photos = [
                p for p in photos if any(norm_key(n) == member_key for n in p.members_present)
            ]
        return photos

    def put_session(self, state: DialogueState, expected_version: int | None = None) -> int:
        return self.put(KIND_SESSIONS, state.session_id, state.to_dict(), expected_version)

    def get_session(self, session_id: str) -> tuple[DialogueState, int]:
        data, version = self.get(KIND_SESSIONS, session_id)
        return DialogueState.from_dict(data), version

    def put_summary(self, record: SummaryRecord, expected_version: int | None = None) -> int:
        return self.put(KIND_SUMMARIES, record.summary_id, record.to_dict(), expected_version)

    def get_summary(self, summary_id: str) -> tuple[SummaryRecord, int]:
        data, version = self.get(KIND_SUMMARIES, summary_id)
        return SummaryRecord.from_dict(data), version

    def list_summaries(self, user_id: str | None = None) -> list[SummaryRecord]:
        records = [SummaryRecord.from_dict(d) for d in self._iter_kind(KIND_SUMMARIES)]
        if user_id is not None:
            records = [r for r in records if r.user_id == user_id]
        records.sort(key=lambda r: (r.summary.created_at, r.summary_id))
        return records

    # -- blobs ---------------------------------------------------------------

    def _blob_path(self, blob_id: str) -> Path:
        if not blob_id or "/" in blob_id or blob_id.startswith("."):
            raise StoreError(f"malformed blob id: {blob_id!r}", code="STORAGE_IO")
        return self.root / "blobs" / blob_id

    def put_blob(self, blob_id: str, payload: bytes) -> None:
        path = self._blob_path(blob_id)
        try:
            fd, temp_name = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
            with os.fdopen(fd, "wb") as handle:
                handle.write(payload)
            os.replace(temp_name, path)
        except OSError as exc:
            raise StoreError(f"cannot write blob {blob_id}: {exc}", code="STORAGE_IO")

    def get_blob(self, blob_id: str) -> bytes:
        try:
            return self._blob_path(blob_id).read_bytes()
        except FileNotFoundError:
            raise StoreError(f"blob {blob_id} not found", code="NOT_FOUND")
        except OSError as exc:
            raise StoreError(f"cannot read blob {blob_id}: {exc}", code="STORAGE_IO")

    def has_blob(self, blob_id: str) -> bool:
        return self._blob_path(blob_id).exists()
