"""File store: round trips, CAS semantics, reopen, filtering."""

from __future__ import annotations

import threading

import pytest

from photochat.domain import (
    ChatSummary,
    FamilyMember,
    Photo,
    Profile,
    SummaryRecord,
    UserRecord,
)
from photochat.errors import StoreError
from photochat.store import Store

from conftest import make_grandson_photo, make_grandson_plan, make_grandson_user


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "data")


class TestUserRecords:
    def test_put_get_round_trip(self, store):
        user = make_grandson_user()
        version = store.put_user(user)
        fetched, fetched_version = store.get_user(user.user_id)
        assert fetched == user
        assert version == fetched_version == 1

    def test_get_missing(self, store):
        with pytest.raises(StoreError) as err:
            store.get_user("nope")
        assert err.value.code == "NOT_FOUND"

    def test_create_twice_conflicts(self, store):
        user = make_grandson_user()
        store.put_user(user)
        with pytest.raises(StoreError) as err:
            store.put_user(user)
        assert err.value.code == "VERSION_CONFLICT"

    def test_cas_update(self, store):
        user = make_grandson_user()
        v1 = store.put_user(user)
        user.background = "updated"
        v2 = store.put_user(user, expected_version=v1)
        assert v2 == v1 + 1
        fetched, _ = store.get_user(user.user_id)
        assert fetched.background == "updated"

    def test_stale_version_conflicts(self, store):
        user = make_grandson_user()
        store.put_user(user)
        store.put_user(user, expected_version=1)
        with pytest.raises(StoreError) as err:
            store.put_user(user, expected_version=1)
        assert err.value.code == "VERSION_CONFLICT"

    def test_two_concurrent_writers_one_conflict(self, store):
        user = make_grandson_user()
        base = store.put_user(user)
        barrier = threading.Barrier(2)
        outcomes = []

        def writer(tag):
            record, _ = store.get_user(user.user_id)
            record.background = tag
            barrier.wait()
            try:
                store.put_user(record, expected_version=base)
                outcomes.append(("ok", tag))
            except StoreError as exc:
                outcomes.append((exc.code, tag))

        threads = [threading.Thread(target=writer, args=(t,)) for t in ("one", "two")]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        codes = sorted(code for code, _ in outcomes)
        assert codes == ["VERSION_CONFLICT", "ok"]


class TestPhotosAndBlobs:
    def test_photo_round_trip_and_blob(self, store):
        photo = make_grandson_photo()
        store.put_photo(photo)
        store.put_blob(photo.photo_id, b"\x89PNG fake bytes")
        fetched, _ = store.get_photo(photo.photo_id)
        assert fetched == photo
        assert store.get_blob(photo.photo_id) == b"\x89PNG fake bytes"
        assert store.has_blob(photo.photo_id)
        assert not store.has_blob("other")

    def test_list_photos_filters(self, store):
        a = Photo("pa", "u1", 1, "d", ["grandson"])
        b = Photo("pb", "u1", 2, "d", ["daughter"])
        c = Photo("pc", "u2", 3, "d", ["grandson"])
        for p in (a, b, c):
            store.put_photo(p)
        assert {p.photo_id for p in store.list_photos(owner="u1")} == {"pa", "pb"}
        assert {p.photo_id for p in store.list_photos(member="grandson")} == {"pa", "pc"}
        assert {p.photo_id for p in store.list_photos(owner="u1", member="grandson")} == {"pa"}

    def test_member_filter_case_insensitive(self, store):
        store.put_photo(Photo("pa", "u1", 1, "d", ["Grandson"]))
        assert len(store.list_photos(member="grandson")) == 1


class TestSessions:
    def test_session_snapshot_round_trip(self, store):
        from photochat.engine import start_session

        user = make_grandson_user()
        photo = make_grandson_photo()
        state, _ = start_session("sess-1", user, photo, make_grandson_plan(user, photo))
        store.put_session(state)
        fetched, version = store.get_session("sess-1")
        assert fetched == state
        assert version == 1


class TestSummaries:
    def make_record(self, summary_id, user_id="u1", created_at=0):
        return SummaryRecord(
            summary_id=summary_id,
            user_id=user_id,
            session_id="s1",
            summary=ChatSummary(
                summary_text="text",
                new_profile=Profile(likes=["tea"]),
                target_person=None,
                photo_id="p1",
                created_at=created_at,
            ),
        )

    def test_round_trip_and_listing(self, store):
        store.put_summary(self.make_record("sum-b", created_at=2))
        store.put_summary(self.make_record("sum-a", created_at=1))
        store.put_summary(self.make_record("sum-c", user_id="u2", created_at=3))
        listed = store.list_summaries("u1")
        assert [r.summary_id for r in listed] == ["sum-a", "sum-b"]  # by created_at
        assert all(r.user_id == "u1" for r in listed)


class TestDurability:
    def test_reopen_preserves_records(self, tmp_path):
        root = tmp_path / "data"
        first = Store(root)
        user = make_grandson_user()
        photo = make_grandson_photo()
        first.put_user(user)
        first.put_photo(photo)
        first.put_blob(photo.photo_id, b"bytes")

        reopened = Store(root)
        fetched_user, version = reopened.get_user(user.user_id)
        assert fetched_user == user
        assert version == 1
        assert reopened.get_blob(photo.photo_id) == b"bytes"

    def test_version_strictly_increases(self, store):
        user = make_grandson_user()
        versions = [store.put_user(user)]
        for _ in range(5):
            versions.append(store.put_user(user, expected_version=versions[-1]))
        assert versions == sorted(set(versions))

    def test_malformed_ids_rejected(self, store):
        with pytest.raises(StoreError):
            store.get("users", "../escape")
        with pytest.raises(StoreError):
            store.put_blob("a/b", b"x")


def test_family_roster_with_face_refs_round_trips(store):
    user = UserRecord(
        user_id="u9",
        display_name="N",
        family=[FamilyMember(name="g", relationship="grandson", face_ref="face-123")],
    )
    store.put_user(user)
    fetched, _ = store.get_user("u9")
    assert fetched.family[0].face_ref == "face-123"
