"""Shared fixtures: two fully scripted replay sessions and small builders.

The "grandson" session is a 20-round chat about a Christmas photo that
exercises every option (C, C, D, A, B, A, A, C, D) and ends in a new-photo
offer. The "son-in-law" session is a short 4-round chat that surfaces a
dislike. Both come with the matching scripted provider lines and the
summary responses the chats are expected to produce.
"""

from __future__ import annotations

import pytest

from photochat.domain import (
    FamilyMember,
    Photo,
    Profile,
    QaItem,
    QaKind,
    UserRecord,
)
from photochat.qa import plan_from_items

# --- grandson session (Christmas photo) -----------------------------------

GRANDSON_PHOTO_DESCRIPTION = (
    "On Christmas Eve, the user had Christmas Eve dinner with his daughter "
    "at his daughter's home."
)

GRANDSON_CHATBOT_SCRIPT = [
    "option:C, response: Your grandson is so cute! Does this photo hold special memories?",
    "option:C, response: Ocean Park is so much fun! Does your grandson like any other animals?",
    "option:D, response: Let's go back to the photo - do you recognize anyone else in it?",
    "option:A, response: You answered correctly! When was this photo taken?",
    "option:B, response: No worries, you might be mistaken. The previous question was about "
    "when the photo was taken, and the answer is Christmas Eve. Do you remember where it was taken?",
    "option:A, response: You answered correctly! What were the people in the photo doing?",
    "option:A, response: You answered correctly again! Anything else special about this photo?",
    "option:C, response: Christmas songs really bring festive vibes! Which song did your "
    "grandson sing? Does he enjoy singing other songs?",
    "option:D, response: Your grandson is truly talented - his singing makes Christmas even "
    "more warm and joyful! I hope he continues to enjoy music! Would you like to continue "
    "chatting about your grandson's photos?",
]

GRANDSON_SUMMARY_RESPONSE = (
    "New summary: The elder shared his fond memories with his family, including his "
    "grandson's first visit to Ocean Park to watch a dolphin show. He particularly liked "
    "penguins and even wanted to bring them home to raise. The photos recorded the time "
    "they were preparing dinner on Christmas Eve. Their grandson even sang Christmas "
    "carols, filling the whole family with a joyful atmosphere.\n"
    "New profile: {Like= [calligraphy, Ocean Park, grandchildren, penguins, Christmas], "
    "Dislike= []}\n"
    "Target Person: grandson"
)

GRANDSON_ELDERLY_SCRIPT = [
    "Oh, this is my grandson! He's always smiling, really adorable!",
    "Yes, this was taken during his first trip to Ocean Park! He loved watching the dolphin show.",
    "He loves penguins! He always says they're funny and even wants to bring one home!",
    "Oh, besides my grandson, my daughter is also in the picture. They took it together!",
    "It was taken last Christmas when we visited Ocean Park as a family.",
    "Oh, it was taken at home while we were preparing Christmas dinner.",
    "They were helping prepare Christmas dinner, chatting, and laughing - it was a joyful moment!",
    "I remember my grandson even sang a Christmas song that night - it was really beautiful!",
    "He sang Jingle Bells that night, and he also loves Twinkle Twinkle Little Star!",
]

GRANDSON_OFFER_REPLY = "Sure!"

GRANDSON_EXPECTED_OPTIONS = ["C", "C", "D", "A", "B", "A", "A", "C", "D"]
GRANDSON_EXPECTED_HISTOGRAM = {"A": 3, "B": 1, "C": 3, "D": 2}
GRANDSON_EXPECTED_PROGRESSION = ["WHO", "WHEN", "WHERE", "WHAT", "OPEN"]
GRANDSON_EXPECTED_LIKES = ["calligraphy", "Ocean Park", "grandchildren", "penguins", "Christmas"]


def make_grandson_user() -> UserRecord:
    return UserRecord(
        user_id="user-grandpa",
        display_name="Grandpa",
        background="Retired calligraphy teacher living in Hong Kong; widowed; two children.",
        profile=Profile(likes=["calligraphy"], dislikes=[]),
        family=[FamilyMember(name="grandson"), FamilyMember(name="daughter")],
    )


def make_grandson_photo() -> Photo:
    return Photo(
        photo_id="photo-christmas",
        owner="user-grandpa",
        uploaded_at=1_700_000_000,
        description=GRANDSON_PHOTO_DESCRIPTION,
        members_present=["grandson", "daughter"],
    )


def make_grandson_plan(user: UserRecord | None = None, photo: Photo | None = None):
    # Middle items carry the kinds in the order this chat asks them.
    user = user or make_grandson_user()
    photo = photo or make_grandson_photo()
    middle = [
        QaItem(kind=QaKind.WHEN, question="When was this photo taken?", expected_answer="Christmas Eve"),
        QaItem(kind=QaKind.WHERE, question="Where was it taken?", expected_answer="At his daughter's home"),
        QaItem(
            kind=QaKind.WHAT,
            question="What were the people in the photo doing?",
            expected_answer="Having Christmas Eve dinner",
        ),
    ]
    return plan_from_items(photo, middle, user.family)


# --- son-in-law session (family dinner photo) ------------------------------

SON_IN_LAW_CHATBOT_SCRIPT = [
    "option:C, response: Oh, political discussions can sometimes be challenging. How do you "
    "usually talk about these topics with your son?",
    "option:C, response: That sounds frustrating. Do you think there's a way to make your "
    "conversations more constructive and peaceful?",
]

SON_IN_LAW_SUMMARY_RESPONSE = (
    "New summary: The user and his son-in-law have serious differences on political issues, "
    "which often turn discussions into arguments and affect the family atmosphere that "
    "should be relaxed. He hopes to find a more peaceful way of communication, but he "
    "still needs time to think calmly.\n"
    "New profile: {Like= [calligraphy], Dislike= [political disputes, son-in-law]}"
)

SON_IN_LAW_ELDERLY_SCRIPT = [
    "This dinner should have been enjoyable, but I really dislike my son-in-law now because "
    "we completely disagree on politics!",
    "We've tried discussing, but it always turns into an argument - he never listens to me!",
]

SON_IN_LAW_EXPECTED_HISTOGRAM = {"C": 2}
SON_IN_LAW_EXPECTED_DISLIKES = ["political disputes", "son-in-law"]


def make_son_in_law_user() -> UserRecord:
    return UserRecord(
        user_id="user-grandpa-2",
        display_name="Grandpa",
        background="Retired calligraphy teacher; opinionated about current affairs.",
        profile=Profile(likes=["calligraphy"], dislikes=[]),
        family=[FamilyMember(name="son-in-law"), FamilyMember(name="daughter")],
    )


def make_son_in_law_photo() -> Photo:
    return Photo(
        photo_id="photo-dinner",
        owner="user-grandpa-2",
        uploaded_at=1_700_100_000,
        description="A family dinner at home with his daughter and son-in-law.",
        members_present=["son-in-law", "daughter"],
    )


def make_son_in_law_plan(user: UserRecord | None = None, photo: Photo | None = None):
    user = user or make_son_in_law_user()
    photo = photo or make_son_in_law_photo()
    middle = [
        QaItem(kind=QaKind.WHERE, question="Where was this dinner held?", expected_answer="At home"),
        QaItem(kind=QaKind.WHEN, question="When did this dinner take place?", expected_answer="Last weekend"),
        QaItem(kind=QaKind.WHAT, question="What was everyone doing?", expected_answer="Having dinner together"),
    ]
    return plan_from_items(photo, middle, user.family)


# --- pytest fixtures --------------------------------------------------------


@pytest.fixture
def grandson_user() -> UserRecord:
    return make_grandson_user()


@pytest.fixture
def grandson_photo() -> Photo:
    return make_grandson_photo()


@pytest.fixture
def grandson_plan(grandson_user, grandson_photo):
    return make_grandson_plan(grandson_user, grandson_photo)


@pytest.fixture
def son_in_law_user() -> UserRecord:
    return make_son_in_law_user()


@pytest.fixture
def son_in_law_photo() -> Photo:
    return make_son_in_law_photo()


@pytest.fixture
def son_in_law_plan(son_in_law_user, son_in_law_photo):
    return make_son_in_law_plan(son_in_law_user, son_in_law_photo)
