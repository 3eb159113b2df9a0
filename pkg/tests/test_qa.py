"""Question generation: prompt rendering, output parsing, plan assembly."""

from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from photochat.domain import Photo, QaKind
from photochat.errors import ParseError, ValidationError
from photochat.qa import (
    NO_MEMBERS_ANSWER,
    OPEN_QUESTION,
    WHO_QUESTION,
    QaPair,
    assemble_question_plan,
    build_qa_prompt,
    escape_description,
    format_qa_pairs,
    parse_qa_response,
    who_expected_answer,
)


def make_photo(description="A walk in the park.", members=()) -> Photo:
    return Photo(
        photo_id="p1",
        owner="u1",
        uploaded_at=1,
        description=description,
        members_present=list(members),
    )


THREE_PAIRS = (
    "Where was this photo taken?###At his daughter's home;"
    "When was it taken?###On Christmas Eve;"
    "What is happening?###Having Christmas Eve dinner;"
)


class TestBuildQaPrompt:
    def test_description_lands_in_slot(self, grandson_photo):
        prompt = build_qa_prompt(grandson_photo)
        assert grandson_photo.description in prompt
        assert "{image_description}" not in prompt

    def test_empty_description_rejected(self):
        with pytest.raises(ValidationError) as err:
            build_qa_prompt(make_photo(description="   "))
        assert err.value.code == "EMPTY_DESCRIPTION"

    def test_delimiters_in_description_cannot_corrupt_parsing(self):
        # A hostile description must not survive rendering as a delimiter.
        description = "Cake###icing; and sprinkles"
        prompt = build_qa_prompt(make_photo(description=description))
        assert "###" not in prompt.replace("Question###Answer", "")
        assert "# # #" in prompt

    def test_escape_is_parser_safe(self):
        escaped = escape_description("a###b;c####d")
        assert "###" not in escaped
        assert ";" not in escaped


class TestParseQaResponse:
    def test_three_pairs_in_order(self):
        pairs, warnings = parse_qa_response(THREE_PAIRS)
        assert warnings == []
        assert [p.question for p in pairs] == [
            "Where was this photo taken?",
            "When was it taken?",
            "What is happening?",
        ]
        assert [p.answer for p in pairs] == [
            "At his daughter's home",
            "On Christmas Eve",
            "Having Christmas Eve dinner",
        ]

    def test_empty_input_rejected(self):
        with pytest.raises(ParseError) as err:
            parse_qa_response("")
        assert err.value.code == "TOO_FEW_PAIRS"

    def test_malformed_segment_is_warning_not_fatal(self):
        pairs, warnings = parse_qa_response("Q1###A1;garbage;Q2###A2;Q3###A3;")
        assert len(pairs) == 3
        assert len(warnings) == 1
        assert "garbage" in warnings[0]

    def test_two_pairs_not_enough(self):
        with pytest.raises(ParseError) as err:
            parse_qa_response("Q1###A1;Q2###A2;")
        assert err.value.code == "TOO_FEW_PAIRS"

    def test_quotes_and_whitespace_trimmed(self):
        pairs, _ = parse_qa_response(' "Q1" ### "A1" ;Q2###A2;Q3###A3;')
        assert pairs[0] == QaPair(question="Q1", answer="A1")

    def test_pair_count_never_exceeds_segment_count(self):
        rng = random.Random(7)
        alphabet = "abc #?!"
        for _ in range(200):
            raw = "".join(rng.choice(alphabet + ";") for _ in range(rng.randrange(0, 60)))
            try:
                pairs, _ = parse_qa_response(raw)
            except ParseError:
                continue
            assert len(pairs) <= raw.count(";") + 1


_field = st.text(
    alphabet=st.characters(blacklist_characters="#;\"'", blacklist_categories=("Cs", "Cc")),
    min_size=1,
    max_size=30,
).filter(lambda s: s.strip() == s and s)


class TestRoundTrip:
    @given(st.lists(st.builds(QaPair, question=_field, answer=_field), min_size=3, max_size=8))
    def test_format_then_parse_is_identity(self, pairs):
        reparsed, warnings = parse_qa_response(format_qa_pairs(pairs))
        assert warnings == []
        assert reparsed == pairs


class TestAssemblePlan:
    def test_five_item_plan_with_members(self, grandson_photo, grandson_user):
        pairs, _ = parse_qa_response(THREE_PAIRS)
        plan = assemble_question_plan(grandson_photo, pairs, grandson_user.family)
        assert len(plan.items) == 5
        assert plan.items[0].kind is QaKind.WHO
        assert plan.items[0].question == WHO_QUESTION
        assert plan.items[0].expected_answer == "grandson, daughter"
        assert [i.kind for i in plan.items[1:4]] == [QaKind.WHERE, QaKind.WHEN, QaKind.WHAT]
        assert plan.items[4].kind is QaKind.OPEN
        assert plan.items[4].question == OPEN_QUESTION
        assert plan.items[4].expected_answer == ""
        assert plan.cursor == 0

    def test_zero_members_uses_placeholder_answer(self):
        pairs, _ = parse_qa_response(THREE_PAIRS)
        plan = assemble_question_plan(make_photo(), pairs)
        assert plan.items[0].expected_answer == NO_MEMBERS_ANSWER

    def test_fourth_pair_becomes_second_what(self):
        pairs, _ = parse_qa_response(THREE_PAIRS + "Anything else on the table?###A cake;")
        plan = assemble_question_plan(make_photo(), pairs)
        assert len(plan.items) == 6
        assert [i.kind for i in plan.items] == [
            QaKind.WHO,
            QaKind.WHERE,
            QaKind.WHEN,
            QaKind.WHAT,
            QaKind.WHAT,
            QaKind.OPEN,
        ]

    def test_relationships_rendered_when_known(self, grandson_photo):
        from photochat.domain import FamilyMember

        family = [
            FamilyMember(name="grandson", relationship="grandson"),
            FamilyMember(name="daughter", relationship="daughter"),
        ]
        assert (
            who_expected_answer(grandson_photo, family)
            == "grandson (grandson), daughter (daughter)"
        )

    def test_under_three_pairs_rejected(self, grandson_photo):
        with pytest.raises(ParseError):
            assemble_question_plan(grandson_photo, [QaPair("q", "a")])

    def test_plan_shape_holds_for_random_inputs(self):
        rng = random.Random(42)
        for _ in range(200):
            count = rng.randrange(3, 9)
            pairs = [QaPair(f"q{i}?", f"a{i}") for i in range(count)]
            plan = assemble_question_plan(make_photo(), pairs)
            assert plan.items[0].kind is QaKind.WHO
            assert plan.items[-1].kind is QaKind.OPEN
            assert len(plan.items) == count + 2
