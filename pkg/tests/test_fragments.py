from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transaudit.corpus import schema_for
from transaudit.errors import (
    FragmentCountMismatchError,
    PrefixStripFailureError,
    UnescapeError,
    UnknownFieldError,
)
from transaudit.repair.fragments import (
    FRAGMENT_MARKER,
    deserialize_fragments,
    extract_fragments,
    reformat_continuation_options,
    serialize_fragments,
    strip_translated_prefix,
)

from conftest import make_item


def test_serialize_two_plain_fragments():
    assert serialize_fragments(["Hello", "World"]) == "Hello<x>SEP</x>World"


def test_serialize_escapes_metacharacters():
    assert serialize_fragments(["a<b", "c&d"]) == "a&lt;b<x>SEP</x>c&amp;d"


def test_serialize_marker_lookalike_cannot_split():
    payload = serialize_fragments(["literal <x>SEP</x> inside"])
    assert payload == "literal &lt;x&gt;SEP&lt;/x&gt; inside"
    assert deserialize_fragments(payload, 1) == ["literal <x>SEP</x> inside"]


def test_single_fragment_has_no_marker():
    assert FRAGMENT_MARKER not in serialize_fragments(["plain text"])


def test_count_mismatch_raises():
    payload = serialize_fragments(["a", "b"])
    with pytest.raises(FragmentCountMismatchError) as err:
        deserialize_fragments(payload, 3)
    assert (err.value.expected, err.value.got) == (3, 2)


def test_no_double_unescape():
    # pre-escaped source text must come back exactly once-decoded
    assert deserialize_fragments(serialize_fragments(["caf&amp;eacute;"]), 1) == ["caf&amp;eacute;"]
    assert deserialize_fragments("caf&amp;eacute;", 1) == ["caf&eacute;"]


def test_raw_markup_in_engine_output_rejected():
    with pytest.raises(UnescapeError):
        deserialize_fragments("bad <b>markup</b>", 1)


def test_empty_list_roundtrip():
    assert serialize_fragments([]) == ""
    assert deserialize_fragments("", 0) == []


def test_fuzz_roundtrip_10000_random_lists():
    rng = random.Random(20240817)
    alphabet = "ab&<>x/SEP πß文 \t\n\"'"
    for _ in range(10_000):
        n = rng.randint(1, 6)
        fragments = []
        for _ in range(n):
            length = rng.randint(0, 24)
            text = "".join(rng.choice(alphabet) for _ in range(length))
            if rng.random() < 0.1:
                text += FRAGMENT_MARKER  # literal marker inside a fragment
            fragments.append(text)
        assert deserialize_fragments(serialize_fragments(fragments), n) == fragments


@settings(max_examples=300, deadline=None)
@given(st.lists(st.text(max_size=40), min_size=0, max_size=8))
def test_roundtrip_property(fragments):
    assert deserialize_fragments(serialize_fragments(fragments), len(fragments)) == fragments


# --- extraction -------------------------------------------------------------


def test_extract_question_and_choices_order():
    item = make_item(choices=["c0", "c1", "c2", "c3"])
    plan = extract_fragments(item, schema_for("arc"), ["choices", "question"])
    assert plan.fragments == ("What?", "c0", "c1", "c2", "c3")
    assert plan.slots[0] == ("question", None)
    assert plan.slots[1:] == (("choices", 0), ("choices", 1), ("choices", 2), ("choices", 3))


def test_extract_single_answer_fragment():
    item = make_item(dataset="gsm8k", answer="42", answer_index=None, choices=None)
    plan = extract_fragments(item, schema_for("gsm8k"), ["answer"])
    assert plan.fragments == ("42",)


def test_extract_empty_question_yields_empty_fragment():
    item = make_item(question="")
    plan = extract_fragments(item, schema_for("arc"), ["question"])
    assert plan.fragments == ("",)


def test_extract_single_choice_path():
    item = make_item(choices=["a", "b", "c", "d"])
    plan = extract_fragments(item, schema_for("arc"), ["choices[2]"])
    assert plan.fragments == ("c",)
    assert plan.slots == (("choices", 2),)


def test_extract_unknown_field():
    item = make_item()
    with pytest.raises(UnknownFieldError):
        extract_fragments(item, schema_for("arc"), ["answer"])
    with pytest.raises(UnknownFieldError):
        extract_fragments(item, schema_for("arc"), ["choices[9]"])


# --- continuation reformatting ------------------------------------------------


def test_reformat_none_is_identity():
    item = make_item(dataset="hellaswag", split="validation")
    assert reformat_continuation_options(item, "none") is item


def test_reformat_prefixes_context():
    item = make_item(
        dataset="hellaswag",
        split="validation",
        question="She opens",
        choices=["the door.", "a book."],
        answer_index=0,
    )
    out = reformat_continuation_options(item, "prefix_context")
    assert out.choices == ["She opens the door.", "She opens a book."]
    assert item.choices == ["the door.", "a book."]  # original untouched


def test_strip_translated_prefix_success():
    assert strip_translated_prefix("[de] She opens", "[de] She opens the door.") == "the door."


def test_strip_translated_prefix_failure():
    with pytest.raises(PrefixStripFailureError):
        strip_translated_prefix("Sie öffnet", "Etwas ganz anderes.")
