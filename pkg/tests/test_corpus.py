from __future__ import annotations

import json

import pytest

from transaudit.corpus import (
    BenchmarkItem,
    Corpus,
    ItemKey,
    defective_fields,
    normalize_answer_index,
    parse_jsonl_corpus,
    schema_for,
    validate_item,
    write_jsonl_corpus,
)
from transaudit.errors import (
    DuplicateKeyError,
    MalformedLineError,
    MissingKeyFieldError,
    SchemaViolationError,
    UnknownDatasetError,
)

from conftest import make_item, write_jsonl


def test_single_wellformed_arc_line(tmp_path, arc_row):
    path = write_jsonl(tmp_path / "arc.jsonl", [arc_row])
    corpus = parse_jsonl_corpus(path)
    assert len(corpus) == 1
    item = corpus.items[0]
    assert item.key == ItemKey("de", "arc", "easy", "test", "q1")
    assert item.question == "Welche Farbe hat der Himmel?"
    assert item.answer_index == 0
    assert item.schema_violations == ()


def test_duplicate_key_rejected(tmp_path, arc_row):
    path = write_jsonl(tmp_path / "dup.jsonl", [arc_row, dict(arc_row)])
    with pytest.raises(DuplicateKeyError):
        parse_jsonl_corpus(path)


def test_empty_file_gives_empty_corpus(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert len(parse_jsonl_corpus(path)) == 0


def test_malformed_json_reports_line_number(tmp_path, arc_row):
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps(arc_row) + "\n{not json\n", encoding="utf-8")
    with pytest.raises(MalformedLineError) as err:
        parse_jsonl_corpus(path)
    assert err.value.line_no == 2


def test_missing_key_field(tmp_path, arc_row):
    row = dict(arc_row)
    del row["language"]
    path = write_jsonl(tmp_path / "nolang.jsonl", [row])
    with pytest.raises(MissingKeyFieldError) as err:
        parse_jsonl_corpus(path)
    assert err.value.field == "language"


def test_unknown_dataset(tmp_path, arc_row):
    row = dict(arc_row, dataset="squad")
    path = write_jsonl(tmp_path / "unk.jsonl", [row])
    with pytest.raises(UnknownDatasetError):
        parse_jsonl_corpus(path)


def test_schema_for_registry():
    gsm = schema_for("gsm8k")
    assert gsm.kind == "generative"
    assert gsm.required_fields == ("question", "answer")
    assert schema_for("mmlu").kind == "multiple_choice"
    # public ARC layout: stem plus choice texts are the translated surface
    assert schema_for("arc").translatable_fields == ("question", "choices")
    with pytest.raises(UnknownDatasetError):
        schema_for("wikitext")


def test_roundtrip_preserves_everything(tmp_path):
    items = [
        make_item(id="a", question="Καλημέρα κόσμε", choices=["α", "β", "γ", "δ"]),
        make_item(id="b", extra={"meta": {"a": 1}, "note": "български"}),
        make_item(id="c", language="bg", question="Защо?", answer_index=[1, 2]),
    ]
    corpus = Corpus(items)
    path = tmp_path / "round.jsonl"
    write_jsonl_corpus(corpus, path)
    back = parse_jsonl_corpus(path)
    assert len(back) == len(corpus)
    for before, after in zip(corpus, back):
        assert after.key == before.key
        assert after.question == before.question
        assert after.choices == before.choices
        assert after.answer_index == before.answer_index
        assert after.answer == before.answer
        assert after.extra == before.extra


def test_roundtrip_twice_is_byte_identical(tmp_path):
    items = [make_item(id=f"i{n}", question=f"Q {n} <&>") for n in range(5)]
    p1, p2 = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
    write_jsonl_corpus(Corpus(items), p1)
    write_jsonl_corpus(parse_jsonl_corpus(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_extra_passthrough_field(tmp_path, arc_row):
    row = dict(arc_row)
    row["meta"] = {"a": 1}
    path = write_jsonl(tmp_path / "extra.jsonl", [row])
    corpus = parse_jsonl_corpus(path)
    assert corpus.items[0].extra == {"meta": {"a": 1}}
    out = tmp_path / "out.jsonl"
    write_jsonl_corpus(corpus, out)
    assert json.loads(out.read_text())["extra"] == {"meta": {"a": 1}}


def test_answer_letter_normalization(tmp_path, arc_row):
    row = dict(arc_row)
    del row["answer_index"]
    row["answerKey"] = "B"
    path = write_jsonl(tmp_path / "letters.jsonl", [row])
    item = parse_jsonl_corpus(path).items[0]
    assert item.answer_index == 1
    assert item.extra["answerKey"] == "B"


def test_answer_digit_string_is_one_based(tmp_path, arc_row):
    row = dict(arc_row)
    del row["answer_index"]
    row["answerKey"] = "3"
    path = write_jsonl(tmp_path / "digits.jsonl", [row])
    assert parse_jsonl_corpus(path).items[0].answer_index == 2


def test_normalize_answer_index_forms():
    assert normalize_answer_index(2) == (2, False)
    assert normalize_answer_index([0, 2]) == ([0, 2], False)
    assert normalize_answer_index("A") == (0, True)
    assert normalize_answer_index("e") == (4, True)
    assert normalize_answer_index("1") == (0, True)
    assert normalize_answer_index(["B", "C"]) == ([1, 2], True)
    assert normalize_answer_index(None) == (None, False)


def test_hellaswag_adapter_renames(tmp_path):
    row = {
        "language": "de",
        "dataset": "hellaswag",
        "split": "validation",
        "id": "h1",
        "ctx": "Sie öffnet",
        "endings": ["die Tür.", "ein Buch.", "das Fenster.", "den Brief."],
        "label": 0,
    }
    path = write_jsonl(tmp_path / "hsw.jsonl", [row])
    item = parse_jsonl_corpus(path).items[0]
    assert item.question == "Sie öffnet"
    assert item.choices is not None and len(item.choices) == 4
    assert item.answer_index == 0


def test_truthfulqa_mc1_preferred_mc2_in_extra(tmp_path):
    row = {
        "language": "de",
        "dataset": "truthfulqa",
        "split": "validation",
        "id": "t1",
        "question": "Was?",
        "choices": ["a", "b", "c"],
        "mc1_indices": [0],
        "mc2_indices": [0, 1],
    }
    path = write_jsonl(tmp_path / "tqa.jsonl", [row])
    item = parse_jsonl_corpus(path).items[0]
    assert item.answer_index == [0]
    assert item.extra["mc2_indices"] == [0, 1]


def test_lenient_parse_records_violations(tmp_path):
    rows = [
        {
            "language": "de",
            "dataset": "hellaswag",
            "split": "validation",
            "id": "h1",
            "question": "ctx",
            "choices": ["ok", "", "ok", "ok"],
            "answer_index": 1,
        },
        {
            "language": "de",
            "dataset": "gsm8k",
            "split": "test",
            "id": "g1",
            "question": "",
            "answer": "42",
        },
    ]
    path = write_jsonl(tmp_path / "broken.jsonl", rows)
    corpus = parse_jsonl_corpus(path)
    assert corpus.items[0].schema_violations == ("choices[1]:empty",)
    assert corpus.items[1].schema_violations == ("question:empty",)
    assert defective_fields(corpus.items[0]) == ("choices[1]",)


def test_strict_parse_raises(tmp_path):
    row = {
        "language": "de",
        "dataset": "gsm8k",
        "split": "test",
        "id": "g1",
        "question": "",
        "answer": "42",
    }
    path = write_jsonl(tmp_path / "strict.jsonl", [row])
    with pytest.raises(SchemaViolationError):
        parse_jsonl_corpus(path, strict=True)


def test_id_synthesis_zero_padded_per_group(tmp_path):
    rows = [
        {"language": "de", "dataset": "gsm8k", "split": "test", "question": "q", "answer": "a"},
        {"language": "de", "dataset": "gsm8k", "split": "test", "question": "q2", "answer": "b"},
        {"language": "de", "dataset": "gsm8k", "split": "train", "question": "q3", "answer": "c"},
    ]
    path = write_jsonl(tmp_path / "noid.jsonl", rows)
    corpus = parse_jsonl_corpus(path)
    assert [i.key.id for i in corpus] == ["000000", "000001", "000000"]


def test_index_soundness():
    items = [make_item(id=f"k{n}") for n in range(10)]
    corpus = Corpus(items)
    for item in items:
        assert corpus.lookup(item.key) is item
    assert corpus.lookup(make_item(id="missing").key) is None


def test_validate_item_answer_index_range():
    item = make_item(choices=["a", "b"], answer_index=5)
    assert "answer_index:range" in validate_item(item, schema_for("arc"))


def test_non_latin_bytes_preserved(tmp_path):
    item = make_item(id="el", language="el", question="Καλημέρα κόσμε!")
    path = tmp_path / "el.jsonl"
    write_jsonl_corpus(Corpus([item]), path)
    assert "Καλημέρα" in path.read_text(encoding="utf-8")
    assert parse_jsonl_corpus(path).items[0].question == "Καλημέρα κόσμε!"
