"""Deterministic prompt construction for the annotator pool.

The template ships as a plain-text file with ``$name`` placeholders; the
category vocabulary, severity rule, and few-shot exemplars are all
replaceable configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from string import Template

from ..corpus import BenchmarkItem
from ..errors import MissingSourceError

DEFAULT_CATEGORIES = (
    "accuracy/mistranslation",
    "accuracy/omission",
    "accuracy/addition",
    "accuracy/untranslated",
    "fluency/grammar",
    "fluency/spelling",
    "fluency/punctuation",
    "fluency/register",
    "fluency/inconsistency",
    "style",
    "terminology",
    "locale-convention",
    "other",
)

SEVERITY_RULE = (
    "mark a span as major when the error impairs the meaning of the text; "
    "mark it as minor when the text remains generally understandable despite the error"
)

OUTPUT_SCHEMA = (
    '{"errors": [{"span": "<exact text copied from the translation>", '
    '"category": "<one vocabulary entry>", "severity": "major" | "minor"}]}'
)


@dataclass(frozen=True)
class FewShotExample:
    source_language: str
    target_language: str
    source: str
    translation: str
    response: dict


def load_template(path: str | Path | None = None) -> Template:
    if path is None:
        text = resources.files("transaudit").joinpath("data/judge_prompt.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return Template(text)


def load_few_shots(path: str | Path | None = None) -> list[FewShotExample]:
    if path is None:
        text = resources.files("transaudit").joinpath("data/few_shots.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return [
        FewShotExample(
            source_language=str(obj["source_language"]),
            target_language=str(obj["target_language"]),
            source=str(obj["source"]),
            translation=str(obj["translation"]),
            response=obj["response"],
        )
        for obj in json.loads(text)
    ]


def render_item_text(item: BenchmarkItem) -> str:
    """Flat text rendering of an item's translated surface."""
    lines: list[str] = []
    if item.question:
        lines.append(item.question)
    for i, choice in enumerate(item.choices or []):
        lines.append(f"({i + 1}) {choice}")
    if item.answer:
        lines.append(item.answer)
    return "\n".join(lines)


def _render_few_shots(examples: list[FewShotExample]) -> str:
    blocks: list[str] = []
    for example in examples:
        blocks.append(
            "Example:\n"
            f"Source ({example.source_language}):\n{example.source}\n"
            f"Translation ({example.target_language}):\n{example.translation}\n"
            f"Response: {json.dumps(example.response, ensure_ascii=False)}\n"
        )
    return "\n".join(blocks)


def build_prompt(
    item: BenchmarkItem,
    source: BenchmarkItem | None,
    few_shots: list[FewShotExample] | None = None,
    template: Template | None = None,
    categories: tuple[str, ...] = DEFAULT_CATEGORIES,
) -> str:
    """Annotation prompt for one (source, translation) pair.

    Exemplars may be in any language; they are included as-is.  The output
    is a pure function of its arguments.
    """
    if source is None:
        raise MissingSourceError(f"no source item for {item.key}")
    if (source.key.dataset, source.key.id) != (item.key.dataset, item.key.id):
        raise MissingSourceError(
            f"source {source.key} does not match target {item.key}"
        )
    template = template or load_template()
    few_shots = few_shots if few_shots is not None else []
    return template.substitute(
        source_language=source.key.language,
        target_language=item.key.language,
        source_text=render_item_text(source),
        translation=render_item_text(item),
        categories="\n".join(f"- {c}" for c in categories),
        severity_rule=SEVERITY_RULE,
        output_schema=OUTPUT_SCHEMA,
        few_shots=_render_few_shots(few_shots),
    )
