"""Fragment extraction and the XML wire format for batched translation.

Translatable fragments of one item are joined into a single payload with
the literal marker ``<x>SEP</x>``.  Fragment text is minimally
XML-escaped (``& < >``), which guarantees the marker cannot occur inside
escaped text, so splitting the engine response is unambiguous.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from ..corpus import BenchmarkItem, TaskSchema
from ..errors import (
    FragmentCountMismatchError,
    PrefixStripFailureError,
    UnescapeError,
    UnknownFieldError,
)

FRAGMENT_MARKER = "<x>SEP</x>"

_CHOICE_PATH_RE = re.compile(r"^choices\[(\d+)\]$")

#: write-back slot: ("question", None) | ("choices", i) | ("answer", None)
FieldSlot = tuple[str, int | None]


def escape_fragment(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def unescape_fragment(text: str) -> str:
    # single pass, reverse order of escaping; pre-escaped source like
    # "caf&amp;eacute;" comes back as "caf&eacute;", never double-decoded
    return text.replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")


def serialize_fragments(fragments: list[str]) -> str:
    """Join escaped fragments with the marker; a single fragment is emitted
    bare, an empty list as the empty string."""
    return FRAGMENT_MARKER.join(escape_fragment(f) for f in fragments)


def deserialize_fragments(payload: str, expected_n: int) -> list[str]:
    """Split an engine response back into fragments.

    Raises :class:`FragmentCountMismatchError` when the engine dropped or
    invented a marker, and :class:`UnescapeError` when a part carries raw
    markup the escaping step could never have produced.
    """
    if expected_n == 0:
        if payload == "":
            return []
        raise FragmentCountMismatchError(0, 1)
    parts = payload.split(FRAGMENT_MARKER)
    if len(parts) != expected_n:
        raise FragmentCountMismatchError(expected_n, len(parts))
    for part in parts:
        if "<" in part or ">" in part:
            raise UnescapeError(f"unexpected raw markup in engine output: {part[:80]!r}")
    return [unescape_fragment(part) for part in parts]


@dataclass(frozen=True)
class FragmentPlan:
    """Ordered source fragments plus the slots they write back into."""

    fragments: tuple[str, ...]
    slots: tuple[FieldSlot, ...]


def _expand_fields(fields: list[str] | tuple[str, ...], item: BenchmarkItem) -> list[FieldSlot]:
    slots: list[FieldSlot] = []
    for name in fields:
        match = _CHOICE_PATH_RE.match(name)
        if match:
            index = int(match.group(1))
            n = len(item.choices or ())
            if index >= n:
                raise UnknownFieldError(f"{name} out of range for {n} choices")
            slots.append(("choices", index))
        elif name == "choices":
            for index in range(len(item.choices or ())):
                slots.append(("choices", index))
        elif name in ("question", "answer"):
            slots.append((name, None))
        else:
            raise UnknownFieldError(f"unknown field {name!r}")
    return slots


_SLOT_ORDER = {"question": 0, "choices": 1, "answer": 2}


def extract_fragments(
    item: BenchmarkItem, schema: TaskSchema, fields: list[str] | tuple[str, ...]
) -> FragmentPlan:
    """Pull the flagged fields out of ``item`` in deterministic order:
    question first, then choices by index, then answer.

    Absent / empty source fields become empty-string fragments so a repair
    can still replace them.
    """
    for name in fields:
        base = name.split("[", 1)[0]
        if base not in schema.translatable_fields:
            raise UnknownFieldError(
                f"field {name!r} is not translatable for dataset {schema.dataset!r}"
            )
    slots = sorted(
        dict.fromkeys(_expand_fields(fields, item)),
        key=lambda s: (_SLOT_ORDER[s[0]], -1 if s[1] is None else s[1]),
    )
    fragments: list[str] = []
    for name, index in slots:
        if name == "question":
            fragments.append(item.question or "")
        elif name == "answer":
            fragments.append(item.answer or "")
        else:
            choices = item.choices or []
            fragments.append(choices[index] if index < len(choices) else "")
    return FragmentPlan(fragments=tuple(fragments), slots=tuple(slots))


def reformat_continuation_options(item: BenchmarkItem, mode: str = "none") -> BenchmarkItem:
    """Rewrite context-continuation options before translation.

    ``prefix_context`` prepends the item's context (held in ``question``)
    to every choice so the engine sees full sentences instead of dangling
    fragments; ``none`` is the identity.
    """
    if mode == "none":
        return item
    if mode != "prefix_context":
        raise ValueError(f"unknown reformat mode {mode!r}")
    context = (item.question or "").strip()
    if not context or not item.choices:
        return item
    out = item.copy()
    out.choices = [f"{context} {choice.lstrip()}" if choice else choice for choice in item.choices]
    return out


def strip_translated_prefix(translated_context: str, translated_option: str) -> str:
    """Remove the translated context from a translated combined option.

    The option must begin with the full translated context; anything less
    means the engine reshaped the sentence and the item needs manual
    inspection.
    """
    context = translated_context.strip()
    if context and translated_option.startswith(context):
        return translated_option[len(context):].lstrip()
    raise PrefixStripFailureError(
        f"translated option does not start with translated context: "
        f"context={translated_context[:60]!r} option={translated_option[:60]!r}"
    )
