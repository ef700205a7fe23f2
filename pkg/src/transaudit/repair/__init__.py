"""Manifest-driven field-level re-translation of defective benchmark items."""

from .cache import TranslationCache
from .engines import DeepLCompatibleEngine, MockEngine, TranslationEngine
from .fragments import (
    FRAGMENT_MARKER,
    FragmentPlan,
    deserialize_fragments,
    extract_fragments,
    reformat_continuation_options,
    serialize_fragments,
    strip_translated_prefix,
)
from .pipeline import (
    DiagnosticsRecord,
    FragmentBatch,
    RepairEntry,
    RepairManifest,
    RepairResult,
    apply_updates,
    build_batches,
    load_manifest,
    resolve_manifest,
    run_repair,
    translate_batch,
    validate_post_translation,
    write_diagnostics,
)

__all__ = [
    "FRAGMENT_MARKER",
    "DeepLCompatibleEngine",
    "DiagnosticsRecord",
    "FragmentBatch",
    "FragmentPlan",
    "MockEngine",
    "RepairEntry",
    "RepairManifest",
    "RepairResult",
    "TranslationCache",
    "TranslationEngine",
    "apply_updates",
    "build_batches",
    "deserialize_fragments",
    "extract_fragments",
    "load_manifest",
    "reformat_continuation_options",
    "resolve_manifest",
    "run_repair",
    "serialize_fragments",
    "strip_translated_prefix",
    "translate_batch",
    "validate_post_translation",
    "write_diagnostics",
]
