"""Span-level translation error annotation with majority-vote aggregation."""

from .aggregate import (
    BUCKETS,
    ErrorRates,
    ErrorSpan,
    ItemAnnotation,
    MajorityVerdict,
    collapse_severity,
    error_rates,
    load_category_table,
    majority_vote,
    map_category,
)
from .annotators import (
    AnnotationStore,
    AnnotatorConfig,
    ChatCompletionsClient,
    MockAnnotator,
    call_annotator,
    parse_annotator_response,
    run_judging,
)
from .prompts import build_prompt, load_few_shots, load_template

__all__ = [
    "AnnotationStore",
    "AnnotatorConfig",
    "BUCKETS",
    "ChatCompletionsClient",
    "ErrorRates",
    "ErrorSpan",
    "ItemAnnotation",
    "MajorityVerdict",
    "MockAnnotator",
    "build_prompt",
    "call_annotator",
    "collapse_severity",
    "error_rates",
    "load_category_table",
    "load_few_shots",
    "load_template",
    "majority_vote",
    "map_category",
    "parse_annotator_response",
    "run_judging",
]
