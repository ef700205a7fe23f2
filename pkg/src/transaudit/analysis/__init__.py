"""Statistical comparison of per-segment quality-estimation scores."""

from .scores import SegmentScore, load_scores, word_count
from .stats import (
    AlignedScores,
    CellSummary,
    DeltaResult,
    PairVerdict,
    PairedSet,
    RankAnalysis,
    cell_summary,
    friedman_test,
    median_delta_and_winrate,
    multi_overlap,
    nemenyi_cd,
    paired_bootstrap_ci,
    paired_overlap,
    pairwise_significance,
    quantile,
    rank_analysis,
    rank_systems,
    ref_based_delta,
    spearman,
)

__all__ = [
    "AlignedScores",
    "CellSummary",
    "DeltaResult",
    "PairVerdict",
    "PairedSet",
    "RankAnalysis",
    "SegmentScore",
    "cell_summary",
    "friedman_test",
    "load_scores",
    "median_delta_and_winrate",
    "multi_overlap",
    "nemenyi_cd",
    "paired_bootstrap_ci",
    "paired_overlap",
    "pairwise_significance",
    "quantile",
    "rank_analysis",
    "rank_systems",
    "ref_based_delta",
    "spearman",
    "word_count",
]
