"""Quantile summaries, tie-aware rank correlation, paired bootstrap
comparison, and multi-system rank testing.

Conventions, pinned so numbers reproduce:

* quantiles interpolate linearly between order statistics (the common
  "type 7" rule); the median of an even-length sample is the mean of the
  two central order statistics;
* Spearman's rho uses average ranks for ties and a two-sided Student-t
  approximation for its p-value;
* the rank test is the classical chi-squared Friedman statistic (no
  Iman-Davenport correction) with the two-tailed Nemenyi constants for
  2..10 systems embedded below;
* all resampling flows through numpy's seedable PCG64 generator, so a
  fixed seed reproduces results bit-for-bit across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import chi2 as _chi2
from scipy.stats import t as _student_t

from ..corpus import ItemKey
from ..errors import (
    DegenerateInputError,
    DimensionMismatchError,
    DomainError,
    InsufficientDataError,
    LengthMismatchError,
    ModeMismatchError,
    UnsupportedKError,
)
from .scores import SegmentScore

#: replicate rows drawn per chunk during bootstrap; fixed so the stream of
#: generator draws (and therefore the CI) never depends on available memory
_BOOTSTRAP_CHUNK_CELLS = 4_194_304


def quantile(values: Sequence[float], p: float) -> float:
    """Linear-interpolation quantile between order statistics."""
    array = np.asarray(values, dtype=float)
    if array.size == 0:
        raise InsufficientDataError("quantile of empty input")
    return float(np.quantile(array, p, method="linear"))


def median(values: Sequence[float]) -> float:
    return quantile(values, 0.5)


def average_ranks(values: Sequence[float]) -> list[float]:
    """Ascending 1-based ranks; tied values share the average of the
    positions they span."""
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j) / 2.0 + 1.0
        for t in range(i, j + 1):
            ranks[order[t]] = shared
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Tie-aware Spearman rank correlation with a two-sided p-value.

    rho is the Pearson correlation of the average-rank vectors; p comes
    from t = rho * sqrt((n-2)/(1-rho^2)) against Student-t with n-2
    degrees of freedom, with |rho| = 1 giving p = 0 exactly.
    """
    if len(x) != len(y):
        raise LengthMismatchError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 3:
        raise InsufficientDataError(f"need at least 3 pairs, got {n}")
    if len(set(map(float, x))) == 1 or len(set(map(float, y))) == 1:
        raise DegenerateInputError("rank correlation undefined for a constant vector")
    rx = np.asarray(average_ranks(list(x)))
    ry = np.asarray(average_ranks(list(y)))
    rx -= rx.mean()
    ry -= ry.mean()
    rho = float(rx @ ry / math.sqrt(float(rx @ rx) * float(ry @ ry)))
    rho = max(-1.0, min(1.0, rho))
    if 1.0 - rho * rho <= 0.0:
        return rho, 0.0
    t_stat = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * float(_student_t.sf(abs(t_stat), n - 2))
    return rho, min(1.0, p)


@dataclass
class CellSummary:
    """Distribution summary of one (language, dataset) score cell."""

    language: str
    dataset: str
    n: int
    median: float
    q1: float
    q3: float
    iqr: float
    median_word_count: float | None
    spearman_rho: float | None
    spearman_p: float | None


def cell_summary(scores: Sequence[SegmentScore]) -> CellSummary:
    """Median/quartile summary plus the length-vs-score rank correlation.

    The correlation is emitted as absent when fewer than three scored
    items carry word counts or when either vector is constant.
    """
    if not scores:
        raise InsufficientDataError("empty cell")
    languages = {s.key.language for s in scores}
    datasets = {s.key.dataset for s in scores}
    if len(languages) > 1 or len(datasets) > 1:
        raise DimensionMismatchError(
            f"cell mixes languages {sorted(languages)} / datasets {sorted(datasets)}"
        )
    values = [s.score for s in scores]
    q1 = quantile(values, 0.25)
    q3 = quantile(values, 0.75)
    lengths = [(s.word_count, s.score) for s in scores if s.word_count is not None]
    median_wc: float | None = None
    rho: float | None = None
    p: float | None = None
    if lengths:
        median_wc = median([float(wc) for wc, _ in lengths])
    if len(lengths) >= 3:
        try:
            rho, p = spearman([float(wc) for wc, _ in lengths], [s for _, s in lengths])
        except DegenerateInputError:
            rho, p = None, None
    return CellSummary(
        language=next(iter(languages)),
        dataset=next(iter(datasets)),
        n=len(scores),
        median=median(values),
        q1=q1,
        q3=q3,
        iqr=q3 - q1,
        median_word_count=median_wc,
        spearman_rho=rho,
        spearman_p=p,
    )


def group_cells(records: Sequence[SegmentScore]) -> list[CellSummary]:
    """One :func:`cell_summary` per (language, dataset), sorted."""
    groups: dict[tuple[str, str], list[SegmentScore]] = {}
    for record in records:
        groups.setdefault((record.key.language, record.key.dataset), []).append(record)
    return [cell_summary(groups[ident]) for ident in sorted(groups)]


@dataclass
class PairedSet:
    """Aligned scores of two systems on their shared items."""

    system_a: str
    system_b: str
    mode: str
    pairs: list[tuple[ItemKey, float, float]]

    @property
    def n(self) -> int:
        return len(self.pairs)


@dataclass
class AlignedScores:
    """Scores of k systems on the items every one of them covers."""

    systems: tuple[str, ...]
    mode: str
    keys: list[ItemKey]
    scores: dict[str, list[float]]

    @property
    def n(self) -> int:
        return len(self.keys)


def multi_overlap(
    records: Sequence[SegmentScore], systems: Sequence[str], mode: str
) -> AlignedScores:
    """Intersection of items present for every requested system in the
    given mode, in deterministic key order.  An empty overlap is returned
    as an n = 0 result (downstream operations refuse it)."""
    if len(systems) < 2:
        raise DomainError("need at least two systems to align")
    by_system: dict[str, dict[ItemKey, float]] = {s: {} for s in systems}
    for record in records:
        if record.mode == mode and record.system in by_system:
            by_system[record.system][record.key] = record.score
    shared: set[ItemKey] | None = None
    for system in systems:
        keys = set(by_system[system])
        shared = keys if shared is None else shared & keys
    keys = sorted(shared or (), key=ItemKey.sort_key)
    return AlignedScores(
        systems=tuple(systems),
        mode=mode,
        keys=keys,
        scores={s: [by_system[s][k] for k in keys] for s in systems},
    )


def paired_overlap(
    records: Sequence[SegmentScore], system_a: str, system_b: str, mode: str
) -> PairedSet:
    aligned = multi_overlap(records, (system_a, system_b), mode)
    return PairedSet(
        system_a=system_a,
        system_b=system_b,
        mode=mode,
        pairs=[
            (key, a, b)
            for key, a, b in zip(aligned.keys, aligned.scores[system_a], aligned.scores[system_b])
        ],
    )


def median_delta_and_winrate(paired: PairedSet) -> tuple[float, float]:
    """Median score difference and the strict win proportion.

    Ties count toward the denominator only, so win_rate(a, b) +
    win_rate(b, a) + tie_rate = 1.
    """
    if paired.n == 0:
        raise InsufficientDataError("empty paired set")
    a = [p[1] for p in paired.pairs]
    b = [p[2] for p in paired.pairs]
    delta = median(a) - median(b)
    wins = sum(1 for x, y in zip(a, b) if x > y)
    return delta, wins / paired.n


@dataclass
class DeltaResult:
    system_a: str
    system_b: str
    mode: str
    n: int
    delta: float
    win_rate: float
    ci_low: float
    ci_high: float
    alpha: float
    replicates: int
    seed: int
    significant: bool

    def to_dict(self) -> dict:
        return {
            "system_a": self.system_a,
            "system_b": self.system_b,
            "mode": self.mode,
            "n": self.n,
            "delta": self.delta,
            "win_rate": self.win_rate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "alpha": self.alpha,
            "replicates": self.replicates,
            "seed": self.seed,
            "significant": self.significant,
        }


def paired_bootstrap_ci(
    paired: PairedSet,
    replicates: int = 5000,
    alpha: float = 0.05,
    seed: int = 0,
) -> DeltaResult:
    """Percentile confidence interval for the median difference.

    Each replicate resamples n pair indices with replacement (the same
    indices for both systems) and recomputes the difference of medians;
    the interval is the empirical (alpha/2, 1-alpha/2) quantile pair of
    the replicate distribution.  Deterministic for a fixed seed.
    """
    if paired.n < 2:
        raise InsufficientDataError(f"need at least 2 pairs, got {paired.n}")
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    a = np.asarray([p[1] for p in paired.pairs])
    b = np.asarray([p[2] for p in paired.pairs])
    n = a.size
    rng = np.random.Generator(np.random.PCG64(seed))
    deltas = np.empty(replicates, dtype=float)
    chunk_rows = max(1, _BOOTSTRAP_CHUNK_CELLS // n)
    start = 0
    while start < replicates:
        rows = min(chunk_rows, replicates - start)
        idx = rng.integers(0, n, size=(rows, n))
        deltas[start : start + rows] = np.median(a[idx], axis=1) - np.median(b[idx], axis=1)
        start += rows
    ci_low = quantile(deltas, alpha / 2.0)
    ci_high = quantile(deltas, 1.0 - alpha / 2.0)
    delta, win_rate = median_delta_and_winrate(paired)
    return DeltaResult(
        system_a=paired.system_a,
        system_b=paired.system_b,
        mode=paired.mode,
        n=paired.n,
        delta=delta,
        win_rate=win_rate,
        ci_low=ci_low,
        ci_high=ci_high,
        alpha=alpha,
        replicates=replicates,
        seed=seed,
        significant=not (ci_low <= 0.0 <= ci_high),
    )


def ref_based_delta(
    paired: PairedSet,
    replicates: int = 5000,
    alpha: float = 0.05,
    seed: int = 0,
) -> DeltaResult:
    """Reference-based median difference with its paired bootstrap CI.

    Same machinery as :func:`paired_bootstrap_ci` but the input must be
    built from reference-based scores only.
    """
    if paired.mode != "ref_based":
        raise ModeMismatchError(
            f"reference-based comparison requires ref_based scores, got {paired.mode!r}"
        )
    return paired_bootstrap_ci(paired, replicates=replicates, alpha=alpha, seed=seed)


def rank_systems(medians: Mapping[str, float]) -> dict[str, float]:
    """Rank 1 = highest median; exact ties share the average rank."""
    if len(medians) < 2:
        raise DomainError("need at least two systems to rank")
    systems = list(medians)
    descending = average_ranks([-medians[s] for s in systems])
    return {s: r for s, r in zip(systems, descending)}


def friedman_test(per_block_ranks: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Classical chi-squared rank test over N blocks of k systems.

    chi2 = [12N / (k(k+1))] * [sum_j avg_rank_j^2 - k(k+1)^2 / 4], with
    the p-value from the chi-squared distribution with k-1 degrees of
    freedom.
    """
    n_blocks = len(per_block_ranks)
    if n_blocks < 2:
        raise DimensionMismatchError(f"need at least 2 blocks, got {n_blocks}")
    k = len(per_block_ranks[0])
    if k < 2:
        raise DimensionMismatchError(f"need at least 2 systems, got {k}")
    for row in per_block_ranks:
        if len(row) != k:
            raise DimensionMismatchError("ragged rank matrix")
    avg = [sum(row[j] for row in per_block_ranks) / n_blocks for j in range(k)]
    stat = (12.0 * n_blocks / (k * (k + 1))) * (
        sum(r * r for r in avg) - k * (k + 1) ** 2 / 4.0
    )
    stat = max(0.0, stat)
    p = float(_chi2.sf(stat, k - 1))
    return stat, p


#: two-tailed Nemenyi constants (infinite-df studentized range / sqrt(2))
#: for 2..10 compared systems at the two supported significance levels
NEMENYI_Q = {
    0.05: {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164},
    0.10: {2: 1.645, 3: 2.052, 4: 2.291, 5: 2.459, 6: 2.589, 7: 2.693, 8: 2.780, 9: 2.855, 10: 2.920},
}


def nemenyi_cd(k: int, blocks: int, alpha: float = 0.05) -> float:
    """Critical difference q_alpha * sqrt(k(k+1) / (6N)): the minimum
    average-rank gap deemed significant by the all-pairs test."""
    table = NEMENYI_Q.get(alpha)
    if table is None:
        raise UnsupportedKError(f"no embedded constants for alpha={alpha}")
    q = table.get(k)
    if q is None:
        raise UnsupportedKError(f"no embedded constant for k={k} (supported: 2..10)")
    if blocks < 2:
        raise DomainError(f"need at least 2 blocks, got {blocks}")
    return q * math.sqrt(k * (k + 1) / (6.0 * blocks))


@dataclass(frozen=True)
class PairVerdict:
    system_a: str
    system_b: str
    gap: float
    significant: bool


def pairwise_significance(avg_ranks: Mapping[str, float], cd: float) -> list[PairVerdict]:
    """All-pairs verdicts: a pair differs significantly iff its average-rank
    gap strictly exceeds the critical difference."""
    systems = list(avg_ranks)
    verdicts = []
    for i, a in enumerate(systems):
        for b in systems[i + 1 :]:
            gap = abs(avg_ranks[a] - avg_ranks[b])
            verdicts.append(PairVerdict(a, b, gap, gap > cd))
    return verdicts


@dataclass
class RankAnalysis:
    systems: tuple[str, ...]
    blocks: tuple[str, ...]
    block_sizes: dict[str, int]
    per_block_medians: dict[str, dict[str, float]]
    per_block_ranks: list[list[float]]
    avg_ranks: dict[str, float]
    friedman_chi2: float
    friedman_p: float
    cd: float
    q_alpha: float
    alpha: float
    pairwise: list[PairVerdict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "systems": list(self.systems),
            "blocks": list(self.blocks),
            "block_sizes": self.block_sizes,
            "per_block_medians": self.per_block_medians,
            "per_block_ranks": self.per_block_ranks,
            "avg_ranks": self.avg_ranks,
            "friedman_chi2": self.friedman_chi2,
            "friedman_p": self.friedman_p,
            "cd": self.cd,
            "q_alpha": self.q_alpha,
            "alpha": self.alpha,
            "pairwise": [
                {
                    "system_a": v.system_a,
                    "system_b": v.system_b,
                    "gap": v.gap,
                    "significant": v.significant,
                }
                for v in self.pairwise
            ],
        }


def rank_analysis(
    records: Sequence[SegmentScore],
    systems: Sequence[str],
    mode: str = "ref_free",
    alpha: float = 0.05,
) -> RankAnalysis:
    """Block-ranked comparison of k systems with languages as blocks.

    Per language, systems are ranked by their median score on the k-way
    item overlap; the omnibus rank test and the all-pairs critical
    difference run on the resulting N x k matrix.
    """
    languages = sorted({r.key.language for r in records})
    blocks: list[str] = []
    block_sizes: dict[str, int] = {}
    per_block_medians: dict[str, dict[str, float]] = {}
    matrix: list[list[float]] = []
    for language in languages:
        subset = [r for r in records if r.key.language == language]
        aligned = multi_overlap(subset, systems, mode)
        if aligned.n == 0:
            continue
        medians = {s: median(aligned.scores[s]) for s in systems}
        ranks = rank_systems(medians)
        blocks.append(language)
        block_sizes[language] = aligned.n
        per_block_medians[language] = medians
        matrix.append([ranks[s] for s in systems])
    if len(blocks) < 2:
        raise InsufficientDataError(
            f"need at least 2 language blocks with full overlap, got {len(blocks)}"
        )
    chi2_stat, p = friedman_test(matrix)
    k = len(systems)
    cd = nemenyi_cd(k, len(blocks), alpha)
    avg = {
        s: sum(row[j] for row in matrix) / len(matrix) for j, s in enumerate(systems)
    }
    return RankAnalysis(
        systems=tuple(systems),
        blocks=tuple(blocks),
        block_sizes=block_sizes,
        per_block_medians=per_block_medians,
        per_block_ranks=matrix,
        avg_ranks=avg,
        friedman_chi2=chi2_stat,
        friedman_p=p,
        cd=cd,
        q_alpha=NEMENYI_Q[alpha][k],
        alpha=alpha,
        pairwise=pairwise_significance(avg, cd),
    )
