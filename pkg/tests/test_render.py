from __future__ import annotations

import pytest

from transaudit.analysis.stats import CellSummary, DeltaResult, RankAnalysis, pairwise_significance
from transaudit.corpus import ItemKey
from transaudit.errors import EmptyInputError
from transaudit.judge.aggregate import BUCKETS, MajorityVerdict, error_rates
from transaudit.render import (
    render_cd_diagram,
    render_delta_heatmap,
    render_error_overview,
    render_landscape,
    render_ref_delta_bars,
)


def cell(language="de", dataset="arc", median=0.9, iqr=0.05, wc=30.0, rho=-0.3):
    return CellSummary(
        language=language,
        dataset=dataset,
        n=50,
        median=median,
        q1=median - iqr / 2,
        q3=median + iqr / 2,
        iqr=iqr,
        median_word_count=wc,
        spearman_rho=rho,
        spearman_p=0.001 if rho is not None else None,
    )


def delta(system_a="eu20", system_b="okapi", value=0.03, lo=0.01, hi=0.05, mode="ref_free"):
    return DeltaResult(
        system_a=system_a,
        system_b=system_b,
        mode=mode,
        n=100,
        delta=value,
        win_rate=0.62,
        ci_low=lo,
        ci_high=hi,
        alpha=0.05,
        replicates=2000,
        seed=7,
        significant=not (lo <= 0.0 <= hi),
    )


def test_landscape_panel_structure():
    cells = [
        cell(language=lang, dataset=ds, median=0.5 + 0.01 * i)
        for i, (lang, ds) in enumerate(
            (l, d) for l in ("de", "fr", "lv") for d in ("arc", "gsm8k")
        )
    ]
    svg, csv_text = render_landscape(cells)
    assert svg.count("median score") == 1
    assert svg.count("<rect") == 3 * 6  # three panels x 6 cells
    assert csv_text.splitlines()[0].startswith("language,dataset,n,median")
    assert len(csv_text.splitlines()) == 7


def test_landscape_byte_identical():
    cells = [cell(), cell(language="fr", median=0.7)]
    assert render_landscape(cells) == render_landscape(cells)


def test_landscape_single_cell_and_missing_rho():
    only = cell(rho=None)
    only.spearman_p = None
    svg, _ = render_landscape([only])
    assert "<svg" in svg and "</svg>" in svg


def test_landscape_row_order_best_language_first():
    cells = [
        cell(language="lv", dataset="arc", median=0.4),
        cell(language="de", dataset="arc", median=0.9),
    ]
    svg, _ = render_landscape(cells)
    assert svg.find(">de<") < svg.find(">lv<")


def test_landscape_empty_input():
    with pytest.raises(EmptyInputError):
        render_landscape([])


def test_delta_heatmap_star_and_percent():
    entries = [
        ("de", "arc", delta(value=0.05, lo=0.03, hi=0.07)),
        ("de", "mmlu", delta(value=0.0, lo=-0.01, hi=0.01)),
    ]
    svg, csv_text = render_delta_heatmap(entries)
    assert "+0.050*" in svg
    assert "0.000" in svg and "0.000*" not in svg
    assert "62%" in svg
    assert "significant" in csv_text.splitlines()[0]


def test_delta_heatmap_symmetric_scale_midpoint_for_zero():
    entries = [("de", "arc", delta(value=0.0, lo=-0.01, hi=0.01))]
    svg, _ = render_delta_heatmap(entries)
    assert "#f7f7f7" in svg  # exact midpoint of the diverging ramp


def test_delta_heatmap_determinism():
    entries = [("de", "arc", delta()), ("fr", "arc", delta(value=-0.02, lo=-0.04, hi=0.0))]
    assert render_delta_heatmap(entries) == render_delta_heatmap(entries)


def make_rank_analysis(avg, cd=1.48):
    systems = tuple(avg)
    return RankAnalysis(
        systems=systems,
        blocks=("de", "es", "fr", "it", "ro"),
        block_sizes={b: 2378 for b in ("de", "es", "fr", "it", "ro")},
        per_block_medians={},
        per_block_ranks=[],
        avg_ranks=dict(avg),
        friedman_chi2=7.6,
        friedman_p=0.022,
        cd=cd,
        q_alpha=2.343,
        alpha=0.05,
        pairwise=pairwise_significance(avg, cd),
    )


def test_cd_diagram_bridges_only_non_significant():
    analysis = make_rank_analysis({"eu20": 1.0, "okapi": 2.4, "global": 2.6})
    svg = render_cd_diagram(analysis)
    assert "eu20 ~ okapi" in svg
    assert "okapi ~ global" in svg
    assert "eu20 ~ global" not in svg


def test_cd_diagram_all_significant_no_bridges():
    analysis = make_rank_analysis({"a": 1.0, "b": 3.0}, cd=0.5)
    svg = render_cd_diagram(analysis)
    assert "~" not in svg


def test_cd_diagram_two_equal_ranks_single_bridge():
    analysis = make_rank_analysis({"a": 1.5, "b": 1.5}, cd=0.5)
    svg = render_cd_diagram(analysis)
    assert svg.count("~") == 1


def verdict(language, dataset, id, bucket=None, clean=0):
    return MajorityVerdict(
        key=ItemKey(language, dataset, None, "test", id),
        major={b: int(b == bucket) for b in BUCKETS},
        minor={b: 0 for b in BUCKETS},
        present={b: int(b == bucket) for b in BUCKETS},
        clean=clean,
        n_valid=3,
        excluded=False,
    )


def test_error_overview_bar_geometry():
    verdicts = []
    for i in range(10):
        bucket = "A+M" if i < 7 else None
        verdicts.append(verdict("lv", "hellaswag", f"i{i}", bucket=bucket, clean=int(i >= 9)))
    rates = error_rates(verdicts)
    svg, csv_text = render_error_overview(rates)
    assert ">700<" in svg  # A+M rate label
    assert ">100<" in svg  # CLEAN rate label
    # bar length is proportional: 700/1k of the 68-px budget = 47.6
    assert 'width="47.600"' in svg
    assert "rate_per_1000" in csv_text.splitlines()[0]


def test_error_overview_full_and_zero_bars():
    verdicts = [verdict("de", "arc", f"i{n}", bucket="A+M") for n in range(5)]
    rates = error_rates(verdicts)
    svg, _ = render_error_overview(rates)
    assert 'width="68.000"' in svg  # full-length bar
    assert ">0<" in svg  # zero bars still labeled


def test_error_overview_empty():
    with pytest.raises(EmptyInputError):
        render_error_overview(error_rates([]))


def test_ref_delta_bars_sorted_descending():
    entries = [
        ("es", delta(value=-0.004, lo=-0.0237, hi=0.0158, mode="ref_based")),
        ("it", delta(value=0.029, lo=0.0195, hi=0.0398, mode="ref_based")),
        ("ro", delta(value=0.015, lo=0.0070, hi=0.0232, mode="ref_based")),
        ("de", delta(value=0.026, lo=0.0218, hi=0.0320, mode="ref_based")),
        ("fr", delta(value=0.025, lo=0.0150, hi=0.0344, mode="ref_based")),
    ]
    svg, csv_text = render_ref_delta_bars(entries)
    order = [svg.find(f">{lang}<") for lang in ("it", "de", "fr", "ro", "es")]
    assert order == sorted(order)
    lines = csv_text.splitlines()
    assert [line.split(",")[0] for line in lines[1:]] == ["it", "de", "fr", "ro", "es"]
    assert "0.029*" in svg
    assert "-0.004*" not in svg  # es interval spans zero


def test_ref_delta_all_zero_parity():
    entries = [("de", delta(value=0.0, lo=-0.002, hi=0.002, mode="ref_based"))]
    svg, _ = render_ref_delta_bars(entries)
    assert "<svg" in svg


def test_ref_delta_negative_only():
    entries = [("de", delta(value=-0.05, lo=-0.08, hi=-0.02, mode="ref_based"))]
    svg, _ = render_ref_delta_bars(entries)
    assert "-0.050*" in svg
