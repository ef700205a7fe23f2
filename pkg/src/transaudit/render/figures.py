"""The five report figures, each a pure function returning SVG (and CSV).

Row order, scale bounds, and float formatting are all pinned: medians and
deltas display at three decimals, win rates as whole percents, error
rates as integers per 1,000.  Companion CSV carries the same numbers at
full precision.
"""

from __future__ import annotations

import csv
import io
from typing import Sequence

from ..analysis.stats import CellSummary, DeltaResult, RankAnalysis, median
from ..corpus import DATASETS
from ..errors import EmptyInputError
from ..judge.aggregate import BUCKETS, ErrorRates
from .svg import SvgCanvas, diverging_color, fmt, sequential_color, text_color_for

CELL_W = 86.0
CELL_H = 40.0
ROW_LABEL_W = 52.0
COL_LABEL_H = 26.0
TITLE_H = 22.0
PANEL_GAP = 26.0

BAR_COLORS = {"A+M": "#c0392b", "F": "#e67e22", "O": "#7f8c8d", "CLEAN": "#27ae60"}


def _csv_text(header: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buffer.getvalue()


def _dataset_order(present: set[str]) -> list[str]:
    known = [d for d in DATASETS if d in present]
    return known + sorted(present - set(DATASETS))


def _language_rows_by_median(cells: Sequence[CellSummary]) -> list[str]:
    by_language: dict[str, list[float]] = {}
    for cell in cells:
        by_language.setdefault(cell.language, []).append(cell.median)
    ordered = sorted(
        by_language, key=lambda lang: (-median(by_language[lang]), lang)
    )
    return ordered


def render_landscape(cells: Sequence[CellSummary]) -> tuple[str, str]:
    """Three aligned panels: score median (with an IQR tick), median word
    count, and the length-score rank correlation.

    Rows are languages sorted by their median across datasets (best on
    top); identical input yields identical bytes.
    """
    if not cells:
        raise EmptyInputError("no cells to render")
    languages = _language_rows_by_median(cells)
    datasets = _dataset_order({c.dataset for c in cells})
    lookup = {(c.language, c.dataset): c for c in cells}

    n_rows, n_cols = len(languages), len(datasets)
    panel_w = ROW_LABEL_W + n_cols * CELL_W
    width = 3 * panel_w + 2 * PANEL_GAP
    height = TITLE_H + COL_LABEL_H + n_rows * CELL_H + 10
    canvas = SvgCanvas(width, height)

    max_wc = max(
        (c.median_word_count for c in cells if c.median_word_count is not None), default=0.0
    )
    titles = ("median score", "median length (words)", "length-score correlation")
    for panel, title in enumerate(titles):
        x0 = panel * (panel_w + PANEL_GAP)
        canvas.text(x0 + ROW_LABEL_W, 14, title, size=12, weight="bold")
        for col, dataset in enumerate(datasets):
            canvas.text(
                x0 + ROW_LABEL_W + col * CELL_W + CELL_W / 2,
                TITLE_H + 16,
                dataset,
                anchor="middle",
                size=11,
            )
        for row, language in enumerate(languages):
            y = TITLE_H + COL_LABEL_H + row * CELL_H
            canvas.text(x0 + 4, y + CELL_H / 2 + 4, language, size=11)
            for col, dataset in enumerate(datasets):
                x = x0 + ROW_LABEL_W + col * CELL_W
                cell = lookup.get((language, dataset))
                if cell is None:
                    canvas.rect(x, y, CELL_W, CELL_H, "#eeeeee", stroke="#ffffff")
                    continue
                if panel == 0:
                    fill = sequential_color(cell.median, 0.0, 1.0)
                    canvas.rect(x, y, CELL_W, CELL_H, fill, stroke="#ffffff")
                    ink = text_color_for(fill)
                    canvas.text(
                        x + CELL_W / 2, y + CELL_H / 2 + 1, fmt(cell.median),
                        anchor="middle", fill=ink,
                    )
                    tick = cell.iqr * (CELL_W - 10)
                    canvas.line(
                        x + 5, y + CELL_H - 6, x + 5 + tick, y + CELL_H - 6, ink, width=2.0
                    )
                elif panel == 1:
                    if cell.median_word_count is None:
                        canvas.rect(x, y, CELL_W, CELL_H, "#eeeeee", stroke="#ffffff")
                        canvas.text(x + CELL_W / 2, y + CELL_H / 2 + 4, "-", anchor="middle")
                        continue
                    fill = sequential_color(cell.median_word_count, 0.0, max(max_wc, 1.0))
                    canvas.rect(x, y, CELL_W, CELL_H, fill, stroke="#ffffff")
                    canvas.text(
                        x + CELL_W / 2, y + CELL_H / 2 + 4,
                        str(int(round(cell.median_word_count))),
                        anchor="middle", fill=text_color_for(fill),
                    )
                else:
                    if cell.spearman_rho is None:
                        canvas.rect(x, y, CELL_W, CELL_H, "#eeeeee", stroke="#ffffff")
                        canvas.text(x + CELL_W / 2, y + CELL_H / 2 + 4, "-", anchor="middle")
                        continue
                    fill = diverging_color(cell.spearman_rho, 1.0)
                    canvas.rect(x, y, CELL_W, CELL_H, fill, stroke="#ffffff")
                    canvas.text(
                        x + CELL_W / 2, y + CELL_H / 2 + 4, fmt(cell.spearman_rho),
                        anchor="middle", fill=text_color_for(fill),
                    )

    rows = [
        [
            c.language,
            c.dataset,
            c.n,
            c.median,
            c.q1,
            c.q3,
            c.iqr,
            c.median_word_count,
            c.spearman_rho,
            c.spearman_p,
        ]
        for c in sorted(cells, key=lambda c: (c.language, c.dataset))
    ]
    csv_text = _csv_text(
        [
            "language",
            "dataset",
            "n",
            "median",
            "q1",
            "q3",
            "iqr",
            "median_word_count",
            "spearman_rho",
            "spearman_p",
        ],
        rows,
    )
    return canvas.to_svg(), csv_text


def render_delta_heatmap(
    entries: Sequence[tuple[str, str, DeltaResult]]
) -> tuple[str, str]:
    """Zero-centered heatmap of median differences with win rates.

    Scale bounds are symmetric at the largest |delta|; a star marks cells
    whose confidence interval excludes zero.
    """
    if not entries:
        raise EmptyInputError("no comparison cells to render")
    languages = sorted({language for language, _, _ in entries})
    datasets = _dataset_order({dataset for _, dataset, _ in entries})
    lookup = {(language, dataset): r for language, dataset, r in entries}
    magnitude = max(abs(r.delta) for _, _, r in entries) or 1e-9

    width = ROW_LABEL_W + len(datasets) * CELL_W + 10
    height = TITLE_H + COL_LABEL_H + len(languages) * CELL_H + 10
    canvas = SvgCanvas(width, height)
    sample = entries[0][2]
    canvas.text(
        ROW_LABEL_W,
        14,
        f"median difference {sample.system_a} - {sample.system_b} (* = CI excludes 0)",
        size=12,
        weight="bold",
    )
    for col, dataset in enumerate(datasets):
        canvas.text(
            ROW_LABEL_W + col * CELL_W + CELL_W / 2, TITLE_H + 16, dataset,
            anchor="middle", size=11,
        )
    for row, language in enumerate(languages):
        y = TITLE_H + COL_LABEL_H + row * CELL_H
        canvas.text(4, y + CELL_H / 2 + 4, language, size=11)
        for col, dataset in enumerate(datasets):
            x = ROW_LABEL_W + col * CELL_W
            result = lookup.get((language, dataset))
            if result is None:
                canvas.rect(x, y, CELL_W, CELL_H, "#eeeeee", stroke="#ffffff")
                continue
            fill = diverging_color(result.delta, magnitude)
            canvas.rect(x, y, CELL_W, CELL_H, fill, stroke="#ffffff")
            ink = text_color_for(fill)
            star = "*" if result.significant else ""
            sign = "+" if result.delta > 0 else ""
            canvas.text(
                x + CELL_W / 2, y + CELL_H / 2 - 3,
                f"{sign}{fmt(result.delta)}{star}",
                anchor="middle", fill=ink,
            )
            canvas.text(
                x + CELL_W / 2, y + CELL_H / 2 + 12,
                f"{int(round(result.win_rate * 100))}%",
                anchor="middle", fill=ink, size=10,
            )

    rows = [
        [
            language,
            dataset,
            r.system_a,
            r.system_b,
            r.mode,
            r.n,
            r.delta,
            r.win_rate,
            r.ci_low,
            r.ci_high,
            r.alpha,
            r.replicates,
            r.seed,
            r.significant,
        ]
        for language, dataset, r in sorted(entries, key=lambda e: (e[0], e[1]))
    ]
    csv_text = _csv_text(
        [
            "language",
            "dataset",
            "system_a",
            "system_b",
            "mode",
            "n",
            "delta",
            "win_rate",
            "ci_low",
            "ci_high",
            "alpha",
            "replicates",
            "seed",
            "significant",
        ],
        rows,
    )
    return canvas.to_svg(), csv_text


def render_cd_diagram(analysis: RankAnalysis) -> str:
    """Average ranks on a 1..k axis with critical-difference intervals.

    Interval bars span avg ± CD/2; a grey bridge links every pair whose
    gap does not exceed the critical difference.
    """
    k = len(analysis.systems)
    left, right = 70.0, 430.0
    axis_y = 70.0
    width = 500.0
    bridges = [v for v in analysis.pairwise if not v.significant]
    height = axis_y + 60.0 + 18.0 * max(1, len(bridges)) + 30.0
    canvas = SvgCanvas(width, height)
    canvas.text(left, 18, "average rank (lower is better)", size=12, weight="bold")
    canvas.text(
        left, 34,
        f"CD = {fmt(analysis.cd)} (alpha = {fmt(analysis.alpha)}, "
        f"k = {k}, blocks = {len(analysis.blocks)})",
        size=10,
    )

    def x_for(rank: float) -> float:
        if k == 1:
            return (left + right) / 2
        return left + (rank - 1.0) / (k - 1.0) * (right - left)

    canvas.line(left, axis_y, right, axis_y, "#000000", 1.0)
    for tick in range(1, k + 1):
        x = x_for(float(tick))
        canvas.line(x, axis_y - 4, x, axis_y + 4, "#000000", 1.0)
        canvas.text(x, axis_y - 8, str(tick), anchor="middle", size=10)

    label_y = axis_y + 26
    for index, system in enumerate(analysis.systems):
        rank = analysis.avg_ranks[system]
        x = x_for(rank)
        half = (analysis.cd / 2.0) / max(k - 1, 1) * (right - left)
        canvas.line(x - half, axis_y + 10, x + half, axis_y + 10, "#888888", 3.0)
        canvas.circle(x, axis_y, 4.0, "#000000")
        canvas.text(x, label_y + (index % 2) * 12, f"{system} ({fmt(rank)})", anchor="middle", size=10)

    bridge_y = label_y + 36
    for verdict in sorted(bridges, key=lambda v: (v.system_a, v.system_b)):
        x1 = x_for(analysis.avg_ranks[verdict.system_a])
        x2 = x_for(analysis.avg_ranks[verdict.system_b])
        canvas.line(min(x1, x2), bridge_y, max(x1, x2), bridge_y, "#aaaaaa", 4.0)
        canvas.text(
            max(x1, x2) + 6, bridge_y + 3,
            f"{verdict.system_a} ~ {verdict.system_b}",
            size=9, fill="#555555",
        )
        bridge_y += 18.0
    return canvas.to_svg()


def render_error_overview(rates: ErrorRates) -> tuple[str, str]:
    """Grid of four horizontal bars per (language, dataset): the three
    error buckets plus CLEAN, on a shared per-1,000 scale."""
    cells = [c for c in rates.cells]
    if not cells:
        raise EmptyInputError("no rate cells to render")
    languages = sorted({c.language for c in cells})
    datasets = _dataset_order({c.dataset for c in cells})
    lookup = {(c.language, c.dataset): c for c in cells}

    bar_labels = list(BUCKETS) + ["CLEAN"]
    cell_w, cell_h = 150.0, 66.0
    bar_h = 10.0
    label_w = 42.0
    width = ROW_LABEL_W + len(datasets) * cell_w + 10
    height = TITLE_H + COL_LABEL_H + len(languages) * cell_h + 10
    canvas = SvgCanvas(width, height)
    canvas.text(ROW_LABEL_W, 14, "agreed error rates per 1,000 items", size=12, weight="bold")
    for col, dataset in enumerate(datasets):
        canvas.text(
            ROW_LABEL_W + col * cell_w + cell_w / 2, TITLE_H + 16, dataset,
            anchor="middle", size=11,
        )
    bar_max = cell_w - label_w - 40.0
    for row, language in enumerate(languages):
        y0 = TITLE_H + COL_LABEL_H + row * cell_h
        canvas.text(4, y0 + cell_h / 2 + 4, language, size=11)
        for col, dataset in enumerate(datasets):
            x0 = ROW_LABEL_W + col * cell_w
            canvas.rect(x0, y0, cell_w, cell_h, "#fcfcfc", stroke="#dddddd")
            cell = lookup.get((language, dataset))
            if cell is None or not cell.rates:
                canvas.text(x0 + cell_w / 2, y0 + cell_h / 2 + 4, "-", anchor="middle")
                continue
            for i, bucket in enumerate(bar_labels):
                rate = cell.rates.get(bucket, 0.0)
                y = y0 + 6 + i * (bar_h + 4)
                canvas.text(x0 + 4, y + bar_h - 2, bucket, size=8)
                length = rate / 1000.0 * bar_max
                canvas.rect(x0 + label_w, y, length, bar_h, BAR_COLORS[bucket])
                canvas.text(
                    x0 + label_w + length + 4, y + bar_h - 2, str(int(round(rate))), size=8
                )

    rows = []
    for cell in sorted(cells, key=lambda c: (c.language, c.dataset)):
        for bucket in bar_labels:
            rows.append(
                [
                    cell.language,
                    cell.dataset,
                    bucket,
                    cell.rates.get(bucket) if cell.rates else None,
                    cell.n,
                    cell.excluded,
                ]
            )
    csv_text = _csv_text(
        ["language", "dataset", "bucket", "rate_per_1000", "n", "excluded"], rows
    )
    return canvas.to_svg(), csv_text


def render_ref_delta_bars(
    entries: Sequence[tuple[str, DeltaResult]]
) -> tuple[str, str]:
    """Horizontal reference-based delta bars with CI whiskers, sorted by
    delta descending, with a parity line at zero."""
    if not entries:
        raise EmptyInputError("no reference-based deltas to render")
    ordered = sorted(entries, key=lambda e: (-e[1].delta, e[0]))
    magnitude = max(
        max(abs(r.delta), abs(r.ci_low), abs(r.ci_high)) for _, r in ordered
    ) or 1e-9

    bar_h, gap = 20.0, 10.0
    plot_w = 360.0
    left = 80.0
    width = left + plot_w + 90.0
    height = TITLE_H + len(ordered) * (bar_h + gap) + 40.0
    canvas = SvgCanvas(width, height)
    sample = ordered[0][1]
    canvas.text(
        left, 14,
        f"reference-based median difference {sample.system_a} - {sample.system_b}",
        size=12, weight="bold",
    )
    zero_x = left + plot_w / 2.0

    def x_for(value: float) -> float:
        return zero_x + (value / magnitude) * (plot_w / 2.0)

    canvas.line(zero_x, TITLE_H + 6, zero_x, height - 18, "#000000", 1.0)
    for row, (language, result) in enumerate(ordered):
        y = TITLE_H + 12 + row * (bar_h + gap)
        canvas.text(4, y + bar_h / 2 + 4, language, size=11)
        x_delta = x_for(result.delta)
        x0, x1 = min(zero_x, x_delta), max(zero_x, x_delta)
        fill = diverging_color(result.delta, magnitude)
        canvas.rect(x0, y, max(x1 - x0, 0.5), bar_h, fill, stroke="#555555", stroke_width=0.5)
        whisker_y = y + bar_h / 2.0
        canvas.line(x_for(result.ci_low), whisker_y, x_for(result.ci_high), whisker_y, "#000000", 1.5)
        for ci in (result.ci_low, result.ci_high):
            canvas.line(x_for(ci), whisker_y - 4, x_for(ci), whisker_y + 4, "#000000", 1.5)
        star = "*" if result.significant else ""
        canvas.text(left + plot_w + 8, y + bar_h / 2 + 4, f"{fmt(result.delta)}{star}", size=10)

    rows = [
        [
            language,
            r.system_a,
            r.system_b,
            r.mode,
            r.n,
            r.delta,
            r.ci_low,
            r.ci_high,
            r.alpha,
            r.replicates,
            r.seed,
            r.significant,
        ]
        for language, r in ordered
    ]
    csv_text = _csv_text(
        [
            "language",
            "system_a",
            "system_b",
            "mode",
            "n",
            "delta",
            "ci_low",
            "ci_high",
            "alpha",
            "replicates",
            "seed",
            "significant",
        ],
        rows,
    )
    return canvas.to_svg(), csv_text
