"""Deterministic SVG/CSV rendering of analysis outputs."""

from .figures import (
    render_cd_diagram,
    render_delta_heatmap,
    render_error_overview,
    render_landscape,
    render_ref_delta_bars,
)

__all__ = [
    "render_cd_diagram",
    "render_delta_heatmap",
    "render_error_overview",
    "render_landscape",
    "render_ref_delta_bars",
]
