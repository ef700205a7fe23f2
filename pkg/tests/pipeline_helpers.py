"""Shared driver for the end-to-end analyze -> judge -> report pipeline.

Used by the acceptance suite (determinism + golden comparison) and by
tests/regen_goldens.py.
"""

from __future__ import annotations

from pathlib import Path

from transaudit.cli import main

DATA = Path(__file__).parent / "data"
GOLDENS = Path(__file__).parent / "goldens"

SCORES = DATA / "scores_fixture.jsonl"
ENGLISH = DATA / "english_fixture.jsonl"
TARGETS = DATA / "targets_fixture.jsonl"

#: files compared byte-for-byte (run manifests embed absolute input paths)
ARTIFACTS = [
    "analysis/cells.csv",
    "analysis/compare.json",
    "analysis/ranks.json",
    "analysis/refdelta.json",
    "analysis/rates.json",
    "analysis/rates.csv",
    "judge/annotations.jsonl",
    "figures/landscape.svg",
    "figures/landscape.csv",
    "figures/delta.svg",
    "figures/delta.csv",
    "figures/cd.svg",
    "figures/refdelta.svg",
    "figures/refdelta.csv",
    "figures/errors.svg",
    "figures/errors.csv",
]


def run_pipeline(root: Path, seed: int = 7, replicates: int = 500) -> None:
    analysis = root / "analysis"
    judge = root / "judge"
    figures = root / "figures"
    steps = [
        ["analyze", "landscape", "--scores", str(SCORES), "--out", str(analysis)],
        [
            "analyze", "compare",
            "--scores", str(SCORES),
            "--system-a", "eu20",
            "--system-b", "okapi",
            "--bootstrap", str(replicates),
            "--seed", str(seed),
            "--out", str(analysis),
        ],
        [
            "analyze", "ranks",
            "--scores", str(SCORES),
            "--systems", "eu20,okapi,global",
            "--out", str(analysis),
        ],
        [
            "analyze", "refbased",
            "--scores", str(SCORES),
            "--system-a", "eu20",
            "--system-b", "okapi",
            "--bootstrap", str(replicates),
            "--seed", str(seed),
            "--out", str(analysis),
        ],
        [
            "judge", "run",
            "--items", str(TARGETS),
            "--source", str(ENGLISH),
            "--pool", "mock",
            "--out", str(judge),
        ],
        [
            "judge", "aggregate",
            "--annotations", str(judge / "annotations.jsonl"),
            "--out", str(analysis),
        ],
        ["report", "--in", str(analysis), "--kind", "all", "--out", str(figures)],
    ]
    for step in steps:
        code = main(step)
        if code != 0:
            raise RuntimeError(f"pipeline step {step[:2]} exited {code}")
