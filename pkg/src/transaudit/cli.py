"""Command-line entry point: audit, repair, analyze, judge, report.

Every subcommand operates on files, validates its full configuration
before any network call, and writes a manifest of inputs (paths plus
content digests), seed, and tool version into the output directory.
Artifacts carry no timestamps, so re-running with identical inputs and
seed reproduces identical bytes.

Exit codes: 0 success/clean, 2 input or configuration error, 3 findings
(audit violations, empty overlap), 4 external-service failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Mapping, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .analysis.scores import SegmentScore, load_scores
from .analysis.stats import (
    CellSummary,
    DeltaResult,
    PairVerdict,
    RankAnalysis,
    group_cells,
    paired_bootstrap_ci,
    paired_overlap,
    rank_analysis,
    ref_based_delta,
)
from .audit import audit, report_to_json, summary_table
from .corpus import (
    Corpus,
    ItemKey,
    load_adapter_table,
    parse_jsonl_corpus,
    write_jsonl_corpus,
)
from .errors import (
    AuthFailureError,
    ConfigError,
    EngineError,
    EngineUnavailableError,
    InsufficientDataError,
    JudgeRunError,
    TransauditError,
)
from .judge.aggregate import (
    CellRates,
    ErrorRates,
    ItemAnnotation,
    ShareEntry,
    error_rates,
    majority_vote,
)
from .judge.annotators import (
    AnnotationStore,
    AnnotatorConfig,
    run_judging,
    url_env_for,
)
from .render import (
    render_cd_diagram,
    render_delta_heatmap,
    render_error_overview,
    render_landscape,
    render_ref_delta_bars,
)
from .repair.cache import TranslationCache
from .repair.engines import ENGINE_KEY_ENV, DeepLCompatibleEngine, MockEngine
from .repair.pipeline import load_manifest, run_repair, write_diagnostics

logger = logging.getLogger("transaudit")

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_FINDINGS = 3
EXIT_SERVICE_FAILURE = 4

ENGINE_URL_ENV = "TRANSAUDIT_ENGINE_URL"


# --- config resolution ----------------------------------------------------


def load_config_file(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config file {path}: {exc}") from None
    return data.get("defaults", data)


def resolve(
    flag_value,
    env_name: str | None,
    config: Mapping[str, Any],
    config_key: str,
    default,
):
    """CLI flag > environment variable > config file > built-in default."""
    if flag_value is not None:
        return flag_value
    if env_name and os.environ.get(env_name):
        return os.environ[env_name]
    if config_key in config:
        return config[config_key]
    return default


def echo_config(command: str, resolved: Mapping[str, Any]) -> None:
    redacted = {}
    for key, value in sorted(resolved.items()):
        if "key" in key.lower() or "credential" in key.lower():
            redacted[key] = "***" if value else "(unset)"
        else:
            redacted[key] = value
    print(f"[transaudit] {command} config: {json.dumps(redacted, default=str)}", file=sys.stderr)


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_run_manifest(
    out_dir: Path, command: str, inputs: Sequence[str | Path], settings: Mapping[str, Any]
) -> None:
    manifest = {
        "tool": "transaudit",
        "version": __version__,
        "command": command,
        "inputs": [
            {"path": str(p), "sha256": sha256_of(Path(p))}
            for p in inputs
            if Path(p).is_file()
        ],
        "settings": {k: settings[k] for k in sorted(settings)},
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_manifest.json").write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False, default=str) + "\n",
        encoding="utf-8",
    )


# --- corpus loading helpers -------------------------------------------------


def load_corpora_by_language(
    paths: Sequence[str], *, strict: bool = False, adapters=None
) -> dict[str, Corpus]:
    """Parse one or more corpus files and regroup items per language."""
    items_by_language: dict[str, list] = {}
    for path in paths:
        corpus = parse_jsonl_corpus(path, strict=strict, adapters=adapters)
        for item in corpus:
            items_by_language.setdefault(item.key.language, []).append(item)
    return {language: Corpus(items) for language, items in sorted(items_by_language.items())}


def load_english(paths: Sequence[str], *, adapters=None) -> Corpus:
    corpora = load_corpora_by_language(paths, adapters=adapters)
    english = corpora.get("en")
    if english is None:
        raise ConfigError("no English items found in the provided source files")
    return english


def _adapters_from(args: argparse.Namespace):
    path = getattr(args, "adapters", None)
    return None if path is None else load_adapter_table(path)


# --- audit -------------------------------------------------------------------


def cmd_audit(args: argparse.Namespace, config: Mapping[str, Any]) -> int:
    out_dir = Path(resolve(args.out, None, config, "out", "out"))
    languages = resolve(args.languages, None, config, "languages", None)
    if isinstance(languages, str):
        languages = [code.strip() for code in languages.split(",") if code.strip()]
    echo_config(
        "audit",
        {"corpus": args.corpus, "english": args.english, "languages": languages, "out": str(out_dir)},
    )
    adapters = _adapters_from(args)
    targets = load_corpora_by_language(args.corpus, adapters=adapters)
    targets.pop("en", None)
    english = load_english(args.english, adapters=adapters)
    report = audit(targets, english, languages)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "audit_report.json").write_text(report_to_json(report), encoding="utf-8")
    table = summary_table(report)
    (out_dir / "audit_summary.txt").write_text(table, encoding="utf-8")
    write_run_manifest(
        out_dir,
        "audit",
        list(args.corpus) + list(args.english),
        {"languages": languages or sorted(targets)},
    )
    print(table, end="")
    return EXIT_OK if report.clean else EXIT_FINDINGS


# --- repair ---------------------------------------------------------------------


def _audit_defects(path: str | None) -> dict[ItemKey, tuple[str, ...]] | None:
    if path is None:
        return None
    report = json.loads(Path(path).read_text(encoding="utf-8"))
    defects: dict[ItemKey, tuple[str, ...]] = {}
    for cell in report.get("cells", []):
        for entry in cell.get("rosters", {}).get("missing_content", []):
            key = ItemKey.from_dict(entry)
            defects[key] = tuple(entry.get("fields", ()))
    return defects


def cmd_repair(args: argparse.Namespace, config: Mapping[str, Any]) -> int:
    out_dir = Path(resolve(args.out, None, config, "out", "out"))
    engine_kind = resolve(args.engine, None, config, "engine", "mock")
    engine_url = resolve(args.engine_url, ENGINE_URL_ENV, config, "engine_url", None)
    reformat = resolve(args.reformat, None, config, "reformat", "none")
    echo_config(
        "repair",
        {
            "engine": engine_kind,
            "engine_url": engine_url,
            "engine_key": os.environ.get(ENGINE_KEY_ENV),
            "manifest": args.manifest,
            "cache": args.cache,
            "dry_run": args.dry_run,
            "reformat": reformat,
            "out": str(out_dir),
        },
    )

    # full validation before any network traffic
    if engine_kind == "deepl" and not args.dry_run:
        if not engine_url:
            raise ConfigError("a deepl-compatible engine needs --engine-url or TRANSAUDIT_ENGINE_URL")
        if not os.environ.get(ENGINE_KEY_ENV):
            raise ConfigError(f"engine credential missing: set {ENGINE_KEY_ENV}")
    manifest = load_manifest(args.manifest)
    adapters = _adapters_from(args)
    targets = load_corpora_by_language(args.corpus, adapters=adapters)
    targets.pop("en", None)
    english = load_english(args.english, adapters=adapters)
    defects = _audit_defects(args.audit)

    engine = None
    if not args.dry_run:
        if engine_kind == "mock":
            engine = MockEngine()
        else:
            engine = DeepLCompatibleEngine(engine_url)
    cache = TranslationCache(args.cache)

    result = run_repair(
        targets,
        english,
        manifest,
        engine,
        cache,
        defects=defects,
        reformat=reformat,
        dry_run=args.dry_run,
    )
    if result.unresolved:
        for entry, reason in result.unresolved:
            print(f"unresolved manifest entry {entry}: {reason}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    out_dir.mkdir(parents=True, exist_ok=True)
    if args.dry_run:
        print(
            f"dry run: {result.planned_batches} uncached item payloads, "
            f"{result.cache_hits} cache hits, {result.engine_calls} engine calls"
        )
        return EXIT_OK

    for language in sorted(result.corpora):
        write_jsonl_corpus(result.corpora[language], out_dir / f"corpus_{language}.jsonl")
    write_diagnostics(result.diagnostics, out_dir / "diagnostics.jsonl")
    write_run_manifest(
        out_dir,
        "repair",
        list(args.corpus) + list(args.english) + [args.manifest],
        {"engine": engine_kind, "reformat": reformat, "cache": str(args.cache)},
    )
    updated = sum(1 for r in result.diagnostics if r.status == "updated")
    queued = sum(1 for r in result.diagnostics if r.status == "manual_queue")
    print(
        f"repair: {updated} fields updated, {result.cache_hits} cache hits, "
        f"{result.engine_calls} engine calls, {queued} items queued for manual inspection"
    )
    return EXIT_OK


# --- analyze -----------------------------------------------------------------------


def _write_cells_csv(cells: Sequence[CellSummary], path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
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
            ]
        )
        for c in cells:
            writer.writerow(
                [
                    c.language,
                    c.dataset,
                    c.n,
                    repr(c.median),
                    repr(c.q1),
                    repr(c.q3),
                    repr(c.iqr),
                    "" if c.median_word_count is None else repr(c.median_word_count),
                    "" if c.spearman_rho is None else repr(c.spearman_rho),
                    "" if c.spearman_p is None else repr(c.spearman_p),
                ]
            )


def _read_cells_csv(path: Path) -> list[CellSummary]:
    cells = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            cells.append(
                CellSummary(
                    language=row["language"],
                    dataset=row["dataset"],
                    n=int(row["n"]),
                    median=float(row["median"]),
                    q1=float(row["q1"]),
                    q3=float(row["q3"]),
                    iqr=float(row["iqr"]),
                    median_word_count=(
                        float(row["median_word_count"]) if row["median_word_count"] else None
                    ),
                    spearman_rho=float(row["spearman_rho"]) if row["spearman_rho"] else None,
                    spearman_p=float(row["spearman_p"]) if row["spearman_p"] else None,
                )
            )
    return cells


def _group_by_cell(records: Sequence[SegmentScore], mode: str) -> dict[tuple[str, str], list[SegmentScore]]:
    grouped: dict[tuple[str, str], list[SegmentScore]] = {}
    for record in records:
        if record.mode == mode:
            grouped.setdefault((record.key.language, record.key.dataset), []).append(record)
    return grouped


def _compare_results(
    records: Sequence[SegmentScore],
    system_a: str,
    system_b: str,
    mode: str,
    replicates: int,
    alpha: float,
    seed: int,
) -> list[dict]:
    grouped = _group_by_cell(records, mode)
    results = []
    nonempty = 0
    for (language, dataset) in sorted(grouped):
        subset = grouped[(language, dataset)]
        paired = paired_overlap(subset, system_a, system_b, mode)
        if paired.n == 0:
            continue
        nonempty += 1
        compute = ref_based_delta if mode == "ref_based" else paired_bootstrap_ci
        result = compute(paired, replicates=replicates, alpha=alpha, seed=seed)
        results.append({"language": language, "dataset": dataset, **result.to_dict()})
    if nonempty == 0:
        raise InsufficientDataError(f"no overlapping items between {system_a} and {system_b}")
    return results


def cmd_analyze(args: argparse.Namespace, config: Mapping[str, Any]) -> int:
    out_dir = Path(resolve(args.out, None, config, "out", "out"))
    replicates = int(resolve(args.bootstrap, None, config, "bootstrap", 5000))
    alpha = float(resolve(args.alpha, None, config, "alpha", 0.05))
    seed = int(resolve(args.seed, None, config, "seed", 0))
    mode = resolve(args.mode, None, config, "mode", None)
    echo_config(
        f"analyze {args.analysis}",
        {
            "scores": args.scores,
            "bootstrap": replicates,
            "alpha": alpha,
            "seed": seed,
            "out": str(out_dir),
        },
    )
    records = load_scores(args.scores)
    out_dir.mkdir(parents=True, exist_ok=True)
    settings = {"bootstrap": replicates, "alpha": alpha, "seed": seed}

    if args.analysis == "landscape":
        mode = mode or "ref_free"
        cells = group_cells([r for r in records if r.mode == mode])
        if not cells:
            raise InsufficientDataError(f"no {mode} score records found")
        _write_cells_csv(cells, out_dir / "cells.csv")
        write_run_manifest(out_dir, "analyze landscape", [args.scores], {"mode": mode})
        print(f"landscape: {len(cells)} cells -> {out_dir / 'cells.csv'}")
        return EXIT_OK

    if args.analysis in ("compare", "refbased"):
        mode = mode or ("ref_based" if args.analysis == "refbased" else "ref_free")
        if not args.system_a or not args.system_b:
            raise ConfigError("compare needs --system-a and --system-b")
        try:
            results = _compare_results(
                records, args.system_a, args.system_b, mode, replicates, alpha, seed
            )
        except InsufficientDataError as exc:
            print(f"empty overlap: {exc}", file=sys.stderr)
            return EXIT_FINDINGS
        payload = {
            "mode": mode,
            "system_a": args.system_a,
            "system_b": args.system_b,
            "alpha": alpha,
            "replicates": replicates,
            "seed": seed,
            "results": results,
        }
        name = "refdelta.json" if args.analysis == "refbased" else "compare.json"
        (out_dir / name).write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        write_run_manifest(out_dir, f"analyze {args.analysis}", [args.scores], {**settings, "mode": mode})
        print(f"{args.analysis}: {len(results)} cells -> {out_dir / name}")
        return EXIT_OK

    # ranks
    mode = mode or "ref_free"
    systems = [s.strip() for s in (args.systems or "").split(",") if s.strip()]
    if len(systems) < 2:
        raise ConfigError("ranks needs --systems with at least two comma-separated names")
    try:
        analysis = rank_analysis(records, systems, mode=mode, alpha=alpha)
    except InsufficientDataError as exc:
        print(f"empty overlap: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    (out_dir / "ranks.json").write_text(
        json.dumps({**analysis.to_dict(), "seed": seed}, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    write_run_manifest(out_dir, "analyze ranks", [args.scores], {**settings, "mode": mode, "systems": systems})
    print(f"ranks: {len(analysis.blocks)} blocks, CD={analysis.cd:.3f} -> {out_dir / 'ranks.json'}")
    return EXIT_OK


# --- judge --------------------------------------------------------------------------


def _load_pool(pool_spec: str) -> list[AnnotatorConfig]:
    if pool_spec == "mock":
        return [
            AnnotatorConfig(annotator_id=f"mock-judge-{i}", endpoint="mock:", model_name="mock")
            for i in range(3)
        ]
    with open(pool_spec, "rb") as handle:
        data = tomllib.load(handle)
    configs = []
    for entry in data.get("annotator", []):
        annotator_id = str(entry["id"])
        endpoint = os.environ.get(url_env_for(annotator_id)) or str(entry.get("endpoint", ""))
        if not endpoint:
            raise ConfigError(
                f"annotator {annotator_id!r} has no endpoint "
                f"(set it in the pool file or via {url_env_for(annotator_id)})"
            )
        configs.append(
            AnnotatorConfig(
                annotator_id=annotator_id,
                endpoint=endpoint,
                model_name=str(entry.get("model", "")),
                temperature=float(entry.get("temperature", 0.0)),
                max_retries=int(entry.get("max_retries", 3)),
            )
        )
    if len(configs) < 2:
        raise ConfigError("annotator pool needs at least two annotators")
    return configs


def _rates_payload(rates: ErrorRates) -> dict:
    return {
        "cells": [
            {
                "language": c.language,
                "dataset": c.dataset,
                "n": c.n,
                "excluded": c.excluded,
                "rates": c.rates,
            }
            for c in rates.cells
        ],
        "shares": [
            {
                "dataset": s.dataset,
                "bucket": s.bucket,
                "major_count": s.major_count,
                "minor_count": s.minor_count,
                "major_share": s.major_share,
                "minor_share": s.minor_share,
            }
            for s in rates.shares
        ],
        "total_excluded": rates.total_excluded,
    }


def _rates_from_payload(payload: Mapping) -> ErrorRates:
    return ErrorRates(
        cells=[
            CellRates(
                language=c["language"],
                dataset=c["dataset"],
                n=int(c["n"]),
                excluded=int(c["excluded"]),
                rates={k: float(v) for k, v in c.get("rates", {}).items()},
            )
            for c in payload["cells"]
        ],
        shares=[
            ShareEntry(
                dataset=s["dataset"],
                bucket=s["bucket"],
                major_count=int(s["major_count"]),
                minor_count=int(s["minor_count"]),
            )
            for s in payload["shares"]
        ],
        total_excluded=int(payload.get("total_excluded", 0)),
    )


def cmd_judge(args: argparse.Namespace, config: Mapping[str, Any]) -> int:
    out_dir = Path(resolve(args.out, None, config, "out", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.action == "run":
        pool_spec = resolve(args.pool, None, config, "pool", "mock")
        fail_threshold = float(resolve(args.fail_threshold, None, config, "fail_threshold", 0.5))
        echo_config(
            "judge run",
            {
                "items": args.items,
                "source": args.source,
                "pool": pool_spec,
                "fail_threshold": fail_threshold,
                "out": str(out_dir),
            },
        )
        pool = _load_pool(pool_spec)
        adapters = _adapters_from(args)
        targets = load_corpora_by_language(args.items, adapters=adapters)
        targets.pop("en", None)
        english = load_english(args.source, adapters=adapters)
        store = AnnotationStore(out_dir / "annotations.jsonl")
        total = 0
        for language in sorted(targets):
            annotations = run_judging(
                english, targets[language], pool, store, fail_threshold=fail_threshold
            )
            total += len(annotations)
        write_run_manifest(
            out_dir,
            "judge run",
            list(args.items) + list(args.source),
            {"pool": [cfg.annotator_id for cfg in pool], "fail_threshold": fail_threshold},
        )
        print(f"judge run: {total} annotations in {out_dir / 'annotations.jsonl'}")
        return EXIT_OK

    # aggregate
    pool_size = int(resolve(args.pool_size, None, config, "pool_size", 3))
    echo_config(
        "judge aggregate",
        {"annotations": args.annotations, "pool_size": pool_size, "out": str(out_dir)},
    )
    store = AnnotationStore(args.annotations)
    by_key: dict[ItemKey, list[ItemAnnotation]] = {}
    for (key, _annotator), annotation in sorted(
        store.records.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1])
    ):
        by_key.setdefault(key, []).append(annotation)
    verdicts = [majority_vote(annotations, pool_size=pool_size) for annotations in by_key.values()]
    with (out_dir / "verdicts.jsonl").open("w", encoding="utf-8") as handle:
        for verdict in verdicts:
            handle.write(json.dumps(verdict.to_dict(), ensure_ascii=False) + "\n")
    rates = error_rates(verdicts)
    payload = _rates_payload(rates)
    (out_dir / "rates.json").write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    _, rates_csv = render_error_overview(rates) if rates.cells else ("", "")
    (out_dir / "rates.csv").write_text(rates_csv, encoding="utf-8")
    write_run_manifest(out_dir, "judge aggregate", [args.annotations], {"pool_size": pool_size})
    print(
        f"judge aggregate: {len(verdicts)} verdicts, {rates.total_excluded} excluded "
        f"-> {out_dir / 'rates.json'}"
    )
    return EXIT_OK


# --- report -----------------------------------------------------------------------


def _read_compare(path: Path) -> list[tuple[str, str, DeltaResult]]:
    payload = json.loads(path.read_text(encoding="utf-8"))
    entries = []
    for row in payload["results"]:
        entries.append(
            (
                row["language"],
                row["dataset"],
                DeltaResult(
                    system_a=row["system_a"],
                    system_b=row["system_b"],
                    mode=row["mode"],
                    n=int(row["n"]),
                    delta=float(row["delta"]),
                    win_rate=float(row["win_rate"]),
                    ci_low=float(row["ci_low"]),
                    ci_high=float(row["ci_high"]),
                    alpha=float(row["alpha"]),
                    replicates=int(row["replicates"]),
                    seed=int(row["seed"]),
                    significant=bool(row["significant"]),
                ),
            )
        )
    return entries


def _read_ranks(path: Path) -> RankAnalysis:
    payload = json.loads(path.read_text(encoding="utf-8"))
    return RankAnalysis(
        systems=tuple(payload["systems"]),
        blocks=tuple(payload["blocks"]),
        block_sizes={k: int(v) for k, v in payload["block_sizes"].items()},
        per_block_medians=payload["per_block_medians"],
        per_block_ranks=payload["per_block_ranks"],
        avg_ranks={k: float(v) for k, v in payload["avg_ranks"].items()},
        friedman_chi2=float(payload["friedman_chi2"]),
        friedman_p=float(payload["friedman_p"]),
        cd=float(payload["cd"]),
        q_alpha=float(payload["q_alpha"]),
        alpha=float(payload["alpha"]),
        pairwise=[
            PairVerdict(
                system_a=v["system_a"],
                system_b=v["system_b"],
                gap=float(v["gap"]),
                significant=bool(v["significant"]),
            )
            for v in payload["pairwise"]
        ],
    )


def _report_one(kind: str, in_dir: Path, out_dir: Path) -> None:
    if kind == "landscape":
        cells = _read_cells_csv(in_dir / "cells.csv")
        svg, csv_text = render_landscape(cells)
        (out_dir / "landscape.svg").write_text(svg, encoding="utf-8")
        (out_dir / "landscape.csv").write_text(csv_text, encoding="utf-8")
    elif kind == "delta":
        entries = _read_compare(in_dir / "compare.json")
        svg, csv_text = render_delta_heatmap(entries)
        (out_dir / "delta.svg").write_text(svg, encoding="utf-8")
        (out_dir / "delta.csv").write_text(csv_text, encoding="utf-8")
    elif kind == "cd":
        analysis = _read_ranks(in_dir / "ranks.json")
        (out_dir / "cd.svg").write_text(render_cd_diagram(analysis), encoding="utf-8")
    elif kind == "refdelta":
        entries = _read_compare(in_dir / "refdelta.json")
        datasets = {dataset for _, dataset, _ in entries}
        labeled = [
            (language if len(datasets) == 1 else f"{language}/{dataset}", result)
            for language, dataset, result in entries
        ]
        svg, csv_text = render_ref_delta_bars(labeled)
        (out_dir / "refdelta.svg").write_text(svg, encoding="utf-8")
        (out_dir / "refdelta.csv").write_text(csv_text, encoding="utf-8")
    elif kind == "errors":
        payload = json.loads((in_dir / "rates.json").read_text(encoding="utf-8"))
        svg, csv_text = render_error_overview(_rates_from_payload(payload))
        (out_dir / "errors.svg").write_text(svg, encoding="utf-8")
        (out_dir / "errors.csv").write_text(csv_text, encoding="utf-8")
    else:
        raise ConfigError(f"unknown report kind {kind!r}")


REPORT_SOURCES = {
    "landscape": "cells.csv",
    "delta": "compare.json",
    "cd": "ranks.json",
    "refdelta": "refdelta.json",
    "errors": "rates.json",
}


def cmd_report(args: argparse.Namespace, config: Mapping[str, Any]) -> int:
    in_dir = Path(args.in_dir)
    out_dir = Path(resolve(args.out, None, config, "out", "out"))
    echo_config("report", {"in": str(in_dir), "kind": args.kind, "out": str(out_dir)})
    kinds = list(REPORT_SOURCES) if args.kind == "all" else [args.kind]
    available = [k for k in kinds if (in_dir / REPORT_SOURCES[k]).is_file()]
    if args.kind != "all":
        missing = [k for k in kinds if k not in available]
        if missing:
            print(
                f"missing input for {missing[0]}: {in_dir / REPORT_SOURCES[missing[0]]}",
                file=sys.stderr,
            )
            return EXIT_INPUT_ERROR
    elif not available:
        print(f"no renderable artifacts found in {in_dir}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    out_dir.mkdir(parents=True, exist_ok=True)
    for kind in available:
        try:
            _report_one(kind, in_dir, out_dir)
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            print(f"corrupt input for {kind}: {exc}", file=sys.stderr)
            return EXIT_INPUT_ERROR
    write_run_manifest(
        out_dir,
        "report",
        [in_dir / REPORT_SOURCES[k] for k in available],
        {"kinds": available},
    )
    print(f"report: rendered {', '.join(available)} -> {out_dir}")
    return EXIT_OK


# --- argument wiring ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transaudit",
        description="Audit, repair, score-compare, judge, and report on "
        "machine-translated benchmark suites.",
    )
    parser.add_argument("--config", help="TOML config file with a [defaults] table")
    parser.add_argument("--version", action="version", version=f"transaudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_audit = sub.add_parser("audit", help="run the structural integrity audit")
    p_audit.add_argument("--corpus", nargs="+", required=True, help="translated corpus JSONL files")
    p_audit.add_argument("--english", nargs="+", required=True, help="English source JSONL files")
    p_audit.add_argument("--languages", help="comma-separated expected target languages")
    p_audit.add_argument("--adapters", help="JSON field-name adapter table override")
    p_audit.add_argument("--out")

    p_repair = sub.add_parser("repair", help="re-translate defective fields per manifest")
    p_repair.add_argument("--corpus", nargs="+", required=True)
    p_repair.add_argument("--english", nargs="+", required=True)
    p_repair.add_argument("--manifest", required=True)
    p_repair.add_argument("--audit", help="audit_report.json supplying defective fields")
    p_repair.add_argument("--engine", choices=["mock", "deepl"])
    p_repair.add_argument("--engine-url")
    p_repair.add_argument("--cache", help="persistent translation cache JSONL")
    p_repair.add_argument("--reformat", choices=["none", "prefix_context"])
    p_repair.add_argument("--adapters", help="JSON field-name adapter table override")
    p_repair.add_argument("--dry-run", action="store_true")
    p_repair.add_argument("--out")

    p_analyze = sub.add_parser("analyze", help="statistical score analysis")
    p_analyze.add_argument("analysis", choices=["landscape", "compare", "ranks", "refbased"])
    p_analyze.add_argument("--scores", required=True)
    p_analyze.add_argument("--system-a")
    p_analyze.add_argument("--system-b")
    p_analyze.add_argument("--systems", help="comma-separated systems for rank testing")
    p_analyze.add_argument("--mode", choices=["ref_free", "ref_based"])
    p_analyze.add_argument("--bootstrap", type=int)
    p_analyze.add_argument("--alpha", type=float)
    p_analyze.add_argument("--seed", type=int)
    p_analyze.add_argument("--out")

    p_judge = sub.add_parser("judge", help="span-level error annotation")
    p_judge.add_argument("action", choices=["run", "aggregate"])
    p_judge.add_argument("--items", nargs="+", help="translated corpus JSONL files")
    p_judge.add_argument("--source", nargs="+", help="English source JSONL files")
    p_judge.add_argument("--pool", help="annotator pool TOML, or 'mock'")
    p_judge.add_argument("--fail-threshold", type=float)
    p_judge.add_argument("--annotations", help="annotations JSONL (aggregate)")
    p_judge.add_argument("--pool-size", type=int)
    p_judge.add_argument("--adapters", help="JSON field-name adapter table override")
    p_judge.add_argument("--out")

    p_report = sub.add_parser("report", help="render figures from analysis artifacts")
    p_report.add_argument("--in", dest="in_dir", required=True)
    p_report.add_argument(
        "--kind", choices=["landscape", "delta", "cd", "refdelta", "errors", "all"], default="all"
    )
    p_report.add_argument("--out")
    return parser


COMMANDS = {
    "audit": cmd_audit,
    "repair": cmd_repair,
    "analyze": cmd_analyze,
    "judge": cmd_judge,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("TRANSAUDIT_LOG", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config_file(args.config)
        if args.command == "judge" and args.action == "run":
            if not args.items or not args.source:
                raise ConfigError("judge run needs --items and --source")
        if args.command == "judge" and args.action == "aggregate" and not args.annotations:
            raise ConfigError("judge aggregate needs --annotations")
        return COMMANDS[args.command](args, config)
    except (EngineUnavailableError, AuthFailureError, EngineError, JudgeRunError) as exc:
        print(f"external service failure: {exc}", file=sys.stderr)
        return EXIT_SERVICE_FAILURE
    except (TransauditError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
