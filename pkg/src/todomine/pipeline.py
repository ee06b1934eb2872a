"""End-to-end harvesting: repositories in, labeled splits and a run manifest out."""
from __future__ import annotations

import configparser
import hashlib
import json
import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from todomine import __version__
from todomine.dataset import (
    TripleRecord,
    dedup,
    dumps_records,
    read_records,
    split,
    stable_key,
    stats,
    write_records,
)
from todomine.diff import LineKind, parse_unified_diff
from todomine.errors import (
    ConfigError,
    DiffParseError,
    EmptyMessage,
    InvalidPattern,
    ManifestConfigMismatch,
)
from todomine.extract import SYNTAXES, Skip, SkipReason, split_triple
from todomine.ingest import LANGUAGES, CommitRecord, RepoSource, is_todo_related, list_commits, load_repo_list
from todomine.labeler import Label, label_triple
from todomine.normalize import NormalizationConfig, check_size, normalize_message

log = logging.getLogger(__name__)

COUNTERS = (
    "commits",
    "todo_commits",
    "oversized",
    "skipped_malformed",
    "skipped_no_todo",
    "skipped_multi_todo",
    "discarded_added",
    "skipped_empty_message",
    "positive",
    "negative",
)
# every TODO-related commit ends in exactly one of these
OUTCOMES = COUNTERS[2:]

MANIFEST = "manifest.json"


@dataclass(frozen=True)
class PipelineConfig:
    repo_list_path: Optional[Path]
    output_dir: Path
    language: Optional[str] = None
    seed: int = 0
    worker_count: int = 1
    strict: bool = False
    dedup: bool = False
    normalize: NormalizationConfig = field(default_factory=NormalizationConfig)
    repos: tuple = ()

    def __post_init__(self):
        if self.worker_count < 1:
            raise ConfigError("workers must be >= 1")
        if not -(1 << 63) <= self.seed < (1 << 64):
            raise ConfigError("seed must be a 64-bit integer")
        if self.language is not None and self.language not in LANGUAGES:
            raise ConfigError(f"unknown language {self.language!r}")

    @property
    def languages(self) -> tuple[str, ...]:
        return (self.language,) if self.language else LANGUAGES

    def sources(self) -> list[RepoSource]:
        if self.repos:
            sources = list(self.repos)
        elif self.repo_list_path is not None:
            try:
                sources = load_repo_list(self.repo_list_path)
            except (OSError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
        else:
            sources = []
        sources = [s for s in sources if s.language in self.languages]
        return sorted(sources, key=lambda s: s.star_rank)

    def digest(self) -> str:
        """Hash of everything that affects outputs; worker count and paths of outputs excluded."""
        payload = {
            "repos": [[s.path_or_url, s.language, s.star_rank] for s in self.sources()],
            "languages": list(self.languages),
            "seed": self.seed,
            "strict": self.strict,
            "dedup": self.dedup,
            "normalize": self.normalize.as_dict(),
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def load_config(path=None, **overrides) -> PipelineConfig:
    """Read an INI config (sections ``pipeline`` and ``normalize``); keyword overrides win."""
    parser = configparser.ConfigParser(interpolation=None)
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as f:
                parser.read_file(f)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"{path}: {exc}") from None
        base = path.parent
    section = dict(parser["pipeline"]) if parser.has_section("pipeline") else {}
    try:
        norm = NormalizationConfig.from_section(dict(parser["normalize"]) if parser.has_section("normalize") else {})
    except InvalidPattern as exc:
        raise ConfigError(f"[normalize] {exc}") from None

    def resolve(p):
        return None if p in (None, "") else (base / p if not os.path.isabs(p) else Path(p))

    try:
        values = {
            "repo_list_path": resolve(section.get("repo_list")),
            "output_dir": resolve(section.get("output_dir")),
            "language": section.get("language") or None,
            "seed": int(section.get("seed", "0")),
            "worker_count": int(section.get("workers", "1")),
            "strict": _bool(section.get("strict", "false")),
            "dedup": _bool(section.get("dedup", "false")),
        }
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    unknown = set(section) - {"repo_list", "output_dir", "language", "seed", "workers", "strict", "dedup"}
    if unknown:
        raise ConfigError(f"unknown [pipeline] keys: {sorted(unknown)}")
    for key, value in overrides.items():
        if value is not None:
            values[key] = Path(value) if key in ("repo_list_path", "output_dir") else value
    if values["output_dir"] is None:
        raise ConfigError("no output directory given")
    return PipelineConfig(normalize=norm, **values)


# -- per-commit and per-repo work ---------------------------------------------


def process_commit(record: CommitRecord, language: str, cfg: PipelineConfig):
    """Run one commit through the filters.

    Returns ``(outcome, record_or_None)``; outcome is None for commits that
    are not TODO-related, else one of :data:`OUTCOMES`.
    """
    if not is_todo_related(record.diff_text):
        return None, None
    if not check_size(record, cfg.normalize):
        return "oversized", None
    try:
        diff = parse_unified_diff(record.diff_text, strict=cfg.strict)
    except DiffParseError:
        if cfg.strict:
            raise
        return "skipped_malformed", None
    try:
        message = normalize_message(record.message, cfg.normalize)
    except EmptyMessage:
        message = None
    result = split_triple(diff, message or "", SYNTAXES[language], record, cfg.normalize)
    if isinstance(result, Skip):
        return ("skipped_no_todo" if result.reason is SkipReason.NO_TODO else "skipped_multi_todo"), None
    label = label_triple(result.scope)
    if label is Label.DISCARD:
        return "discarded_added", None
    if message is None:
        return "skipped_empty_message", None
    return label.value, TripleRecord.from_triple(result, label)


def process_records(commits, language: str, cfg: PipelineConfig):
    counters = dict.fromkeys(COUNTERS, 0)
    out = []
    for record in commits:
        counters["commits"] += 1
        outcome, triple = process_commit(record, language, cfg)
        if outcome is None:
            continue
        counters["todo_commits"] += 1
        counters[outcome] += 1
        if triple is not None:
            out.append(triple)
    out.sort(key=stable_key)
    return out, counters


def _shard_name(index: int, source: RepoSource) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]+", "_", source.name)
    return f"shards/{index:05d}_{safe}.jsonl"


def _run_repo(job):
    """Worker entry point: mine one repository into its shard file."""
    index, source, cfg = job
    shard = cfg.output_dir / _shard_name(index, source)
    try:
        commits = list_commits(source, strict=cfg.strict)
        records, counters = process_records(commits, source.language, cfg)
        write_records(records, shard)
        return index, "done", counters, None
    except Exception as exc:  # noqa: BLE001 - a failing repo must not stop the run
        log.warning("%s failed: %s", source.name, exc)
        return index, "failed", dict.fromkeys(COUNTERS, 0), f"{type(exc).__name__}: {exc}"


# -- manifest ----------------------------------------------------------------


def _empty_manifest(cfg: PipelineConfig, sources) -> dict:
    return {
        "tool_version": __version__,
        "config_digest": cfg.digest(),
        "repos": [
            {
                "name": s.name,
                "path": s.path_or_url,
                "language": s.language,
                "star_rank": s.star_rank,
                "status": "pending",
                "shard": _shard_name(i, s),
                "counters": dict.fromkeys(COUNTERS, 0),
            }
            for i, s in enumerate(sources)
        ],
        "counters": {lang: dict.fromkeys(COUNTERS, 0) for lang in cfg.languages},
    }


def _totals(manifest: dict, languages) -> dict:
    totals = {lang: dict.fromkeys(COUNTERS, 0) for lang in languages}
    for repo in manifest["repos"]:
        if repo["status"] == "done":
            for k, v in repo["counters"].items():
                totals[repo["language"]][k] += v
    return totals


def write_manifest(manifest: dict, path: Path) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def read_manifest(path) -> dict:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


# -- the run -----------------------------------------------------------------


def run_pipeline(cfg: PipelineConfig, resume: bool = False) -> dict:
    """Harvest every repository in ``cfg`` and write splits, stats and the manifest.

    Outputs are byte-identical for any ``worker_count``. With ``resume``,
    repositories already marked done in an existing manifest are not mined
    again.
    """
    out = cfg.output_dir
    sources = cfg.sources()
    manifest_path = out / MANIFEST
    if out.exists() and any(out.iterdir()):
        if not resume:
            raise ConfigError(f"{out} is not empty; pass --resume to continue a previous run")
        if not manifest_path.exists():
            raise ConfigError(f"{out} has no {MANIFEST} to resume from")
        manifest = read_manifest(manifest_path)
        if manifest.get("config_digest") != cfg.digest():
            raise ManifestConfigMismatch("configuration changed since the manifest was written")
    else:
        manifest = _empty_manifest(cfg, sources)
    (out / "shards").mkdir(parents=True, exist_ok=True)

    jobs = [
        (i, s, cfg)
        for i, (s, entry) in enumerate(zip(sources, manifest["repos"]))
        if entry["status"] != "done" or not (out / entry["shard"]).exists()
    ]
    for i, _, _ in jobs:
        manifest["repos"][i]["status"] = "pending"
    write_manifest(manifest, manifest_path)

    def record(result):
        index, status, counters, error = result
        entry = manifest["repos"][index]
        entry["status"] = status
        entry["counters"] = counters
        entry.pop("error", None)
        if error:
            entry["error"] = error
        manifest["counters"] = _totals(manifest, cfg.languages)
        write_manifest(manifest, manifest_path)

    if cfg.worker_count == 1 or len(jobs) <= 1:
        for job in jobs:
            record(_run_repo(job))
    else:
        with ProcessPoolExecutor(max_workers=cfg.worker_count) as pool:
            for result in pool.map(_run_repo, jobs):
                record(result)

    merge_outputs(cfg, manifest)
    manifest["counters"] = _totals(manifest, cfg.languages)
    write_manifest(manifest, manifest_path)
    return manifest


def merge_outputs(cfg: PipelineConfig, manifest: dict) -> None:
    """Combine finished shards into per-language splits and statistics."""
    out = cfg.output_dir
    by_lang: dict[str, list[TripleRecord]] = {lang: [] for lang in cfg.languages}
    for entry in manifest["repos"]:
        if entry["status"] == "done":
            by_lang[entry["language"]].extend(read_records(out / entry["shard"]))
    all_records = []
    for lang, records in by_lang.items():
        records.sort(key=stable_key)
        if cfg.dedup:
            records = dedup(records)
        if records:
            records = split(records, cfg.seed).apply(records)
        lang_dir = out / lang
        lang_dir.mkdir(exist_ok=True)
        for name in ("train", "val", "test"):
            write_records([r for r in records if r.split == name], lang_dir / f"{name}.jsonl")
        all_records.extend(records)
    totals = _totals(manifest, cfg.languages)
    report = stats(all_records, {lang: totals[lang]["todo_commits"] for lang in cfg.languages})
    report.languages = {lang: report.languages[lang] for lang in cfg.languages}
    (out / "stats.txt").write_text(report.render_table(), encoding="utf-8")
    (out / "stats.json").write_text(report.to_json(), encoding="utf-8")


def partial_failure(manifest: dict) -> bool:
    return any(r["status"] != "done" for r in manifest["repos"])


def resume(cfg: PipelineConfig, manifest: Optional[dict] = None) -> dict:
    """Continue a run: failed or pending repositories are mined, finished ones reused."""
    if manifest is not None and manifest.get("config_digest") != cfg.digest():
        raise ManifestConfigMismatch("configuration changed since the manifest was written")
    return run_pipeline(cfg, resume=True)
