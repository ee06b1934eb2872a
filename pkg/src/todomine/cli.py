"""Command line entry point: ``todomine <subcommand> ...``.

Exit codes: 0 success, 1 configuration error, 2 partial failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from todomine import dataset
from todomine.diff import parse_unified_diff
from todomine.errors import ConfigError, TodoMineError
from todomine.extract import SYNTAXES, Triple, split_triple
from todomine.ingest import RepoSource, is_todo_related, list_commits, write_patch_archive
from todomine.labeler import Label, label_triple
from todomine.normalize import check_size, normalize_message
from todomine.pipeline import load_config, partial_failure, read_manifest, run_pipeline

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2

log = logging.getLogger("todomine")


def _add_common(p, output_help="output path"):
    p.add_argument("--config", type=Path, help="INI config file")
    p.add_argument("--output", type=Path, help=output_help)


def cmd_harvest(args) -> int:
    cfg = load_config(
        args.config,
        repo_list_path=args.repos,
        output_dir=args.output,
        language=args.lang,
        seed=args.seed,
        worker_count=args.workers,
        strict=True if args.strict else None,
        dedup=True if args.dedup else None,
    )
    manifest = run_pipeline(cfg, resume=args.resume)
    print(json.dumps(manifest["counters"], indent=2))
    if partial_failure(manifest):
        failed = [r["name"] for r in manifest["repos"] if r["status"] != "done"]
        print(f"failed repositories: {', '.join(failed)}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_extract(args) -> int:
    cfg = load_config(args.config, output_dir=args.output or Path("."), strict=True if args.strict else None)
    source = RepoSource(str(args.repo), args.lang)
    triples = []
    for record in list_commits(source, strict=cfg.strict):
        if not is_todo_related(record.diff_text) or not check_size(record, cfg.normalize):
            continue
        try:
            diff = parse_unified_diff(record.diff_text, strict=cfg.strict)
            msg = normalize_message(record.message, cfg.normalize)
        except TodoMineError:
            continue
        result = split_triple(diff, msg, SYNTAXES[args.lang], record, cfg.normalize)
        if isinstance(result, Triple):
            triples.append(result)
    if args.output:
        dataset.write_triples(triples, args.output)
    else:
        for t in triples:
            print(dataset.triple_to_json(t))
    return EXIT_OK


def cmd_label(args) -> int:
    records = []
    discarded = 0
    for t in dataset.read_triples(args.input):
        label = label_triple(t.scope)
        if label is Label.DISCARD:
            discarded += 1
            continue
        records.append(dataset.TripleRecord.from_triple(t, label))
    dataset.write_records(records, args.output)
    print(f"{len(records)} labeled, {discarded} discarded", file=sys.stderr)
    return EXIT_OK


def cmd_split(args) -> int:
    records = dataset.read_records(args.input)
    args.output.mkdir(parents=True, exist_ok=True)
    for lang in sorted({r.language for r in records}):
        subset = sorted((r for r in records if r.language == lang), key=dataset.stable_key)
        if args.dedup:
            subset = dataset.dedup(subset)
        subset = dataset.split(subset, args.seed).apply(subset)
        lang_dir = args.output / lang
        lang_dir.mkdir(exist_ok=True)
        for name in dataset.SPLITS:
            dataset.write_records([r for r in subset if r.split == name], lang_dir / f"{name}.jsonl")
    return EXIT_OK


def cmd_stats(args) -> int:
    records = []
    for path in args.input:
        paths = sorted(path.rglob("*.jsonl")) if path.is_dir() else [path]
        for p in paths:
            if "shards" not in p.parts:
                records.extend(dataset.read_records(p))
    todo_commits = {}
    if args.manifest:
        todo_commits = {lang: c["todo_commits"] for lang, c in read_manifest(args.manifest)["counters"].items()}
    report = dataset.stats(records, todo_commits)
    if args.output:
        args.output.mkdir(parents=True, exist_ok=True)
        (args.output / "stats.txt").write_text(report.render_table(), encoding="utf-8")
        (args.output / "stats.json").write_text(report.to_json(), encoding="utf-8")
    print(report.render_table(), end="")
    return EXIT_OK


def cmd_sample_review(args) -> int:
    records = dataset.read_records(args.input)
    rows = dataset.sample_for_review(records, args.n_pos, args.n_neg, args.seed)
    dataset.write_review_sheet(rows, args.output)
    print(f"wrote {len(rows)} rows to {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_archive(args) -> int:
    source = RepoSource(str(args.repo), args.lang or "python")
    write_patch_archive(list_commits(source, strict=args.strict), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="todomine", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("harvest", help="run the full pipeline over a repository list")
    _add_common(p, "output directory")
    p.add_argument("--repos", type=Path, help="repository list (CSV: path,language,star_rank)")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--lang", choices=("python", "java"))
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_harvest)

    p = sub.add_parser("extract", help="mine one repository into unlabeled triples")
    _add_common(p, "triples file (JSONL); stdout if omitted")
    p.add_argument("--repo", type=Path, required=True)
    p.add_argument("--lang", choices=("python", "java"), required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("label", help="label triples, dropping newly added TODOs")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("split", help="80/10/10 seeded split of labeled records")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dedup", action="store_true")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="counts table for record files or directories")
    p.add_argument("--input", type=Path, nargs="+", required=True)
    p.add_argument("--manifest", type=Path)
    p.add_argument("--output", type=Path)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sample-review", help="CSV sheet of random samples for manual checking")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--n-pos", type=int, default=100)
    p.add_argument("--n-neg", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample_review)

    p = sub.add_parser("archive", help="export a git repository as a patch archive")
    p.add_argument("--repo", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--lang", choices=("python", "java"))
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_archive)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TodoMineError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
