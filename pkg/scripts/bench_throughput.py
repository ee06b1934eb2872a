#!/usr/bin/env python3
"""Time the full pipeline over synthetic commits stored as patch archives.

    python3 scripts/bench_throughput.py [--commits N] [--workers N] [--seed N]
"""
import argparse
import tempfile
import time
from pathlib import Path

from todomine.ingest import write_patch_archive
from todomine.pipeline import load_config, run_pipeline
from todomine.synth import synthetic_commits


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--commits", type=int, default=10_000)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        rows = ["path,language,star_rank"]
        for k, language in enumerate(("python", "java")):
            write_patch_archive(synthetic_commits(args.commits // 2, language, args.seed + k, language), root / language)
            rows.append(f"{language},{language},{k + 1}")
        (root / "repos.csv").write_text("\n".join(rows) + "\n")
        cfg = load_config(repo_list_path=root / "repos.csv", output_dir=root / "out", worker_count=args.workers)
        start = time.perf_counter()
        manifest = run_pipeline(cfg)
        elapsed = time.perf_counter() - start

    n = sum(c["commits"] for c in manifest["counters"].values())
    print(f"{n} commits in {elapsed:.2f}s ({n / elapsed:,.0f} commits/s, workers={args.workers})")
    for lang, c in manifest["counters"].items():
        print(lang, {k: v for k, v in c.items() if v})


if __name__ == "__main__":
    main()
