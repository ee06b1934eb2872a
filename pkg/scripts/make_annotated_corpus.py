#!/usr/bin/env python3
"""Materialize the hand-annotated three-repository test corpus for manual runs.

    python3 scripts/make_annotated_corpus.py DIR
    todomine harvest --repos DIR/repos.csv --output DIR/out
"""
import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from annotated_corpus import build_corpus  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dir", type=Path)
    args = ap.parse_args()
    args.dir.mkdir(parents=True, exist_ok=True)
    corpus = build_corpus(args.dir)
    print(f"wrote {corpus.repo_list}")
    print("expected counters:")
    print(json.dumps(corpus.expected_counters(), indent=2))


if __name__ == "__main__":
    main()
