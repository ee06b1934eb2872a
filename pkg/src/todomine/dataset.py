"""Labeled records on disk, seeded splits, statistics and review sheets."""
from __future__ import annotations

import csv
import json
import os
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from todomine.diff import LineKind
from todomine.errors import EmptyDataset, InsufficientSamples, IoFailure, SchemaViolation
from todomine.extract import Triple
from todomine.ingest import LANGUAGES
from todomine.labeler import Label

SPLITS = ("train", "val", "test")
FIELDS = ("repo", "commit_id", "language", "label", "split", "todo_comment", "code_change", "commit_msg", "timestamp")
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class TripleRecord:
    repo: str
    commit_id: str
    language: str
    label: Label
    todo_comment: str
    code_change: str
    commit_msg: str
    timestamp: int = 0
    split: Optional[str] = None

    def __post_init__(self):
        if self.label is Label.DISCARD:
            raise ValueError("discarded triples are never recorded")
        if self.split is not None and self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")

    @property
    def key(self) -> tuple[str, str]:
        return (self.repo, self.commit_id)

    @classmethod
    def from_triple(cls, triple, label: Label) -> "TripleRecord":
        return cls(
            triple.repo,
            triple.commit_id,
            triple.language,
            label,
            triple.todo_comment,
            triple.code_change,
            triple.commit_msg,
            triple.timestamp,
        )


def stable_key(record) -> tuple:
    return (record.repo, record.timestamp, record.commit_id)


# -- deterministic shuffling -------------------------------------------------


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood); identical output on every platform."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - (1 << 64) % bound
        while True:
            x = self.next()
            if x < limit:
                return x % bound


def shuffled(items: Sequence, rng: SplitMix64) -> list:
    """Fisher-Yates shuffle drawing indices from ``rng``."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def _check_seed(seed: int) -> int:
    if not -(1 << 63) <= seed < (1 << 64):
        raise ValueError("seed must fit in 64 bits")
    return seed & _MASK64


# -- splitting ---------------------------------------------------------------


def split_sizes(n: int) -> tuple[int, int, int]:
    train = n * 4 // 5
    rest = n - train
    val = rest // 2
    return train, val, rest - val


@dataclass(frozen=True)
class DatasetSplit:
    seed: int
    assignment: Mapping[tuple[str, str], str]
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)

    def sizes(self) -> dict[str, int]:
        counts = Counter(self.assignment.values())
        return {name: counts.get(name, 0) for name in SPLITS}

    def apply(self, records: Iterable[TripleRecord]) -> list[TripleRecord]:
        return [replace(r, split=self.assignment[r.key]) for r in records]


def split(records: Sequence[TripleRecord], seed: int) -> DatasetSplit:
    """Assign 80/10/10 train/val/test after a seeded shuffle.

    Records are first put in stable-key order, so the assignment does not
    depend on the order they were passed in.
    """
    if not records:
        raise EmptyDataset("cannot split an empty dataset")
    ordered = sorted(records, key=stable_key)
    keys = [r.key for r in ordered]
    if len(set(keys)) != len(keys):
        raise ValueError("records must have unique (repo, commit_id) keys")
    order = shuffled(keys, SplitMix64(_check_seed(seed)))
    train, val, _ = split_sizes(len(order))
    assignment = {}
    for i, key in enumerate(order):
        assignment[key] = "train" if i < train else "val" if i < train + val else "test"
    return DatasetSplit(seed, assignment)


def dedup(records: Sequence[TripleRecord]) -> list[TripleRecord]:
    """Drop records whose (todo_comment, code_change) already appeared earlier in stable-key order."""
    seen = set()
    out = []
    for r in sorted(records, key=stable_key):
        sig = (r.language, r.todo_comment, r.code_change)
        if sig in seen:
            continue
        seen.add(sig)
        out.append(r)
    return out


# -- statistics --------------------------------------------------------------

_STAT_ROWS = (
    ("todo_commits", "# TODO Commits"),
    ("positive", "# Positive samples"),
    ("negative", "# Negative samples"),
    ("train", "# Train Set"),
    ("val", "# Val Set"),
    ("test", "# Test Set"),
)


@dataclass
class LanguageCounts:
    todo_commits: int = 0
    positive: int = 0
    negative: int = 0
    train: int = 0
    val: int = 0
    test: int = 0


@dataclass
class CountsReport:
    languages: dict = field(default_factory=lambda: {lang: LanguageCounts() for lang in LANGUAGES})

    def as_dict(self) -> dict:
        return {lang: asdict(c) for lang, c in self.languages.items()}

    def render_table(self) -> str:
        """Fixed-width table, one block per language, rows in publication order."""
        label_w = max(len(label) for _, label in _STAT_ROWS)
        rows = [f"{'Language':<10}{'Statistic':<{label_w + 2}}{'Count':>10}"]
        for lang, counts in self.languages.items():
            for i, (attr, label) in enumerate(_STAT_ROWS):
                name = lang.capitalize() if i == 0 else ""
                rows.append(f"{name:<10}{label:<{label_w + 2}}{getattr(counts, attr):>10,}")
        return "\n".join(rows) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=False) + "\n"


def stats(records: Iterable[TripleRecord], todo_commit_counts: Optional[Mapping[str, int]] = None) -> CountsReport:
    report = CountsReport()
    for lang, n in (todo_commit_counts or {}).items():
        report.languages[lang].todo_commits = n
    for r in records:
        counts = report.languages[r.language]
        if r.label is Label.POSITIVE:
            counts.positive += 1
        else:
            counts.negative += 1
        if r.split is not None:
            setattr(counts, r.split, getattr(counts, r.split) + 1)
    return report


# -- review sheets -----------------------------------------------------------

REVIEW_COLUMNS = ("repo", "commit_id", "language", "label", "code_change", "todo_comment", "commit_msg", "verdict")


@dataclass(frozen=True)
class ReviewRow:
    repo: str
    commit_id: str
    language: str
    label: str
    code_change: str
    todo_comment: str
    commit_msg: str
    verdict: str = ""


def sample_for_review(records: Sequence[TripleRecord], n_pos: int, n_neg: int, seed: int) -> list[ReviewRow]:
    """Draw ``n_pos`` positives and ``n_neg`` negatives without replacement."""
    rng = SplitMix64(_check_seed(seed))
    rows = []
    for label, want in ((Label.POSITIVE, n_pos), (Label.NEGATIVE, n_neg)):
        pool = sorted((r for r in records if r.label is label), key=stable_key)
        if want > len(pool):
            raise InsufficientSamples(label.value, len(pool), want)
        for r in shuffled(pool, rng)[:want]:
            rows.append(ReviewRow(r.repo, r.commit_id, r.language, r.label.value, r.code_change, r.todo_comment, r.commit_msg))
    return rows


def write_review_sheet(rows: Iterable[ReviewRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(REVIEW_COLUMNS)
        for row in rows:
            writer.writerow([getattr(row, c) for c in REVIEW_COLUMNS])


def read_review_sheet(path) -> list[ReviewRow]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            return []
        if tuple(header) != REVIEW_COLUMNS:
            raise SchemaViolation(1, f"unexpected review sheet header {header}")
        return [ReviewRow(*row) for row in reader]


# -- line-delimited records --------------------------------------------------


def record_to_json(r: TripleRecord) -> str:
    obj = {
        "repo": r.repo,
        "commit_id": r.commit_id,
        "language": r.language,
        "label": r.label.value,
        "split": r.split,
        "todo_comment": r.todo_comment,
        "code_change": r.code_change,
        "commit_msg": r.commit_msg,
        "timestamp": r.timestamp,
    }
    return json.dumps(obj, ensure_ascii=False)


def record_from_json(line: str, line_no: int = 1) -> TripleRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(line_no, f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict) or tuple(obj) != FIELDS:
        raise SchemaViolation(line_no, f"fields must be exactly {', '.join(FIELDS)} in that order")
    for name in ("repo", "commit_id", "todo_comment", "code_change", "commit_msg"):
        if not isinstance(obj[name], str):
            raise SchemaViolation(line_no, f"{name} must be a string")
    if obj["language"] not in LANGUAGES:
        raise SchemaViolation(line_no, f"unknown language {obj['language']!r}")
    if obj["label"] not in (Label.POSITIVE.value, Label.NEGATIVE.value):
        raise SchemaViolation(line_no, f"label must be positive or negative, got {obj['label']!r}")
    if obj["split"] is not None and obj["split"] not in SPLITS:
        raise SchemaViolation(line_no, f"unknown split {obj['split']!r}")
    if not isinstance(obj["timestamp"], int) or isinstance(obj["timestamp"], bool):
        raise SchemaViolation(line_no, "timestamp must be an integer")
    return TripleRecord(
        obj["repo"],
        obj["commit_id"],
        obj["language"],
        Label(obj["label"]),
        obj["todo_comment"],
        obj["code_change"],
        obj["commit_msg"],
        obj["timestamp"],
        obj["split"],
    )


def dumps_records(records: Iterable[TripleRecord]) -> str:
    return "".join(record_to_json(r) + "\n" for r in records)


def write_records(records: Iterable[TripleRecord], path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            f.write(dumps_records(records))
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc


def loads_records(text: str) -> list[TripleRecord]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [record_from_json(line, i) for i, line in enumerate(lines, 1)]


def read_records(path) -> list[TripleRecord]:
    try:
        with open(path, encoding="utf-8", newline="") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    return loads_records(text)


# -- unlabeled triples (output of the extract stage) --------------------------

TRIPLE_FIELDS = ("repo", "commit_id", "language", "scope", "todo_comment", "code_change", "commit_msg", "timestamp")
_SCOPE_NAMES = {"added": "+", "removed": "-", "equal": " "}


def triple_to_json(t) -> str:
    obj = {
        "repo": t.repo,
        "commit_id": t.commit_id,
        "language": t.language,
        "scope": t.scope.name.lower(),
        "todo_comment": t.todo_comment,
        "code_change": t.code_change,
        "commit_msg": t.commit_msg,
        "timestamp": t.timestamp,
    }
    return json.dumps(obj, ensure_ascii=False)


def read_triples(path) -> list[Triple]:
    with open(path, encoding="utf-8", newline="") as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    out = []
    for i, line in enumerate(lines, 1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(i, f"invalid JSON: {exc}") from None
        if not isinstance(obj, dict) or tuple(obj) != TRIPLE_FIELDS or obj["scope"] not in _SCOPE_NAMES:
            raise SchemaViolation(i, "not a triple record")
        out.append(
            Triple(
                obj["code_change"],
                obj["todo_comment"],
                obj["commit_msg"],
                LineKind(_SCOPE_NAMES[obj["scope"]]),
                obj["repo"],
                obj["commit_id"],
                obj["language"],
                obj["timestamp"],
            )
        )
    return out


def write_triples(triples, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        for t in triples:
            f.write(triple_to_json(t) + "\n")
