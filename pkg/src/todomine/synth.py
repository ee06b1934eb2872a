"""Synthetic records and commits for benchmarks and sampling tests."""
from __future__ import annotations

import random
from typing import Iterator

from todomine.dataset import TripleRecord
from todomine.ingest import CommitRecord
from todomine.labeler import Label

_WORDS = ("parse", "cache", "retry", "config", "handle", "unicode", "timeout", "cleanup", "index", "buffer")
_COMMENT = {"python": "#", "java": "//"}
_EXT = {"python": "py", "java": "java"}


def _phrase(rng: random.Random, k: int = 3) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(k))


def synthetic_records(n_pos: int, n_neg: int, language: str = "python", seed: int = 0) -> list[TripleRecord]:
    """``n_pos`` positive and ``n_neg`` negative records with distinct commit ids."""
    rng = random.Random(seed)
    out = []
    for i in range(n_pos + n_neg):
        label = Label.POSITIVE if i < n_pos else Label.NEGATIVE
        out.append(
            TripleRecord(
                repo=f"synth/{language}{i % 7}",
                commit_id=f"{i + 1:012x}",
                language=language,
                label=label,
                todo_comment=f"todo: {_phrase(rng)}",
                code_change=f"@@\n-x = {_phrase(rng, 1)}()\n+x = {_phrase(rng, 1)}()\n",
                commit_msg=f"{_phrase(rng, 2)}.",
                timestamp=1_500_000_000 + i,
            )
        )
    return out


def _diff(path: str, lines: list[tuple[str, str]]) -> str:
    old = sum(1 for m, _ in lines if m != "+")
    new = sum(1 for m, _ in lines if m != "-")
    body = "".join(m + t + "\n" for m, t in lines)
    return f"diff --git a/{path} b/{path}\nindex 1111111..2222222 100644\n--- a/{path}\n+++ b/{path}\n@@ -10,{old} +10,{new} @@\n{body}"


def synthetic_commits(n: int, language: str = "python", seed: int = 0, repo: str = "synth") -> Iterator[CommitRecord]:
    """``n`` commits mixing removed, unchanged, added and duplicate TODOs with plain edits."""
    rng = random.Random(seed)
    c = _COMMENT[language]
    for i in range(n):
        todo = f"{c} TODO: {_phrase(rng)}"
        code = [(" ", f"    value = {_phrase(rng, 1)}({i})") for _ in range(rng.randint(1, 6))]
        kind = rng.randrange(5)
        if kind == 0:
            lines = code[:1] + [("-", "    " + todo), ("+", f"    done({i})")] + code[1:]
        elif kind == 1:
            lines = [(" ", "    " + todo)] + code + [("-", "    old()"), ("+", "    new()")]
        elif kind == 2:
            lines = code + [("+", "    " + todo)]
        elif kind == 3:
            lines = [("-", "    " + todo), ("+", f"    {todo} again")] + code
        else:
            lines = code + [("-", "    a = 1"), ("+", "    a = 2")]
        path = f"src/mod{i % 50}.{_EXT[language]}"
        yield CommitRecord(
            repo,
            f"{i + 1:08x}",
            1_500_000_000 + i,
            f"{_phrase(rng, 2).capitalize()} (#{i}). More text.",
            _diff(path, lines),
        )
