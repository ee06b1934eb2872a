"""Comment location inside diffs and ⟨code_change, todo_comment, commit_msg⟩ assembly."""
from __future__ import annotations

import enum
import functools
import re
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

from todomine.diff import DiffLine, FileDiff, Hunk, LineKind, UnifiedDiff, build_hunk
from todomine.ingest import has_todo_token
from todomine.labeler import scope_kind
from todomine.normalize import DEFAULT_CONFIG, NormalizationConfig, normalize_diff


@dataclass(frozen=True)
class CommentSyntax:
    language: str
    line_markers: tuple[str, ...]
    block_delimiters: tuple[tuple[str, str], ...]
    extensions: tuple[str, ...]
    # python only treats a triple-quoted string as a comment when it opens the line
    block_at_line_start: bool = False

    def __post_init__(self):
        if not all(self.line_markers) or not all(a and b for a, b in self.block_delimiters):
            raise ValueError("comment markers must be non-empty")

    def applies_to(self, path: str) -> bool:
        return path.lower().endswith(self.extensions)


PYTHON = CommentSyntax("python", ("#",), (('"""', '"""'), ("'''", "'''")), (".py", ".pyi", ".pyw"), True)
JAVA = CommentSyntax("java", ("//",), (("/*", "*/"),), (".java",))
SYNTAXES = {"python": PYTHON, "java": JAVA}


@dataclass(frozen=True)
class CommentSpan:
    file_index: int
    hunk_index: int
    line_indices: tuple[int, ...]
    text: str
    kind: str  # "line" or "block"
    is_todo: bool
    token_line_index: Optional[int]
    line_kinds: tuple[LineKind, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class Triple:
    code_change: str
    todo_comment: str
    commit_msg: str
    scope: LineKind
    repo: str
    commit_id: str
    language: str
    timestamp: int = 0


class SkipReason(enum.Enum):
    NO_TODO = "no_todo"
    MULTIPLE_TODOS = "multiple_todos"


@dataclass(frozen=True)
class Skip:
    reason: SkipReason


# -- scanning ----------------------------------------------------------------

_QUOTES = ("'", '"')


def _string_end(content: str, start: int, quote: str) -> int:
    """Index just past the string literal opening at ``start``; -1 if it does not close on this line."""
    i = start + len(quote)
    n = len(content)
    while i < n:
        if content[i] == "\\" and len(quote) == 1:
            i += 2
            continue
        if content.startswith(quote, i):
            return i + len(quote)
        i += 1
    return -1


@functools.lru_cache(maxsize=None)
def _interesting(syntax: CommentSyntax) -> re.Pattern:
    # positions where a comment or a string literal might start
    tokens = {o for o, _ in syntax.block_delimiters} | set(syntax.line_markers) | set(_QUOTES)
    return re.compile("|".join(re.escape(t) for t in sorted(tokens, key=len, reverse=True)))


def _next_comment(content: str, pos: int, syntax: CommentSyntax, at_line_start: bool):
    """Find the first comment opener at or after ``pos`` outside string literals.

    Returns ``("line", start, marker)`` or ``("block", start, (open, close))``
    or None.
    """
    finder = _interesting(syntax)
    i = pos
    while True:
        m = finder.search(content, i)
        if m is None:
            return None
        i = m.start()
        leading = at_line_start and content[pos:i].strip() == ""
        for open_, close in syntax.block_delimiters:
            if content.startswith(open_, i) and (leading or not syntax.block_at_line_start):
                return "block", i, (open_, close)
        for marker in syntax.line_markers:
            if content.startswith(marker, i):
                return "line", i, marker
        ch = content[i]
        if ch not in _QUOTES:
            # an opener that is not allowed here, e.g. a python triple quote mid-line
            i += 1
            continue
        triple = ch * 3
        quote = triple if content.startswith(triple, i) else ch
        end = _string_end(content, i, quote)
        if end < 0:
            return None
        i = end


@dataclass
class _Open:
    close: str
    indices: list
    texts: list
    kinds: list


def _make_span(fi, hi, indices, texts, kinds, kind) -> CommentSpan:
    token_line = None
    for idx, text in zip(indices, texts):
        if has_todo_token(text):
            token_line = idx
            break
    return CommentSpan(
        fi,
        hi,
        tuple(indices),
        "\n".join(texts),
        kind,
        token_line is not None,
        token_line,
        tuple(kinds),
    )


def _scan_hunk(fi: int, hi: int, hunk: Hunk, syntax: CommentSyntax) -> list[CommentSpan]:
    spans: list[CommentSpan] = []
    block: Optional[_Open] = None
    run = None  # full-line comment run: [indices, texts, kinds]

    def flush_run():
        nonlocal run
        if run is not None:
            spans.append(_make_span(fi, hi, run[0], run[1], run[2], "line"))
            run = None

    for idx, line in enumerate(hunk.lines):
        content = line.content
        pos = 0
        full_line_text = None
        if block is not None:
            end = content.find(block.close)
            if end < 0:
                block.indices.append(idx)
                block.texts.append(content)
                block.kinds.append(line.kind)
                continue
            block.indices.append(idx)
            block.texts.append(content[:end])
            block.kinds.append(line.kind)
            spans.append(_make_span(fi, hi, block.indices, block.texts, block.kinds, "block"))
            pos = end + len(block.close)
            block = None
        line_start = pos == 0
        while True:
            hit = _next_comment(content, pos, syntax, line_start)
            if hit is None:
                break
            what, start, delim = hit
            if what == "line":
                text = content[start + len(delim):]
                if line_start and content[:start].strip() == "":
                    full_line_text = text
                else:
                    flush_run()
                    spans.append(_make_span(fi, hi, [idx], [text], [line.kind], "line"))
                break
            open_, close = delim
            body_start = start + len(open_)
            end = content.find(close, body_start)
            if end >= 0:
                flush_run()
                spans.append(_make_span(fi, hi, [idx], [content[body_start:end]], [line.kind], "block"))
                pos = end + len(close)
                line_start = False
                continue
            flush_run()
            block = _Open(close, [idx], [content[body_start:]], [line.kind])
            break

        if full_line_text is not None:
            if run is not None and run[2][-1] is line.kind and run[0][-1] == idx - 1:
                run[0].append(idx)
                run[1].append(full_line_text)
                run[2].append(line.kind)
            else:
                flush_run()
                run = [[idx], [full_line_text], [line.kind]]
        else:
            flush_run()
    flush_run()
    if block is not None:
        # unterminated at the hunk edge: the block ends with the hunk
        spans.append(_make_span(fi, hi, block.indices, block.texts, block.kinds, "block"))
    spans.sort(key=lambda s: s.line_indices[0])
    return spans


def scan_comments(diff: UnifiedDiff, syntax: CommentSyntax) -> list[CommentSpan]:
    """Every maximal comment region in the files of ``diff`` written in ``syntax``'s language."""
    spans = []
    for fi, f in enumerate(diff.files):
        if f.is_binary or not syntax.applies_to(f.path):
            continue
        for hi, hunk in enumerate(f.hunks):
            spans.extend(_scan_hunk(fi, hi, hunk, syntax))
    return spans


def count_todos(spans: Sequence[CommentSpan]) -> int:
    return sum(1 for s in spans if s.is_todo)


# -- triple assembly ---------------------------------------------------------

_EDGE_OPENERS = ("/**", "/*", "//", "#", '"""', "'''", "*", "+", "-")
_EDGE_CLOSERS = ("*/", '"""', "'''")


def strip_comment_edges(text: str) -> str:
    """Remove comment delimiters and +/- labels from both ends of one line."""
    prev = None
    while text != prev:
        prev = text
        text = text.strip()
        for opener in _EDGE_OPENERS:
            if text.startswith(opener):
                text = text[len(opener):]
                break
        for closer in _EDGE_CLOSERS:
            if text.endswith(closer):
                text = text[: -len(closer)]
                break
    return text


def _join_clean(texts) -> str:
    cleaned = (strip_comment_edges(t) for t in texts)
    return "\n".join(t for t in cleaned if t)


def strip_change_markers(lines: Sequence[DiffLine]) -> str:
    """Text of comment lines with comment markers trimmed from each line."""
    return _join_clean(line.content for line in lines)


def remove_span(diff: UnifiedDiff, span: CommentSpan) -> UnifiedDiff:
    """``diff`` without the body lines covered by ``span``; emptied hunks are dropped."""
    f = diff.files[span.file_index]
    hunk = f.hunks[span.hunk_index]
    drop = set(span.line_indices)
    kept = [line for i, line in enumerate(hunk.lines) if i not in drop]
    hunks = list(f.hunks)
    if kept:
        hunks[span.hunk_index] = build_hunk(hunk.old_start, hunk.new_start, kept, hunk.section)
    else:
        del hunks[span.hunk_index]
    files = list(diff.files)
    files[span.file_index] = replace(f, hunks=tuple(hunks))
    return replace(diff, files=tuple(files))


def split_triple(
    diff: UnifiedDiff,
    normalized_msg: str,
    syntax: CommentSyntax,
    meta,
    cfg: NormalizationConfig = DEFAULT_CONFIG,
) -> Union[Triple, Skip]:
    """Pull the single TODO comment out of ``diff``.

    ``meta`` supplies ``repo``, ``commit_id`` and ``timestamp`` (a
    :class:`~todomine.ingest.CommitRecord` works).
    """
    spans = [s for s in scan_comments(diff, syntax) if s.is_todo]
    if not spans:
        return Skip(SkipReason.NO_TODO)
    if len(spans) > 1:
        return Skip(SkipReason.MULTIPLE_TODOS)
    span = spans[0]
    return Triple(
        code_change=normalize_diff(remove_span(diff, span), cfg),
        todo_comment=_join_clean(span.text.split("\n")).lower(),
        commit_msg=normalized_msg,
        scope=scope_kind(span),
        repo=meta.repo,
        commit_id=meta.commit_id,
        language=syntax.language,
        timestamp=getattr(meta, "timestamp", 0),
    )
