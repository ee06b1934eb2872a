"""Structured model of unified-diff text.

``parse_unified_diff`` and ``render`` are inverses on the output of common
diff tools (``git diff``, ``diff -u``): every byte of the input is kept
somewhere in the model, so rendering reproduces it exactly.
"""
from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence, Union

from todomine.errors import LineCountMismatch, MalformedHunkHeader, UnknownMarker

log = logging.getLogger(__name__)

HEADER_PREFIXES = (
    "diff --git",
    "index ",
    "--- ",
    "+++ ",
    "new file mode",
    "deleted file mode",
    "old mode",
    "new mode",
    "similarity index",
    "rename from",
    "rename to",
    "Binary files",
)

_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@(.*)$", re.DOTALL)


class LineKind(enum.Enum):
    ADDED = "+"
    REMOVED = "-"
    EQUAL = " "

    @property
    def marker(self) -> str:
        return self.value


def line_kind(marker: str) -> LineKind:
    """Map a diff body marker character to its kind."""
    try:
        return LineKind(marker)
    except ValueError:
        raise UnknownMarker(f"unknown diff marker {marker!r}") from None


@dataclass(frozen=True)
class DiffLine:
    kind: LineKind
    content: str
    old_lineno: Optional[int] = None
    new_lineno: Optional[int] = None
    # text of a following "\ No newline at end of file" line, without the backslash
    eof_marker: Optional[str] = None


@dataclass(frozen=True)
class Hunk:
    old_start: int
    old_len: int
    new_start: int
    new_len: int
    lines: tuple[DiffLine, ...] = ()
    section: str = ""

    def header(self) -> str:
        return f"@@ -{_range(self.old_start, self.old_len)} +{_range(self.new_start, self.new_len)} @@{self.section}"

    def count(self, kind: LineKind) -> int:
        return sum(1 for line in self.lines if line.kind is kind)


@dataclass(frozen=True)
class FileDiff:
    old_path: str = ""
    new_path: str = ""
    header_lines: tuple[str, ...] = ()
    hunks: tuple[Hunk, ...] = ()
    is_binary: bool = False

    @property
    def path(self) -> str:
        """The path the change applies to; the old one for deletions."""
        if self.new_path and self.new_path != "/dev/null":
            return self.new_path
        return self.old_path


@dataclass(frozen=True)
class UnifiedDiff:
    files: tuple[FileDiff, ...] = ()
    # lines preceding the first file section (e.g. mail headers)
    preamble: tuple[str, ...] = ()
    final_newline: bool = True


def _range(start: int, length: int) -> str:
    return str(start) if length == 1 else f"{start},{length}"


def build_hunk(
    old_start: int,
    new_start: int,
    lines: Iterable[tuple[LineKind, str] | DiffLine],
    section: str = "",
) -> Hunk:
    """Build a hunk with lengths and line numbers derived from its body."""
    numbered = []
    old_no, new_no = old_start, new_start
    for item in lines:
        if isinstance(item, DiffLine):
            kind, content, eof = item.kind, item.content, item.eof_marker
        else:
            (kind, content), eof = item, None
        if kind is LineKind.EQUAL:
            numbered.append(DiffLine(kind, content, old_no, new_no, eof))
            old_no += 1
            new_no += 1
        elif kind is LineKind.REMOVED:
            numbered.append(DiffLine(kind, content, old_no, None, eof))
            old_no += 1
        else:
            numbered.append(DiffLine(kind, content, None, new_no, eof))
            new_no += 1
    return Hunk(
        old_start,
        old_no - old_start,
        new_start,
        new_no - new_start,
        tuple(numbered),
        section,
    )


def decode_diff_bytes(data: bytes, warnings: Optional[list] = None) -> str:
    """Decode diff bytes as UTF-8, replacing invalid sequences."""
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        msg = "invalid UTF-8 in diff replaced with U+FFFD"
        log.debug(msg)
        if warnings is not None:
            warnings.append(msg)
        return data.decode("utf-8", errors="replace")


def _strip_prefix(path: str) -> str:
    path = path.split("\t", 1)[0]
    if path.startswith(("a/", "b/")):
        return path[2:]
    return path


def _paths_from_headers(header_lines: Sequence[str]) -> tuple[str, str]:
    old = new = ""
    for line in header_lines:
        if line.startswith("diff --git "):
            rest = line[len("diff --git "):]
            cut = rest.rfind(" b/")
            if cut >= 0:
                old, new = _strip_prefix(rest[:cut]), rest[cut + 3:]
        elif line.startswith("--- "):
            old = _strip_prefix(line[4:])
        elif line.startswith("+++ "):
            new = _strip_prefix(line[4:])
        elif line.startswith("rename from "):
            old = line[len("rename from "):]
        elif line.startswith("rename to "):
            new = line[len("rename to "):]
        elif line.startswith("Binary files ") and line.endswith(" differ"):
            body = line[len("Binary files "):-len(" differ")]
            if " and " in body:
                a, b = body.split(" and ", 1)
                old, new = old or _strip_prefix(a), new or _strip_prefix(b)
    return old, new


class _FileBuilder:
    def __init__(self):
        self.header_lines: list[str] = []
        self.hunks: list[Hunk] = []
        self.binary = False

    def has_old_header(self) -> bool:
        return any(h.startswith("--- ") for h in self.header_lines)

    def finish(self) -> FileDiff:
        old, new = _paths_from_headers(self.header_lines)
        return FileDiff(old, new, tuple(self.header_lines), tuple(self.hunks), self.binary and not self.hunks)


def _is_body(line: str) -> bool:
    return line[:1] in ("+", "-", " ", "\\")


def parse_unified_diff(
    text: Union[str, bytes],
    strict: bool = True,
    warnings: Optional[list] = None,
) -> UnifiedDiff:
    """Parse unified-diff text into a :class:`UnifiedDiff`.

    In strict mode a hunk whose body disagrees with its declared lengths
    raises :class:`LineCountMismatch`. In lenient mode the lengths are
    re-derived from the body and a message is appended to ``warnings``.
    """
    if isinstance(text, bytes):
        text = decode_diff_bytes(text, warnings)
    if text == "":
        return UnifiedDiff()

    def warn(msg):
        log.debug(msg)
        if warnings is not None:
            warnings.append(msg)

    lines = text.split("\n")
    final_newline = lines[-1] == ""
    if final_newline:
        lines.pop()

    preamble: list[str] = []
    files: list[FileDiff] = []
    cur: Optional[_FileBuilder] = None
    n = len(lines)
    i = 0

    def starts_file(j: int) -> bool:
        line = lines[j]
        if line.startswith("diff "):
            return True
        return line.startswith("--- ") and j + 1 < n and lines[j + 1].startswith("+++ ")

    while i < n:
        line = lines[i]
        if line.startswith("diff ") or (
            starts_file(i) and (cur is None or cur.hunks or cur.has_old_header())
        ):
            if cur is not None:
                files.append(cur.finish())
            cur = _FileBuilder()
            cur.header_lines.append(line)
            i += 1
            continue

        if line.startswith("@@"):
            m = _HUNK_RE.match(line)
            if m is None:
                raise MalformedHunkHeader(i + 1, line)
            if cur is None:
                cur = _FileBuilder()
            hunk_no = sum(len(f.hunks) for f in files) + len(cur.hunks)
            hunk, i = _read_hunk(lines, i, m, strict, hunk_no, starts_file, warn)
            cur.hunks.append(hunk)
            continue

        if cur is None:
            preamble.append(line)
        elif not cur.hunks:
            cur.header_lines.append(line)
            if line.startswith(("Binary files ", "GIT binary patch")):
                cur.binary = True
        elif strict:
            raise LineCountMismatch(len(cur.hunks) - 1, f"unexpected line {i + 1} after hunk body: {line!r}")
        elif _is_body(line):
            warn(f"line {i + 1}: body line beyond declared hunk length; lengths re-derived")
            last = cur.hunks.pop()
            body = list(last.lines)
            if line.startswith("\\") and body:
                body[-1] = replace(body[-1], eof_marker=line[1:])
            elif not line.startswith("\\"):
                body.append(DiffLine(LineKind(line[0]), line[1:]))
            cur.hunks.append(build_hunk(last.old_start, last.new_start, body, last.section))
        else:
            warn(f"line {i + 1}: dropped unrecognized line {line!r}")
        i += 1

    if cur is not None:
        files.append(cur.finish())
    return UnifiedDiff(tuple(files), tuple(preamble), final_newline)


def _read_hunk(lines, i, m, strict, hunk_no, starts_file, warn):
    old_start = int(m.group(1))
    old_len = int(m.group(2)) if m.group(2) is not None else 1
    new_start = int(m.group(3))
    new_len = int(m.group(4)) if m.group(4) is not None else 1
    section = m.group(5)
    n = len(lines)
    i += 1

    body: list[DiffLine] = []
    old_no, new_no = old_start, new_start
    old_end, new_end = old_start + old_len, new_start + new_len
    mismatch = None
    # lines are numbered as they are read; build_hunk is only needed after a repair
    while old_no < old_end or new_no < new_end:
        if i >= n:
            mismatch = "hunk body ends before declared length"
            break
        line = lines[i]
        marker = line[:1]
        if marker == " " and old_no < old_end and new_no < new_end:
            body.append(DiffLine(LineKind.EQUAL, line[1:], old_no, new_no))
            old_no += 1
            new_no += 1
        elif marker == "-" and old_no < old_end:
            body.append(DiffLine(LineKind.REMOVED, line[1:], old_no, None))
            old_no += 1
        elif marker == "+" and new_no < new_end:
            body.append(DiffLine(LineKind.ADDED, line[1:], None, new_no))
            new_no += 1
        elif marker == "\\" and body:
            body[-1] = replace(body[-1], eof_marker=line[1:])
        else:
            mismatch = f"line {i + 1} {line!r} does not fit declared lengths"
            break
        i += 1

    if mismatch is not None:
        if strict:
            raise LineCountMismatch(hunk_no, mismatch)
        warn(f"hunk {hunk_no}: {mismatch}; lengths re-derived")
        while i < n and not starts_file(i) and not lines[i].startswith("@@"):
            line = lines[i]
            if line.startswith("\\") and body:
                body[-1] = replace(body[-1], eof_marker=line[1:])
            elif line == "":
                body.append(DiffLine(LineKind.EQUAL, ""))
            elif _is_body(line):
                body.append(DiffLine(LineKind(line[0]), line[1:]))
            else:
                break
            i += 1
    elif i < n and lines[i].startswith("\\") and body:
        body[-1] = replace(body[-1], eof_marker=lines[i][1:])
        i += 1

    if mismatch is None:
        return Hunk(old_start, old_len, new_start, new_len, tuple(body), section), i
    return build_hunk(old_start, new_start, body, section), i


def render(diff: UnifiedDiff) -> str:
    """Emit unified-diff text for ``diff``."""
    out: list[str] = list(diff.preamble)
    for f in diff.files:
        out.extend(f.header_lines)
        for hunk in f.hunks:
            out.append(hunk.header())
            for line in hunk.lines:
                out.append(line.kind.marker + line.content)
                if line.eof_marker is not None:
                    out.append("\\" + line.eof_marker)
    if not out:
        return ""
    text = "\n".join(out)
    return text + "\n" if diff.final_newline else text
