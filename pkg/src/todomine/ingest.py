"""Commit enumeration from git repositories and patch archives."""
from __future__ import annotations

import csv
import heapq
import logging
import os
import re
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from todomine.diff import decode_diff_bytes
from todomine.errors import (
    DuplicateCommitId,
    MalformedArchiveEntry,
    NotAGitRepository,
    SourceNotFound,
    UnreadableCommit,
)

log = logging.getLogger(__name__)

LANGUAGES = ("python", "java")

_TODO_RE = re.compile(r"(?<![^\W_])todo(?![^\W_])", re.IGNORECASE)
_HEX_RE = re.compile(r"^[0-9a-f]{7,40}$")
_ARCHIVE_NAME_RE = re.compile(r"^(\d+)_([0-9A-Fa-f]+)\.patch$")

# pinned so the diff text does not depend on user git config
_GIT_DIFF_FLAGS = (
    "--no-color",
    "--no-ext-diff",
    "--no-textconv",
    "--find-renames",
    "--diff-algorithm=myers",
    "--src-prefix=a/",
    "--dst-prefix=b/",
)
_GIT_ENV = {"LC_ALL": "C", "GIT_CONFIG_NOSYSTEM": "1", "GIT_TERMINAL_PROMPT": "0"}


@dataclass(frozen=True)
class RepoSource:
    path_or_url: str
    language: str
    star_rank: int = 0

    def __post_init__(self):
        if self.language not in LANGUAGES:
            raise ValueError(f"unsupported language {self.language!r}")
        if self.star_rank < 0:
            raise ValueError("star_rank must be non-negative")

    @property
    def name(self) -> str:
        """Short identifier used in records: ``owner/repo`` for URLs, the
        directory name for local paths."""
        src = self.path_or_url.rstrip("/")
        if "://" in src or src.startswith("git@"):
            src = re.sub(r"\.git$", "", src)
            parts = re.split(r"[/:]", src)
            return "/".join(parts[-2:])
        return Path(src).name


@dataclass(frozen=True)
class CommitRecord:
    repo: str
    commit_id: str
    timestamp: int
    message: str
    diff_text: str
    diff_bytes: int = field(default=-1)

    def __post_init__(self):
        cid = self.commit_id.strip().lower()
        if not _HEX_RE.match(cid):
            raise ValueError(f"commit id {self.commit_id!r} is not 7-40 hex characters")
        object.__setattr__(self, "commit_id", cid)
        nbytes = len(self.diff_text.encode("utf-8"))
        if self.diff_bytes == -1:
            object.__setattr__(self, "diff_bytes", nbytes)
        elif self.diff_bytes != nbytes:
            raise ValueError("diff_bytes does not match diff_text")


def history_key(record: CommitRecord):
    return (record.timestamp, record.commit_id)


def is_todo_related(diff_text: str) -> bool:
    """True if ``todo`` occurs as a standalone token, in any case."""
    return _TODO_RE.search(diff_text) is not None


def has_todo_token(text: str) -> bool:
    return _TODO_RE.search(text) is not None


def find_todo_token(text: str) -> Optional[int]:
    m = _TODO_RE.search(text)
    return None if m is None else m.start()


# -- git ---------------------------------------------------------------------


def _git(repo: Path, *args: str, check: bool = True) -> subprocess.CompletedProcess:
    env = dict(os.environ, **_GIT_ENV)
    return subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True,
        env=env,
        check=check,
    )


def _require_git_repo(path: Path) -> None:
    if not path.exists():
        raise SourceNotFound(str(path))
    proc = _git(path, "rev-parse", "--is-bare-repository", "--is-inside-work-tree", "--show-prefix", check=False)
    if proc.returncode != 0:
        raise NotAGitRepository(str(path))
    bare, work_tree, prefix = (proc.stdout.decode().split("\n") + ["", "", ""])[:3]
    # a subdirectory of some enclosing work tree is not a repository of its own
    if bare != "true" and (work_tree != "true" or prefix != ""):
        raise NotAGitRepository(str(path))


def git_commit_ids(path: Path) -> list[str]:
    """Every commit reachable from HEAD, as reported by ``git rev-list``."""
    _require_git_repo(path)
    if _git(path, "rev-parse", "--verify", "--quiet", "HEAD", check=False).returncode != 0:
        return []
    out = _git(path, "rev-list", "HEAD").stdout.decode()
    return out.split()


def _drop_terminator(msg: str) -> str:
    # --format output appends one newline after each entry
    return msg[:-1] if msg.endswith("\n") else msg


def _git_messages(path: Path) -> dict[str, tuple[int, tuple[str, ...], str]]:
    out = _git(path, "log", "--format=%x1e%H%x1f%ct%x1f%P%x1f%B", "HEAD").stdout
    meta = {}
    for chunk in decode_diff_bytes(out).split("\x1e")[1:]:
        cid, ts, parents, msg = chunk.split("\x1f", 3)
        meta[cid] = (int(ts), tuple(parents.split()), _drop_terminator(msg))
    return meta


def history_order(records: Sequence[CommitRecord], parents: Optional[dict] = None) -> list[CommitRecord]:
    """Oldest first by timestamp, ties by commit id, never a child before its parent."""
    if not parents:
        return sorted(records, key=history_key)
    by_id = {r.commit_id: r for r in records}
    pending = {cid: sum(1 for p in parents.get(cid, ()) if p in by_id) for cid in by_id}
    children: dict[str, list[str]] = {}
    for cid in by_id:
        for p in parents.get(cid, ()):
            if p in by_id:
                children.setdefault(p, []).append(cid)
    ready = [history_key(by_id[c]) for c, n in pending.items() if n == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        _, cid = heapq.heappop(ready)
        out.append(by_id[cid])
        for child in children.get(cid, ()):
            pending[child] -= 1
            if pending[child] == 0:
                heapq.heappush(ready, history_key(by_id[child]))
    return out


def _git_diffs(path: Path) -> dict[str, str]:
    out = _git(
        path,
        "log",
        "-p",
        "--format=%x1f%H",
        "--diff-merges=first-parent",
        "--root",
        *_GIT_DIFF_FLAGS,
        "HEAD",
    ).stdout
    diffs = {}
    for chunk in out.split(b"\n\x1f"):
        chunk = chunk.lstrip(b"\x1f")
        if not chunk:
            continue
        cid, _, body = chunk.partition(b"\n")
        if body.startswith(b"\n"):
            body = body[1:]
        if body and not body.endswith(b"\n"):
            body += b"\n"
        diffs[cid.decode()] = decode_diff_bytes(body)
    return diffs


def git_show_commit(path: Path, commit_id: str, repo_name: str) -> CommitRecord:
    """Read one commit on its own; used when the batched log fails."""
    proc = _git(path, "show", "-s", "--format=%ct%x1f%P%x1f%B", commit_id, check=False)
    if proc.returncode != 0:
        raise UnreadableCommit(commit_id, proc.stderr.decode(errors="replace").strip())
    ts, parents, msg = decode_diff_bytes(proc.stdout).split("\x1f", 2)
    msg = _drop_terminator(msg)
    parents = parents.split()
    if parents:
        args = ["diff", *_GIT_DIFF_FLAGS, parents[0], commit_id]
    else:
        args = ["diff-tree", "-p", "--root", "--no-commit-id", *_GIT_DIFF_FLAGS, commit_id]
    proc = _git(path, *args, check=False)
    if proc.returncode != 0:
        raise UnreadableCommit(commit_id, proc.stderr.decode(errors="replace").strip())
    return CommitRecord(repo_name, commit_id, int(ts), msg, decode_diff_bytes(proc.stdout))


def list_git_commits(path: Path, repo_name: str, strict: bool = False) -> list[CommitRecord]:
    ids = git_commit_ids(path)
    if not ids:
        return []
    try:
        meta = _git_messages(path)
        diffs = _git_diffs(path)
        records = [CommitRecord(repo_name, cid, meta[cid][0], meta[cid][2], diffs.get(cid, "")) for cid in ids]
        parents = {cid: meta[cid][1] for cid in ids}
    except (subprocess.CalledProcessError, KeyError, ValueError) as exc:
        log.warning("%s: batched history read failed (%s); reading commits one by one", repo_name, exc)
        records, parents = [], _git_parents(path)
        for cid in ids:
            try:
                records.append(git_show_commit(path, cid, repo_name))
            except UnreadableCommit:
                if strict:
                    raise
                log.warning("%s: skipping unreadable commit %s", repo_name, cid)
    return history_order(records, parents)


def _git_parents(path: Path) -> dict[str, tuple[str, ...]]:
    out = _git(path, "rev-list", "--parents", "HEAD", check=False).stdout.decode()
    parents = {}
    for line in out.splitlines():
        cid, *rest = line.split()
        parents[cid] = tuple(rest)
    return parents


# -- patch archives ----------------------------------------------------------


def is_patch_archive(path: Path) -> bool:
    return path.is_dir() and not (path / ".git").exists() and (
        not any(path.iterdir()) or any(p.suffix == ".patch" for p in path.iterdir())
    )


def _parse_entry(file: Path, repo: str) -> CommitRecord:
    m = _ARCHIVE_NAME_RE.match(file.name)
    if m is None:
        raise MalformedArchiveEntry(file, "file name is not <index>_<commit_id>.patch")
    try:
        with open(file, encoding="utf-8", newline="") as f:
            text = f.read()
    except UnicodeDecodeError as exc:
        raise MalformedArchiveEntry(file, f"not UTF-8: {exc}") from None

    head = text.split("\n", 3)
    if len(head) < 4:
        raise MalformedArchiveEntry(file, "truncated header")
    commit_line, ts_line, begin, rest = head
    if not commit_line.startswith("commit: "):
        raise MalformedArchiveEntry(file, "first line must be 'commit: <id>'")
    if not ts_line.startswith("timestamp: "):
        raise MalformedArchiveEntry(file, "second line must be 'timestamp: <int>'")
    if begin != "message-begin":
        raise MalformedArchiveEntry(file, "third line must be 'message-begin'")
    commit_id = commit_line[len("commit: "):].strip().lower()
    if commit_id != m.group(2).lower():
        raise MalformedArchiveEntry(file, "commit id disagrees with file name")
    try:
        timestamp = int(ts_line[len("timestamp: "):])
    except ValueError:
        raise MalformedArchiveEntry(file, "timestamp is not an integer") from None

    if rest.startswith("message-end\n"):
        cut, skip = 0, len("message-end\n")
    else:
        cut = rest.find("\nmessage-end\n")
        skip = len("\nmessage-end\n")
    if cut < 0:
        raise MalformedArchiveEntry(file, "missing diff section (no 'message-end' line)")
    message, diff_text = rest[:cut], rest[cut + skip:]
    try:
        return CommitRecord(repo, commit_id, timestamp, message, diff_text)
    except ValueError as exc:
        raise MalformedArchiveEntry(file, str(exc)) from None


def read_patch_archive(directory, repo: Optional[str] = None) -> list[CommitRecord]:
    """Read every ``<index>_<commit_id>.patch`` entry in ``directory``.

    Records come back oldest first, ties broken by commit id, the same
    order :func:`list_commits` produces for git repositories.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise SourceNotFound(str(directory))
    repo = repo if repo is not None else directory.name
    records = []
    seen = set()
    for file in sorted(directory.iterdir()):
        if file.suffix != ".patch":
            continue
        record = _parse_entry(file, repo)
        if record.commit_id in seen:
            raise DuplicateCommitId(record.commit_id)
        seen.add(record.commit_id)
        records.append(record)
    return sorted(records, key=history_key)


def _entry_text(record: CommitRecord) -> str:
    if "\nmessage-end\n" in "\n" + record.message + "\n":
        raise ValueError(f"{record.commit_id}: message contains a 'message-end' line")
    return (
        f"commit: {record.commit_id}\n"
        f"timestamp: {record.timestamp}\n"
        "message-begin\n"
        f"{record.message}\n"
        "message-end\n"
        f"{record.diff_text}"
    )


def write_patch_archive(records: Iterable[CommitRecord], directory) -> Path:
    """Write ``records`` as a patch archive; the directory must be empty or absent."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if any(directory.iterdir()):
        raise FileExistsError(f"{directory} is not empty")
    records = list(records)
    width = max(6, len(str(len(records))))
    for index, record in enumerate(records):
        path = directory / f"{index:0{width}d}_{record.commit_id}.patch"
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(_entry_text(record))
    return directory


# -- dispatch ----------------------------------------------------------------


def list_commits(source: RepoSource, strict: bool = False) -> list[CommitRecord]:
    """All commits of ``source``, oldest first, each diffed against its first parent."""
    path = Path(source.path_or_url)
    if not path.exists():
        raise SourceNotFound(source.path_or_url)
    if is_patch_archive(path):
        return read_patch_archive(path, source.name)
    return list_git_commits(path, source.name, strict=strict)


def count_git_commits(path: Path) -> int:
    out = _git(Path(path), "rev-list", "--count", "HEAD", check=False)
    return int(out.stdout) if out.returncode == 0 else 0


def load_repo_list(path) -> list[RepoSource]:
    """Read a repository list: CSV with header ``path,language,star_rank``.

    Relative paths resolve against the list file's directory; blank lines and
    lines starting with ``#`` are ignored.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as f:
        rows = [r for r in csv.reader(line for line in f if line.strip() and not line.lstrip().startswith("#"))]
    if not rows:
        return []
    header = [h.strip() for h in rows[0]]
    if header[:2] != ["path", "language"]:
        raise ValueError(f"{path}: expected header 'path,language,star_rank'")
    sources = []
    for row in rows[1:]:
        loc = row[0].strip()
        if "://" not in loc and not loc.startswith("git@") and not os.path.isabs(loc):
            loc = str((path.parent / loc).resolve())
        rank = int(row[2]) if len(row) > 2 and row[2].strip() else len(sources)
        sources.append(RepoSource(loc, row[1].strip(), rank))
    ranks = [s.star_rank for s in sources]
    if len(set(ranks)) != len(ranks):
        raise ValueError(f"{path}: star_rank values must be unique")
    names = [s.name for s in sources]
    if len(set(names)) != len(names):
        raise ValueError(f"{path}: repository names must be unique")
    return sources
