"""Removal of semantically irrelevant detail from diffs and commit messages."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from todomine.diff import UnifiedDiff
from todomine.errors import EmptyMessage, InvalidPattern

DEFAULT_COMMIT_ID_PATTERN = r"\b(?=[0-9a-f]*[0-9])[0-9a-f]{7,40}\b"
DEFAULT_ISSUE_ID_PATTERN = r"#[0-9]+"
MAX_DIFF_BYTES = 1024 * 1024

_TERMINATORS = re.compile(r"[.!?\n]")


@dataclass(frozen=True)
class NormalizationConfig:
    commit_id_pattern: str = DEFAULT_COMMIT_ID_PATTERN
    issue_id_pattern: str = DEFAULT_ISSUE_ID_PATTERN
    commit_placeholder: str = "<commit_id>"
    issue_placeholder: str = "<issue_id>"
    max_diff_bytes: int = MAX_DIFF_BYTES
    _commit_re: re.Pattern = field(init=False, repr=False, compare=False)
    _issue_re: re.Pattern = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("commit_placeholder", "issue_placeholder"):
            value = getattr(self, name)
            if not value or any(c.isspace() for c in value):
                raise InvalidPattern(f"{name} must be non-empty and contain no whitespace")
        if self.max_diff_bytes <= 0:
            raise InvalidPattern("max_diff_bytes must be positive")
        try:
            commit_re = re.compile(self.commit_id_pattern)
            issue_re = re.compile(self.issue_id_pattern)
        except re.error as exc:
            raise InvalidPattern(str(exc)) from None
        for placeholder in (self.commit_placeholder, self.issue_placeholder):
            if commit_re.search(placeholder) or issue_re.search(placeholder):
                raise InvalidPattern(f"placeholder {placeholder!r} matches an id pattern")
        object.__setattr__(self, "_commit_re", commit_re)
        object.__setattr__(self, "_issue_re", issue_re)

    @classmethod
    def from_section(cls, section: Mapping[str, str]) -> "NormalizationConfig":
        """Build from a ``[normalize]`` config section; absent keys keep defaults."""
        known = {"commit_id_pattern", "issue_id_pattern", "commit_placeholder", "issue_placeholder", "max_diff_bytes"}
        unknown = set(section) - known
        if unknown:
            raise InvalidPattern(f"unknown normalize keys: {sorted(unknown)}")
        kwargs = dict(section)
        if "max_diff_bytes" in kwargs:
            try:
                kwargs["max_diff_bytes"] = int(kwargs["max_diff_bytes"])
            except ValueError:
                raise InvalidPattern("max_diff_bytes must be an integer") from None
        return cls(**kwargs)

    def as_dict(self) -> dict:
        return {
            "commit_id_pattern": self.commit_id_pattern,
            "issue_id_pattern": self.issue_id_pattern,
            "commit_placeholder": self.commit_placeholder,
            "issue_placeholder": self.issue_placeholder,
            "max_diff_bytes": self.max_diff_bytes,
        }


DEFAULT_CONFIG = NormalizationConfig()


def check_size(record, cfg: NormalizationConfig = DEFAULT_CONFIG) -> bool:
    """True if the raw diff is within the size cap (inclusive)."""
    return record.diff_bytes <= cfg.max_diff_bytes


def replace_commit_ids(text: str, cfg: NormalizationConfig = DEFAULT_CONFIG) -> str:
    return cfg._commit_re.sub(cfg.commit_placeholder, text)


def replace_ids(text: str, cfg: NormalizationConfig = DEFAULT_CONFIG) -> str:
    """Substitute issue ids, then commit ids, with their placeholders."""
    text = cfg._issue_re.sub(cfg.issue_placeholder, text)
    return cfg._commit_re.sub(cfg.commit_placeholder, text)


def normalize_diff(diff: UnifiedDiff, cfg: NormalizationConfig = DEFAULT_CONFIG) -> str:
    """Lowercased diff body with file headers removed.

    Each hunk is introduced by a bare ``@@`` line; body lines keep their
    marker character and have commit ids replaced.
    """
    out = []
    for f in diff.files:
        for hunk in f.hunks:
            out.append("@@\n")
            for line in hunk.lines:
                out.append(line.kind.marker + replace_commit_ids(line.content.lower(), cfg) + "\n")
    return "".join(out)


def first_sentence(text: str) -> str:
    m = _TERMINATORS.search(text)
    if m is None:
        return text
    end = m.start() if m.group() == "\n" else m.end()
    return text[:end]


def normalize_message(message: str, cfg: NormalizationConfig = DEFAULT_CONFIG) -> str:
    """Lowercased first sentence (or first line) of a commit message, ids replaced."""
    text = first_sentence(message.lower().lstrip())
    text = replace_ids(text, cfg).strip()
    if not text:
        raise EmptyMessage(repr(message[:40]))
    return text
