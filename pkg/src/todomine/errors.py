"""Exception types raised across the mining pipeline."""


class TodoMineError(Exception):
    pass


class SourceNotFound(TodoMineError):
    pass


class NotAGitRepository(TodoMineError):
    pass


class UnreadableCommit(TodoMineError):
    def __init__(self, commit_id, reason=""):
        self.commit_id = commit_id
        super().__init__(f"unreadable commit {commit_id}: {reason}".rstrip(": "))


class MalformedArchiveEntry(TodoMineError):
    def __init__(self, file, reason=""):
        self.file = file
        super().__init__(f"{file}: {reason}" if reason else str(file))


class DuplicateCommitId(TodoMineError):
    pass


class DiffParseError(TodoMineError):
    pass


class MalformedHunkHeader(DiffParseError):
    def __init__(self, line_no, line=""):
        self.line_no = line_no
        super().__init__(f"malformed hunk header at line {line_no}: {line!r}")


class LineCountMismatch(DiffParseError):
    def __init__(self, hunk, detail=""):
        self.hunk = hunk
        super().__init__(f"hunk {hunk}: {detail}")


class UnknownMarker(TodoMineError):
    pass


class EmptyMessage(TodoMineError):
    pass


class InvalidPattern(TodoMineError):
    pass


class EmptyDataset(TodoMineError):
    pass


class InsufficientSamples(TodoMineError):
    def __init__(self, label, have, want):
        self.label, self.have, self.want = label, have, want
        super().__init__(f"need {want} {label} samples, have {have}")


class SchemaViolation(TodoMineError):
    def __init__(self, line_no, reason):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


class IoFailure(TodoMineError):
    pass


class ConfigError(TodoMineError):
    pass


class ManifestConfigMismatch(ConfigError):
    pass
