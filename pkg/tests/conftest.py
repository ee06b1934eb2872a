import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from annotated_corpus import Commit, RepoSpec, build_corpus, build_git_repo  # noqa: E402


@pytest.fixture
def make_repo(tmp_path):
    """Build a git repository from ``(message, changes)`` pairs; returns (path, commit ids)."""

    def make(commits, name="repo", language="python"):
        spec = RepoSpec(name, language, [c if isinstance(c, Commit) else Commit(c[0], c[1], None) for c in commits])
        path = tmp_path / name
        return path, build_git_repo(spec, path)

    return make


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    return build_corpus(tmp_path_factory.mktemp("corpus"))


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
