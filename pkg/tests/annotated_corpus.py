"""Hand-annotated fixture corpus for end-to-end checks.

Three small repositories are described commit by commit together with the
outcome each commit must produce. ``alpha`` (python) and ``beta`` (java) are
materialized as git repositories; ``gamma`` (python) is built with git and
then exported as a patch archive, so both ingestion paths are covered.

Each expectation is either an outcome name or, for emitted samples, a tuple
``(label, todo_comment, commit_msg)``. Context is git's default three lines,
which decides whether a nearby TODO shows up as an unchanged line.
"""
import os
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

NOT_TODO = "not_todo"
ADDED = "discarded_added"
MULTI = "skipped_multi_todo"
NO_TODO = "skipped_no_todo"
OVERSIZED = "oversized"
EMPTY_MSG = "skipped_empty_message"


def POS(comment, msg):
    return ("positive", comment, msg)


def NEG(comment, msg):
    return ("negative", comment, msg)


@dataclass
class Commit:
    message: str
    changes: dict
    expect: Union[str, tuple]
    merge: Optional[str] = None  # branch to merge instead of applying changes
    branch: Optional[str] = None  # branch to commit on (created from HEAD if new)


@dataclass
class RepoSpec:
    name: str
    language: str
    commits: list
    archive: bool = False


BIG = "# filler line for an oversized commit\n" * 30000  # ~1.1 MB

ALPHA = RepoSpec("alpha", "python", [
    Commit("Initial commit", {"app.py": (
        "def main():\n"
        "    # TODO: parse arguments\n"
        "    run()\n"
    )}, ADDED),
    Commit("Add argument parsing. Uses argparse.", {"app.py": (
        "def main():\n"
        "    args = parse()\n"
        "    run(args)\n"
    )}, POS("todo: parse arguments", "add argument parsing.")),
    Commit("Add README", {"README.md": "# Alpha\n\nA small tool.\n"}, NOT_TODO),
    Commit("Add loader", {"utils.py": (
        "# TODO: cache results\n"
        "def load(path):\n"
        "    # TODO: handle missing files\n"
        "    return open(path).read()\n"
    )}, MULTI),
    Commit("Handle missing files (#12)", {"utils.py": (
        "# TODO: cache results\n"
        "def load(path):\n"
        "    try:\n"
        "        return open(path).read()\n"
        "    except FileNotFoundError:\n"
        "        return ''\n"
    )}, MULTI),  # the untouched TODO sits in the context lines
    Commit("Return None for missing files", {"utils.py": (
        "# TODO: cache results\n"
        "def load(path):\n"
        "    try:\n"
        "        return open(path).read()\n"
        "    except FileNotFoundError:\n"
        "        return None\n"
    )}, NOT_TODO),  # TODO is more than three lines away
    Commit("Accept a default value\n\nCallers can now choose the fallback.", {"utils.py": (
        "# TODO: cache results\n"
        "def load(path, default=None):\n"
        "    try:\n"
        "        return open(path).read()\n"
        "    except FileNotFoundError:\n"
        "        return default\n"
    )}, NEG("todo: cache results", "accept a default value")),
    Commit("Cache loaded files! Big speedup", {"utils.py": (
        "import functools\n"
        "\n"
        "\n"
        "@functools.lru_cache()\n"
        "def load(path, default=None):\n"
        "    try:\n"
        "        return open(path).read()\n"
        "    except FileNotFoundError:\n"
        "        return default\n"
    )}, POS("todo: cache results", "cache loaded files!")),
    Commit("Track pending items", {"tasks.py": (
        "todo_list = []\n"
        "\n"
        "def add(item):\n"
        "    todo_list.append(item)\n"
    )}, NO_TODO),  # the token is in code, not in a comment
    Commit("Print a banner", {"banner.py": 'print("TODO: nothing here")  # prints a banner\n'}, NO_TODO),
    Commit("Connect to mastodon", {"net.py": "mastodon_client = init()\n"}, NOT_TODO),
    Commit("Document task ideas", {"NOTES.md": "# TODO\n\n- write docs\n"}, NO_TODO),
    Commit("Add settings module", {"settings.py": (
        "DEBUG = False\n"
        "PORT = 8080  # TODO make configurable\n"
        "HOST = 'localhost'\n"
    )}, ADDED),
    Commit("Read port from env, see deadbeef01", {"settings.py": (
        "import os\n"
        "DEBUG = False\n"
        "PORT = int(os.environ.get('PORT', 8080))\n"
        "HOST = 'localhost'\n"
    )}, POS("todo make configurable", "read port from env, see <commit_id>")),
    Commit("Add worker", {"worker.py": (
        "class Worker:\n"
        '    """TODO: document the worker lifecycle."""\n'
        "\n"
        "    def start(self):\n"
        "        pass\n"
    )}, ADDED),
    Commit("Implement start", {"worker.py": (
        "class Worker:\n"
        '    """TODO: document the worker lifecycle."""\n'
        "\n"
        "    def start(self):\n"
        "        self.running = True\n"
    )}, NEG("todo: document the worker lifecycle.", "implement start")),
    Commit("", {"worker.py": (
        "class Worker:\n"
        '    """Runs jobs until stopped."""\n'
        "\n"
        "    def start(self):\n"
        "        self.running = True\n"
    )}, EMPTY_MSG),
    Commit("Vendor generated table", {"table.py": "# TODO: regenerate\n" + BIG}, OVERSIZED),
    Commit("Rewrite TODO wording", {"app.py": (
        "def main():\n"
        "    # todo: validate args\n"
        "    args = parse()\n"
        "    run(args)\n"
    )}, ADDED),
    Commit("Reword the validation note", {"app.py": (
        "def main():\n"
        "    # todo: validate all args\n"
        "    args = parse()\n"
        "    run(args)\n"
    )}, MULTI),  # removed and added comment are separate spans
    Commit("Validate args", {"app.py": (
        "def main():\n"
        "    args = parse()\n"
        "    validate(args)\n"
        "    run(args)\n"
    )}, POS("todo: validate all args", "validate args")),
    Commit("Fix typo in README", {"README.md": "# Alpha\n\nA tiny tool.\n"}, NOT_TODO),
])

BETA = RepoSpec("beta", "java", [
    Commit("Initial import", {"src/Main.java": (
        "public class Main {\n"
        "    public static void main(String[] args) {\n"
        "        // TODO: read config\n"
        "        start();\n"
        "    }\n"
        "}\n"
    )}, ADDED),
    Commit("Read config file", {"src/Main.java": (
        "public class Main {\n"
        "    public static void main(String[] args) {\n"
        "        Config c = Config.load();\n"
        "        start(c);\n"
        "    }\n"
        "}\n"
    )}, POS("todo: read config", "read config file")),
    Commit("Add Config class", {"src/Config.java": (
        "/* TODO refactor\n"
        "   later */\n"
        "public class Config {\n"
        "    static Config load() { return new Config(); }\n"
        "}\n"
    )}, ADDED),
    Commit("Add config fields", {"src/Config.java": (
        "/* TODO refactor\n"
        "   later */\n"
        "public class Config {\n"
        "    int port;\n"
        "    static Config load() { return new Config(); }\n"
        "}\n"
    )}, NEG("todo refactor\nlater", "add config fields")),
    Commit("Refactor Config. Split loading out.", {"src/Config.java": (
        "public class Config {\n"
        "    int port;\n"
        "    static Config load() { return Loader.read(); }\n"
        "}\n"
    )}, POS("todo refactor\nlater", "refactor config.")),
    Commit("Add URL constant", {"src/Urls.java": (
        "public class Urls {\n"
        '    static final String HOME = "http://example.org/todo"; // homepage\n'
        "}\n"
    )}, NO_TODO),
    Commit("Add Loader", {"src/Loader.java": (
        "public class Loader {\n"
        "    /**\n"
        "     * Reads the config.\n"
        "     * TODO: support YAML\n"
        "     */\n"
        "    static Config read() {\n"
        "        return new Config();\n"
        "    }\n"
        "}\n"
    )}, ADDED),
    Commit("Loader returns defaults", {"src/Loader.java": (
        "public class Loader {\n"
        "    /**\n"
        "     * Reads the config.\n"
        "     * TODO: support YAML\n"
        "     */\n"
        "    static Config read() {\n"
        "        return Config.defaults();\n"
        "    }\n"
        "}\n"
    )}, NO_TODO),  # the hunk starts inside the doc comment, so its opener is not visible
    Commit("Support YAML (closes #7)", {"src/Loader.java": (
        "public class Loader {\n"
        "    /**\n"
        "     * Reads the config from YAML.\n"
        "     */\n"
        "    static Config read() {\n"
        "        return Yaml.parse();\n"
        "    }\n"
        "}\n"
    )}, POS("reads the config.\ntodo: support yaml\nreads the config from yaml.", "support yaml (closes <issue_id>)")),
    # one block span mixing removed and added lines; the token line is removed
    Commit("Add Server", {"src/Server.java": (
        "public class Server {\n"
        "    // TODO: add TLS\n"
        "    // TODO: add HTTP/2\n"
        "    void serve() {}\n"
        "}\n"
    )}, ADDED),  # consecutive added line comments form a single span
    Commit("Add TLS and HTTP/2", {"src/Server.java": (
        "public class Server {\n"
        "    void serve() { tls(); h2(); }\n"
        "}\n"
    )}, POS("todo: add tls\ntodo: add http/2", "add tls and http/2")),
    Commit("Add Cache", {"src/Cache.java": (
        "public class Cache {\n"
        "    int size = 10; // TODO tune size\n"
        "    int ttl = 60; // TODO tune ttl\n"
        "}\n"
    )}, MULTI),  # trailing comments are spans of their own
    Commit("Tune cache size", {"src/Cache.java": (
        "public class Cache {\n"
        "    int size = 64;\n"
        "    int ttl = 60; // TODO tune ttl\n"
        "}\n"
    )}, MULTI),
    Commit("Tune ttl", {"src/Cache.java": (
        "public class Cache {\n"
        "    int size = 64;\n"
        "    int ttl = 300;\n"
        "}\n"
    )}, POS("todo tune ttl", "tune ttl")),
    Commit("Add notes", {"docs/notes.txt": "TODO: write user guide\n"}, NO_TODO),
    Commit("Start feature branch work", {"src/Feature.java": (
        "public class Feature {\n"
        "    // TODO: implement toggle\n"
        "    void toggle() {}\n"
        "}\n"
    )}, ADDED),
    Commit("Implement toggle", {"src/Feature.java": (
        "public class Feature {\n"
        "    boolean on;\n"
        "    void toggle() { on = !on; }\n"
        "}\n"
    )}, POS("todo: implement toggle", "implement toggle"), branch="feature"),
    Commit("Bump version on main", {"VERSION": "1.1\n"}, NOT_TODO, branch="main"),
    # first-parent diff of the merge carries the toggle change again
    Commit("Merge branch 'feature'", {}, POS("todo: implement toggle", "merge branch 'feature'"), merge="feature"),
    Commit("Drop generated dump", {"data/Dump.java": "// TODO: remove dump\n" + BIG.replace("#", "//")}, OVERSIZED),
    Commit("   \n\n", {"src/Main.java": (
        "public class Main {\n"
        "    // TODO: log startup\n"
        "    public static void main(String[] args) {\n"
        "        Config c = Config.load();\n"
        "        start(c);\n"
        "    }\n"
        "}\n"
    )}, ADDED),  # discarded before the message is looked at
    Commit("Log startup", {"src/Main.java": (
        "public class Main {\n"
        "    public static void main(String[] args) {\n"
        "        Log.info(\"start\");\n"
        "        Config c = Config.load();\n"
        "        start(c);\n"
        "    }\n"
        "}\n"
    )}, POS("todo: log startup", "log startup")),
])

GAMMA = RepoSpec("gamma", "python", [
    Commit("Scaffold package", {"pkg/__init__.py": "", "pkg/core.py": (
        "def compute(x):\n"
        "    return x * 2\n"
    )}, NOT_TODO),
    Commit("Add FIXME-style notes", {"pkg/core.py": (
        "def compute(x):\n"
        "    # TODO(alice): support floats\n"
        "    return x * 2\n"
    )}, ADDED),
    Commit("Support floats. Closes #4", {"pkg/core.py": (
        "def compute(x):\n"
        "    return float(x) * 2\n"
    )}, POS("todo(alice): support floats", "support floats.")),
    Commit("Add helpers", {"pkg/helpers.py": (
        "# Helper functions.\n"
        "# TODO: move to core\n"
        "def double(x):\n"
        "    return x * 2\n"
    )}, ADDED),
    Commit("Add triple helper", {"pkg/helpers.py": (
        "# Helper functions.\n"
        "# TODO: move to core\n"
        "def double(x):\n"
        "    return x * 2\n"
        "def triple(x):\n"
        "    return x * 3\n"
    )}, NEG("todo: move to core", "add triple helper")),  # first comment line is outside the context
    Commit("Move helpers into core (revert of 1a2b3c4d)", {"pkg/helpers.py": None, "pkg/core.py": (
        "def compute(x):\n"
        "    return float(x) * 2\n"
        "def double(x):\n"
        "    return x * 2\n"
        "def triple(x):\n"
        "    return x * 3\n"
    )}, POS("helper functions.\ntodo: move to core", "move helpers into core (revert of <commit_id>)")),
    Commit("Add TODO file", {"TODO": "nothing yet\n"}, NO_TODO),
    Commit("Rename core module", {"pkg/core.py": None, "pkg/engine.py": (
        "def compute(x):\n"
        "    return float(x) * 2\n"
        "def double(x):\n"
        "    return x * 2\n"
        "def triple(x):\n"
        "    return x * 3\n"
    )}, NOT_TODO),
    Commit("Add batch mode", {"pkg/batch.py": (
        "def run(items):\n"
        "    '''\n"
        "    TODO: parallelize\n"
        "    '''\n"
        "    return [f(i) for i in items]\n"
    )}, ADDED),
    Commit("Parallelize batch mode with a pool", {"pkg/batch.py": (
        "from multiprocessing import Pool\n"
        "\n"
        "def run(items):\n"
        "    with Pool() as p:\n"
        "        return p.map(f, items)\n"
    )}, POS("todo: parallelize", "parallelize batch mode with a pool")),
    Commit("Add scratch data", {"data.bin": b"\x00\x01TODO\x02\x00"}, NOT_TODO),  # git prints no binary content
    Commit("Add TODO marker in a string", {"pkg/strings.py": "MARK = '# TODO'\n"}, NO_TODO),
    Commit("Add cli", {"pkg/cli.py": (
        "import sys\n"
        "\n"
        "def main():\n"
        "    # TODO: add --help\n"
        "    # TODO: add --version\n"
        "    print(sys.argv)\n"
    )}, ADDED),
    Commit("Print usage", {"pkg/cli.py": (
        "import sys\n"
        "\n"
        "def main():\n"
        "    # TODO: add --help\n"
        "    # TODO: add --version\n"
        "    print('usage: gamma')\n"
    )}, NEG("todo: add --help\ntodo: add --version", "print usage")),
    Commit("Huge fixture", {"pkg/fixture.py": "# TODO: shrink\n" + BIG}, OVERSIZED),
    Commit("Remove huge fixture", {"pkg/fixture.py": None}, OVERSIZED),
    Commit("Add --help! and more", {"pkg/cli.py": (
        "import sys\n"
        "\n"
        "def main():\n"
        "    if '--help' in sys.argv:\n"
        "        return usage()\n"
        "    print('usage: gamma')\n"
    )}, POS("todo: add --help\ntodo: add --version", "add --help!")),
    Commit("Tidy imports", {"pkg/cli.py": (
        "import sys\n"
        "\n"
        "\n"
        "def main():\n"
        "    if '--help' in sys.argv:\n"
        "        return usage()\n"
        "    print('usage: gamma')\n"
    )}, NOT_TODO),
    Commit("Note about ToDo handling", {"pkg/engine.py": (
        "# ToDo: memoize compute\n"
        "def compute(x):\n"
        "    return float(x) * 2\n"
        "def double(x):\n"
        "    return x * 2\n"
        "def triple(x):\n"
        "    return x * 3\n"
    )}, ADDED),
    Commit("Use a faster multiply", {"pkg/engine.py": (
        "# ToDo: memoize compute\n"
        "def compute(x):\n"
        "    return float(x) + float(x)\n"
        "def double(x):\n"
        "    return x * 2\n"
        "def triple(x):\n"
        "    return x * 3\n"
    )}, NEG("todo: memoize compute", "use a faster multiply")),
    Commit("Misc. cleanup", {"pkg/engine.py": (
        "# ToDo: memoize compute\n"
        "def compute(x):\n"
        "    return float(x) + float(x)\n"
        "\n"
        "def double(x):\n"
        "    return x * 2\n"
        "def triple(x):\n"
        "    return x * 3\n"
    )}, NEG("todo: memoize compute", "misc.")),
], archive=True)

REPOS = (ALPHA, BETA, GAMMA)
BASE_TIME = 1_600_000_000


def _git(repo, *args, env=None):
    full_env = dict(os.environ, LC_ALL="C", GIT_CONFIG_NOSYSTEM="1", **(env or {}))
    return subprocess.run(["git", "-C", str(repo), *args], check=True, capture_output=True, env=full_env).stdout


def _apply(repo: Path, changes: dict):
    for rel, content in changes.items():
        path = repo / rel
        if content is None:
            path.unlink()
            continue
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(content, bytes):
            path.write_bytes(content)
        else:
            path.write_text(content, encoding="utf-8", newline="")


def build_git_repo(spec: RepoSpec, path: Path) -> list[str]:
    """Create ``spec`` as a git repository; returns commit ids in spec order."""
    path.mkdir(parents=True)
    _git(path, "init", "-q", "-b", "main")
    ids = []
    for k, commit in enumerate(spec.commits):
        stamp = f"@{BASE_TIME + k * 3600} +0000"
        env = {
            "GIT_AUTHOR_NAME": "Fixture", "GIT_AUTHOR_EMAIL": "f@example.org", "GIT_AUTHOR_DATE": stamp,
            "GIT_COMMITTER_NAME": "Fixture", "GIT_COMMITTER_EMAIL": "f@example.org", "GIT_COMMITTER_DATE": stamp,
        }
        if commit.branch is not None:
            existing = _git(path, "branch", "--list", commit.branch).strip()
            _git(path, "checkout", "-q", *([] if existing else ["-b"]), commit.branch)
        if commit.merge is not None:
            _git(path, "checkout", "-q", "main")
            _git(path, "merge", "-q", "--no-ff", "-m", commit.message, commit.merge, env=env)
        else:
            _apply(path, commit.changes)
            _git(path, "add", "-A")
            _git(path, "commit", "-q", "--allow-empty-message", "-m", commit.message, env=env)
        ids.append(_git(path, "rev-parse", "HEAD").decode().strip())
    return ids


@dataclass
class BuiltCorpus:
    repo_list: Path
    expectations: dict = field(default_factory=dict)  # (repo, commit_id) -> expectation
    paths: dict = field(default_factory=dict)  # repo name -> path
    languages: dict = field(default_factory=dict)  # repo name -> language

    def expected_counters(self) -> dict:
        """Per-language manifest counters implied by the annotations."""
        from todomine.pipeline import COUNTERS

        out = {lang: dict.fromkeys(COUNTERS, 0) for lang in ("python", "java")}
        for (repo, _), expect in self.expectations.items():
            c = out[self.languages[repo]]
            c["commits"] += 1
            outcome = expect[0] if isinstance(expect, tuple) else expect
            if outcome != NOT_TODO:
                c["todo_commits"] += 1
                c[outcome] += 1
        return out

    def expected_records(self) -> dict:
        """(repo, commit_id) -> (label, todo_comment, commit_msg) for every emitted sample."""
        return {k: v for k, v in self.expectations.items() if isinstance(v, tuple)}


def build_corpus(root: Path) -> BuiltCorpus:
    """Materialize all fixture repositories under ``root`` and write ``repos.csv``."""
    from todomine.ingest import RepoSource, list_commits, write_patch_archive

    built = BuiltCorpus(root / "repos.csv")
    rows = ["path,language,star_rank"]
    for rank, spec in enumerate(REPOS):
        git_path = root / ("git-" + spec.name if spec.archive else spec.name)
        ids = build_git_repo(spec, git_path)
        path = git_path
        if spec.archive:
            path = root / spec.name
            write_patch_archive(list_commits(RepoSource(str(git_path), spec.language)), path)
        for cid, commit in zip(ids, spec.commits):
            built.expectations[(spec.name, cid)] = commit.expect
        built.paths[spec.name] = path
        built.languages[spec.name] = spec.language
        rows.append(f"{path.name},{spec.language},{rank + 1}")
    built.repo_list.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return built
