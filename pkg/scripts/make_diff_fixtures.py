#!/usr/bin/env python3
"""Generate the frozen diff corpus under tests/fixtures/diffs/.

Random edits are committed to a scratch git repository and the diffs are
taken from ``git diff`` (varying context width) and GNU ``diff -u``. The
corpus covers renames, added/deleted files, binary files, mode changes,
missing final newlines, CRLF line endings and non-ASCII text.

    python3 scripts/make_diff_fixtures.py [--out DIR] [--seed N] [--count N]
"""
import argparse
import os
import random
import shutil
import subprocess
import tempfile
from pathlib import Path

WORDS = "alpha beta gamma delta todo fix value return self parse élan 数据 counter // # /* */".split()
ENV = dict(os.environ, LC_ALL="C", GIT_CONFIG_NOSYSTEM="1", GIT_AUTHOR_DATE="2020-01-01T00:00:00Z",
           GIT_COMMITTER_DATE="2020-01-01T00:00:00Z")


def git(repo, *args):
    return subprocess.run(["git", "-C", str(repo), *args], check=True, capture_output=True, env=ENV).stdout


def random_line(rng):
    indent = " " * rng.choice([0, 0, 4, 8])
    return indent + " ".join(rng.choice(WORDS) for _ in range(rng.randint(0, 6)))


def random_text(rng, n=None):
    n = rng.randint(1, 30) if n is None else n
    eol = "\r\n" if rng.random() < 0.05 else "\n"
    body = eol.join(random_line(rng) for _ in range(n))
    return body + (eol if rng.random() < 0.85 else "")


def edit(rng, text):
    lines = text.split("\n")
    for _ in range(rng.randint(1, 6)):
        op = rng.random()
        pos = rng.randint(0, len(lines))
        if op < 0.4:
            lines.insert(pos, random_line(rng))
        elif op < 0.7 and lines:
            del lines[min(pos, len(lines) - 1)]
        elif lines:
            lines[min(pos, len(lines) - 1)] = random_line(rng)
    out = "\n".join(lines)
    if rng.random() < 0.1:
        out = out.rstrip("\n") if out.endswith("\n") else out + "\n"
    return out


def mutate(rng, repo):
    for _ in range(rng.randint(1, 3)):
        files = sorted(p for p in repo.rglob("*") if p.is_file() and ".git" not in p.parts)
        text_files = [p for p in files if p.suffix != ".bin"]
        r = rng.random()
        if r < 0.45 and text_files:
            p = rng.choice(text_files)
            p.write_text(edit(rng, p.read_bytes().decode("utf-8")), encoding="utf-8", newline="")
        elif r < 0.6:
            d = repo / rng.choice(["", "pkg", "pkg/sub", "src"])
            d.mkdir(parents=True, exist_ok=True)
            ext = rng.choice([".py", ".java", ".txt"])
            (d / f"f{rng.randrange(10**6)}{ext}").write_text(random_text(rng), encoding="utf-8", newline="")
        elif r < 0.7 and len(files) > 1:
            rng.choice(files).unlink()
        elif r < 0.8 and text_files:
            src = rng.choice(text_files)
            dst = src.with_name(f"moved{rng.randrange(10**6)}{src.suffix}")
            git(repo, "add", "-A")
            git(repo, "mv", str(src.relative_to(repo)), str(dst.relative_to(repo)))
            if rng.random() < 0.5:
                dst.write_text(edit(rng, dst.read_bytes().decode("utf-8")), encoding="utf-8", newline="")
        elif r < 0.9:
            name = repo / f"blob{rng.randrange(4)}.bin"
            name.write_bytes(bytes(rng.randrange(256) for _ in range(rng.randint(1, 64))) + b"\0")
        elif files:
            p = rng.choice(files)
            p.chmod(p.stat().st_mode ^ 0o111)
    git(repo, "add", "-A")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests/fixtures/diffs")
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--count", type=int, default=220)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    if args.out.exists():
        shutil.rmtree(args.out)
    args.out.mkdir(parents=True)

    with tempfile.TemporaryDirectory() as tmp:
        repo = Path(tmp) / "repo"
        repo.mkdir()
        git(repo, "init", "-q")
        for i in range(5):
            (repo / f"seed{i}.py").write_text(random_text(rng, 20), encoding="utf-8", newline="")
        git(repo, "add", "-A")
        git(repo, "-c", "user.name=f", "-c", "user.email=f@f", "commit", "-qm", "seed")
        written = 0
        while written < args.count:
            mutate(rng, repo)
            if not git(repo, "diff", "--cached", "--name-only").strip():
                continue
            git(repo, "-c", "user.name=f", "-c", "user.email=f@f", "commit", "-qm", f"c{written}")
            flags = ["--no-color", "--no-ext-diff", "--find-renames", f"-U{rng.choice([0, 1, 3, 3, 3, 5])}"]
            out = git(repo, "diff", *flags, "HEAD~1", "HEAD")
            (args.out / f"{written:03d}_git.diff").write_bytes(out)
            written += 1

        # GNU diff on pairs of random texts
        for i in range(40):
            a, b = Path(tmp) / "a.py", Path(tmp) / "b.py"
            old = random_text(rng)
            a.write_text(old, encoding="utf-8", newline="")
            b.write_text(edit(rng, old), encoding="utf-8", newline="")
            proc = subprocess.run(
                ["diff", "-u", f"-U{rng.choice([0, 2, 3])}", "--label", "a/x.py", "--label", "b/x.py", str(a), str(b)],
                capture_output=True,
            )
            if proc.stdout:
                (args.out / f"{written + i:03d}_gnu.diff").write_bytes(proc.stdout)
    print(f"wrote fixtures to {args.out}")


if __name__ == "__main__":
    main()
