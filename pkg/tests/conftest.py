import pytest

from sustainrec.corpus import Dataset, Post


def make_posts(rows):
    """Build posts from ``(user, resource, timestamp[, tags])`` tuples."""
    posts = []
    for i, row in enumerate(rows):
        user, resource, ts = row[:3]
        tags = row[3] if len(row) > 3 else ("t",)
        posts.append(Post(user, resource, frozenset(tags), ts, i))
    return Dataset(posts)


@pytest.fixture
def write_tsv(tmp_path):
    def write(lines, name="posts.tsv"):
        path = tmp_path / name
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return path
    return write


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _acceptance.items():
        name = nodeid.split("::")[-1]
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        terminalreporter.write_line(f"{label}  {name}")
