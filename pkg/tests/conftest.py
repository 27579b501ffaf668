import csv
import os

import pytest
from hypothesis import settings

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def read_fixture(name):
    with open(os.path.join(FIXTURES, name), newline="") as fh:
        return list(csv.DictReader(fh))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def tmp_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path
