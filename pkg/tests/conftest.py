import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from progs import FIG1, sample_text  # noqa: E402

from ladder_verify.parser import parse_program  # noqa: E402
from ladder_verify.smt import SolverConfig  # noqa: E402


def pytest_report_header(config):
    return f"SMT solver: {shutil.which('z3') or 'z3 NOT FOUND (install the test extra)'}"


@pytest.fixture(scope="session")
def z3_path():
    path = shutil.which("z3")
    if path is None:
        pytest.fail("the z3 executable is required; install with `pip install -e .[test]`")
    return path


@pytest.fixture(scope="session")
def solver(z3_path):
    return SolverConfig(z3_path)


@pytest.fixture
def fig1():
    return parse_program(FIG1)


@pytest.fixture
def sample():
    return lambda name: parse_program(sample_text(name))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
