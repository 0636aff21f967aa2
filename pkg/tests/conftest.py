import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ucpq.instance import paper_example  # noqa: E402
from ucpq.tailored import PAPER_PENALTIES, compile_tailored  # noqa: E402

from helpers import ACCEPTANCE_LOG  # noqa: E402


@pytest.fixture(scope="session")
def paper():
    return paper_example()


@pytest.fixture(scope="session")
def paper_qubo(paper):
    return compile_tailored(paper, PAPER_PENALTIES)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    # names start with "C<number>"
    for name, ok, detail in sorted(ACCEPTANCE_LOG, key=lambda r: int(r[0].split()[0][1:])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
