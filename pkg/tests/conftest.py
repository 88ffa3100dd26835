import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chorealloc.gen import gen_table_instance  # noqa: E402


@pytest.fixture
def table1():
    return gen_table_instance("table1", Fraction(1, 4))


@pytest.fixture
def table2():
    return gen_table_instance("table2", Fraction(1, 4))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
