import numpy as np
import pytest

# filled by test_acceptance.py, one (criterion, passed, detail) entry per criterion
ACCEPTANCE_RESULTS = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r[0].split()[1].rstrip(":"))):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
