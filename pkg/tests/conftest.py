import pytest

from mrsm.ff import ff_make


@pytest.fixture(scope="session")
def gf8():
    return ff_make(3)


@pytest.fixture(scope="session")
def gf256():
    return ff_make(8)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
