import contextlib
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

SUITE_BUDGET_SECONDS = 300
_results = {}
_start = time.perf_counter()


@pytest.fixture
def acceptance():
    """Record the outcome of one acceptance criterion for the summary table."""

    @contextlib.contextmanager
    def criterion(number, title):
        try:
            yield
        except BaseException as exc:
            _results[number] = (title, False, f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
            raise
        # a criterion checked several times stays failed once any check failed
        _results.setdefault(number, (title, True, ""))

    return criterion


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    elapsed = time.perf_counter() - _start
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results, key=lambda k: (int(k.rstrip("ab")), k)):
        title, ok, detail = _results[number]
        line = f"criterion {number:>3}: {'PASS' if ok else 'FAIL'}  {title}"
        tr.write_line(line + (f"  ({detail})" if detail else ""))
    within = elapsed < SUITE_BUDGET_SECONDS
    tr.write_line(f"suite runtime {elapsed:.1f}s: {'PASS' if within else 'FAIL'} (budget {SUITE_BUDGET_SECONDS}s)")


def pytest_sessionfinish(session, exitstatus):
    if _results and time.perf_counter() - _start >= SUITE_BUDGET_SECONDS and exitstatus == 0:
        session.exitstatus = 1
