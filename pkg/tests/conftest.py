"""Collects acceptance-criterion outcomes and prints them at the end of the run."""
import pytest

_RESULTS = {}


class _Recorder:
    def __init__(self, number, title):
        self.number = number
        self.title = title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        extra = self.detail if exc_type is None else f"{self.detail} {exc_type.__name__}: {exc}".strip()
        _RESULTS[self.number] = f"criterion {self.number} [{self.title}]: {status}" + (f" ({extra})" if extra else "")
        return False


@pytest.fixture
def criterion():
    return _Recorder


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        terminalreporter.write_line(_RESULTS[n])
