import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=150, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = Path(__file__).parent / "data"
FIG1 = "cabaacabcabaacaaabcab"


def enc(s: str) -> list[int]:
    """Letters to dense ids: a=0, b=1, ..."""
    return [ord(ch) - ord("a") for ch in s]


@pytest.fixture
def fig1():
    return enc(FIG1)


@pytest.fixture(params=sorted(p.name for p in DATA.iterdir()))
def corpus_file(request):
    return DATA / request.param


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
