import random
import sys

import pytest

from kmslab.fixtures import FIXTURE_NAMES, named
from kmslab.cover import build_cover


@pytest.fixture(params=FIXTURE_NAMES)
def fixture_name(request):
    return request.param


@pytest.fixture
def g(fixture_name):
    return named(fixture_name)


@pytest.fixture
def H(g):
    return build_cover(g)


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
