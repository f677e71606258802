import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hecke_pairing.mat2 import LevelContext  # noqa: E402
from hecke_pairing.process import enumerate_certified_L  # noqa: E402
from hecke_pairing.relations import seed_kb  # noqa: E402

_ACCEPTANCE_LINES = []


def record_acceptance(line):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def enumerated():
    """Knowledge bases certified to level 4, keyed by N (built lazily)."""
    cache = {}

    def get(N, n_max=4):
        if (N, n_max) not in cache:
            kb = seed_kb(LevelContext(N))
            enumerate_certified_L(kb, n_max)
            cache[(N, n_max)] = kb
        return cache[(N, n_max)]
    return get
