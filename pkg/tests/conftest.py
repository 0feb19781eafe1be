import random
from fractions import Fraction

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return random.Random(20240611)


def small_fraction(r: random.Random, bound: int = 5) -> Fraction:
    return Fraction(r.randint(-bound, bound), r.randint(1, 3))


def pytest_terminal_summary(terminalreporter):
    from _report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
