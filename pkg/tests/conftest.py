import random
import string
from fractions import Fraction
from pathlib import Path

import pytest

from crowdagg.core import Ballot, LabelSet, Profile
from crowdagg.tournament import WeightedTournament

FIXTURES = Path(__file__).parent / "fixtures"


def letters(n):
    return LabelSet(tuple(string.ascii_lowercase[:n]))


def random_profile(rng: random.Random, n: int, max_ballots: int = 20, k: int | None = None) -> Profile:
    ls = letters(n)
    ballots = []
    for e in range(rng.randint(1, max_ballots)):
        depth = k if k is not None else rng.randint(1, n)
        ranked = rng.sample(ls.labels, depth)
        ballots.append(Ballot(f"e{e}", "item", rng.choice(ls.labels), tuple(ranked), ls))
    return Profile("item", tuple(ballots), ls)


def random_tournament(rng: random.Random, n: int) -> WeightedTournament:
    """Independent integer-or-half weights in [0, 20]."""
    w = [[Fraction(0)] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            if a != b:
                w[a][b] = Fraction(rng.randint(0, 40), 2)
    return WeightedTournament(letters(n), w)


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def emotions():
    return LabelSet.default()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")
    config._acceptance_lines = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        number, title = marker.args
        status = "PASS" if report.passed else "FAIL"
        item.config._acceptance_lines[number] = f"[{status}] criterion {number}: {title}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
