import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("repo", max_examples=60, deadline=None)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def same_up_to_sign(a, b, tol):
    """Gates agree up to a global sign."""
    a, b = np.asarray(a), np.asarray(b)
    plus = np.max(np.abs(a - b), axis=(-2, -1))
    minus = np.max(np.abs(a + b), axis=(-2, -1))
    return bool(np.all(np.minimum(plus, minus) < tol))


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion; returns the verdict."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def report(number, title, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  [{number}] {title}: {detail}"
        lines.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split("]")[0].split("[")[1]):
            terminalreporter.write_line(line)
