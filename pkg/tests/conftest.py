import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gpebohm import Grid, PhysicalParams, rescale
from gpebohm.scenarios import run_preset

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid():
    return Grid()


@pytest.fixture(scope="session")
def params():
    return PhysicalParams()


@pytest.fixture(scope="session")
def scaled(params):
    return rescale(params)


class PresetRunner:
    """Runs presets on demand and memoises both results and shared dynamics."""

    def __init__(self):
        self._cache = {}
        self._results = {}

    def __call__(self, name):
        if name not in self._results:
            self._results[name] = run_preset(name, cache=self._cache)
        return self._results[name]


@pytest.fixture(scope="session")
def presets():
    return PresetRunner()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


class CriterionLog:
    """Collects sub-check outcomes per acceptance criterion for the summary."""

    def __init__(self):
        self.entries = {}

    def check(self, number, title, name, ok, detail=""):
        self.entries.setdefault(number, (title, []))[1].append((name, bool(ok), detail))
        return bool(ok)

    def failures(self, number):
        return [f"{n}: {d}" for n, ok, d in self.entries.get(number, ("", []))[1] if not ok]

    def lines(self):
        out = []
        for number in sorted(self.entries):
            title, checks = self.entries[number]
            verdict = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
            out.append(f"criterion {number} [{verdict}] {title}")
            for name, ok, detail in checks:
                out.append(f"    {'ok ' if ok else 'BAD'} {name}: {detail}")
        return out


_LOG = CriterionLog()


@pytest.fixture(scope="session")
def criteria():
    return _LOG


def pytest_terminal_summary(terminalreporter):
    if _LOG.entries:
        terminalreporter.section("acceptance criteria")
        for line in _LOG.lines():
            terminalreporter.write_line(line)
