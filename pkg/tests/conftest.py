from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from calibkit.cartan import polar_spaces
from calibkit.stabilizer import stab_algebra, symbol_rank, system

settings.register_profile("calibkit", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("calibkit")


@lru_cache(maxsize=None)
def cached_stab(name):
    return stab_algebra(system(name))


@lru_cache(maxsize=None)
def cached_spaces(name):
    return tuple(polar_spaces(system(name)))


@lru_cache(maxsize=None)
def cached_rank(name):
    return symbol_rank(system(name))


@pytest.fixture(scope="session")
def stab():
    return cached_stab


@pytest.fixture(scope="session")
def spaces():
    return cached_spaces


@pytest.fixture(scope="session")
def rank():
    return cached_rank


# -- acceptance criterion lines ---------------------------------------------------

_CRITERIA: dict[str, list[str]] = {}
_TOLERANCES: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name, tolerance): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    _TOLERANCES.setdefault(name, marker.kwargs.get("tolerance", "exact"))
    results = _CRITERIA.setdefault(name, [])
    if rep.when == "call":
        results.append("pass" if rep.passed else "fail")
    elif rep.failed:
        results.append("fail")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, results in _CRITERIA.items():
        status = "PASS" if results and all(r == "pass" for r in results) else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  [tolerance: {_TOLERANCES[name]}]  "
                                    f"({results.count('pass')}/{len(results)} tests)")
