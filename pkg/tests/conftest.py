import numpy as np
import pytest

from grammoments import (
    exponential_spectrum,
    sample_eigenvalues,
    stable_moments_upto,
    validate_ensemble,
)

MC_SEED = 2016
MC_SAMPLES = 100_000


@pytest.fixture(scope="session")
def config1():
    return validate_ensemble(3, 5, exponential_spectrum(5, 0.85))


@pytest.fixture(scope="session")
def config2():
    return validate_ensemble(3, 20, exponential_spectrum(20, 0.85))


@pytest.fixture(scope="session")
def moments1(config1):
    return stable_moments_upto(config1, 45)


@pytest.fixture(scope="session")
def moments2(config2):
    return stable_moments_upto(config2, 45)


@pytest.fixture(scope="session")
def sample1(config1):
    return sample_eigenvalues(config1, MC_SAMPLES, MC_SEED)


@pytest.fixture(scope="session")
def sample2(config2):
    return sample_eigenvalues(config2, MC_SAMPLES, MC_SEED)


def random_spectrum(rng, q, min_gap=0.05):
    """Spectrum of size q with min-gap / max-eigenvalue >= min_gap and a random overall scale."""
    scale = 10.0 ** rng.uniform(-3, 3)
    while True:
        b = np.sort(rng.uniform(0.05, 2.0, q)) * scale
        if q == 1 or np.min(np.diff(b)) / b[-1] >= min_gap:
            return b


# -- acceptance report --------------------------------------------------------

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        number = marker.args[0]
        entry = _ACCEPTANCE.setdefault(number, {"title": marker.kwargs.get("title", ""), "ok": True, "failed": []})
        if report.failed:
            entry["ok"] = False
            entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[number]
        status = "PASS" if entry["ok"] else "FAIL"
        line = f"[{status}] criterion {number}: {entry['title']}"
        if entry["failed"]:
            line += f"  (failing: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
