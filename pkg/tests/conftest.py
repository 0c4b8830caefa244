import numpy as np
import pytest
from hypothesis import strategies as st

from qrepeater.states import BellCoefficients


@st.composite
def bell_states(draw):
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(lambda v: sum(v) > 1e-3))
    total = sum(w)
    return BellCoefficients.from_weights([x / total for x in w])


def random_bell(rng: np.random.Generator) -> BellCoefficients:
    return BellCoefficients.from_weights(rng.dirichlet(np.ones(4)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance report --------------------------------------------------------------

_acceptance: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    n, title = marker.args
    entry = _acceptance.setdefault(n, {"title": title, "passed": 0, "failed": []})
    if report.failed:
        entry["failed"].append(item.name)
    elif report.when == "call" and report.passed:
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        e = _acceptance[n]
        status = "FAIL" if e["failed"] else "PASS"
        detail = f"{e['passed']} checks passed"
        if e["failed"]:
            detail += f", failed: {', '.join(e['failed'])}"
        terminalreporter.write_line(f"criterion {n:2d} {status}  {e['title']} ({detail})")
