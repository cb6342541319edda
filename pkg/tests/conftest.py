import numpy as np
import pytest

from taylorlp.panel import PanelDataset

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion gate")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = getattr(report, "_criterion", None)
    if marker is None:
        return
    prev = _RESULTS.get(marker, "PASS")
    _RESULTS[marker] = "PASS" if prev == "PASS" and report.outcome == "passed" else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), status in sorted(_RESULTS.items()):
        terminalreporter.write_line(f"criterion {num:>2} {status}  {title}")


def random_panel(rng, n_countries, n_years, missing=0.0, n_x=2, start=2009):
    """Balanced-grid panel with y, x0..x{n_x-1} and cell-level missingness."""
    keys, cols = [], {f"x{j}": [] for j in range(n_x)}
    cols["y"] = []
    for c in range(n_countries):
        a = rng.normal(0, 3)
        for t in range(n_years):
            keys.append((f"K{c:02d}", start + t))
            xs = rng.normal(size=n_x)
            for j in range(n_x):
                cols[f"x{j}"].append(xs[j])
            cols["y"].append(a + 0.3 * t + xs @ np.linspace(1, -1, n_x) + rng.normal())
    data = {k: np.array(v) for k, v in cols.items()}
    if missing:
        for k in data:
            data[k][rng.random(len(keys)) < missing] = np.nan
    return PanelDataset.from_rows(keys, data)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
