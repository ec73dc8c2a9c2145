import math

import pytest

from sgcircuit import CircuitParams

# reference array: E_C^b = 1 GHz, E_J^a = 100 GHz, N = 500 junctions per coupler
REF = dict(ej_a=100.0, ec_a=1.0, ec_b=1.0, n_junctions=500, m_squids=100)


@pytest.fixture
def reference_circuit():
    def make(ej_b=-10.0, **overrides):
        return CircuitParams(**dict(REF, ej_b=ej_b, **overrides))

    return make


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(tag, title): acceptance criterion reported in the summary")
    config._criteria = []


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    tag, title = marker.args
    passed = call.excinfo is None
    item.config._criteria.append((tag, title, passed))


def _order(tag):
    number = "".join(ch for ch in tag if ch.isdigit())
    return (int(number) if number else math.inf, tag)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criteria", [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for tag, title, passed in sorted(results, key=lambda r: _order(r[0])):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {tag}: {title}")
    failed = sum(not p for *_, p in results)
    terminalreporter.write_line(f"{len(results) - failed}/{len(results)} acceptance checks passed")
