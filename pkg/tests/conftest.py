import numpy as np
import pytest

from qfridge.hilbert import MachineSpec

FRIDGE = dict(E_C=1.0, E_H=100.0, T_C=1.0, T_R=1.0, T_H=100.0)

_criteria: dict[int, list[str]] = {}


def make_spec(**kw) -> MachineSpec:
    params = dict(FRIDGE, p_C=1e-5, p_R=1e-3, p_H=1e-5, g=1e-2)
    params.update(kw)
    return MachineSpec(**params)


@pytest.fixture
def fig2_spec():
    return make_spec()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", int(m.args[0])))


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria.setdefault(number, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        outcomes = _criteria[n]
        ok = all(o == "passed" for o in outcomes)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({len(outcomes)} checks)")
