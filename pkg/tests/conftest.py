import time

import pytest

from riskhorizon.calibration import CALIBRATED_MEASURES, calibrate
from riskhorizon.evaluation import TraceInputs
from riskhorizon.scenarios import default_specs, generate_all


@pytest.fixture(scope="session")
def default_set():
    return generate_all(default_specs(seed=0))


@pytest.fixture(scope="session")
def shared_inputs(default_set):
    return {inst.name: TraceInputs(inst) for inst in default_set}


@pytest.fixture(scope="session")
def calibration(default_set, shared_inputs):
    """Calibration of every measure on the default set, with its wall time."""
    start = time.perf_counter()
    results = {m: calibrate(default_set, m, inputs=shared_inputs) for m in CALIBRATED_MEASURES}
    return results, time.perf_counter() - start


@pytest.fixture(scope="session")
def calibrated(calibration):
    results, _ = calibration
    params = {m: r.params for m, r in results.items() if r.feasible}
    if "TTCE" in params:
        params["TTC"] = params["TTCE"]
    return params


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line, print it, then assert it."""

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}"
        _CRITERIA.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: float(s.split()[2].rstrip(":").split("(")[0])):
            terminalreporter.write_line(line)
