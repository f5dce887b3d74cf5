import json
import math
from pathlib import Path

import pytest

from wetcluster.cluster import InstanceSpec

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def y_trace():
    return [{"angle": math.pi / 2 + k * 2 * math.pi / 3, "label": k + 1} for k in range(3)]


def make_spec(trace, weights, delta=0.0) -> InstanceSpec:
    return InstanceSpec.from_dict({"domain": "ball", "weights": list(weights), "delta": delta, "trace": trace})


@pytest.fixture
def y_spec():
    return make_spec(y_trace(), [1, 1, 1, 1], 0.01)


@pytest.fixture
def two_spec():
    return make_spec([{"angle": 0.0, "label": 1}, {"angle": math.pi, "label": 2}], [1, 1, 1], 0.01)


@pytest.fixture
def general_spec():
    return InstanceSpec.from_dict(json.loads((INSTANCES / "general_y.json").read_text()))


@pytest.fixture(scope="session")
def instances_dir():
    return INSTANCES


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
