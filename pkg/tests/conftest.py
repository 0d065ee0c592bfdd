import sys
from pathlib import Path

import pytest

from qoisim import load_lp, load_scenario
from qoisim.model import ChannelSpec, DeviceSpec, Scenario, reference_formats

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"


@pytest.fixture(scope="session")
def two_device():
    return load_scenario(SCENARIOS / "two-device.cfg")


@pytest.fixture(scope="session")
def five_device():
    return load_scenario(SCENARIOS / "five-device.cfg")


@pytest.fixture(scope="session")
def table1():
    return load_lp(SCENARIOS / "table1.lp")


def single_device(event_prob=1.0, V=800.0, u=((0, 0.5), (10, 0.5)), s_q=30, s_j=30, horizon=100):
    dev = DeviceSpec(1, reference_formats(), s_q, s_j)
    ch = ChannelSpec(1, None, tuple(r for r, _ in u), tuple(p for _, p in u))
    return Scenario((dev,), (ch,), event_prob, V, horizon, 0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
