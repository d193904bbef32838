import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from timebin_sim.link import ChannelParams, DetectorParams  # noqa: E402
from timebin_sim.montecarlo import Scenario  # noqa: E402
from timebin_sim.rates import SourceBrightness  # noqa: E402
from timebin_sim.timebin_state import PhaseConfig  # noqa: E402


def make_scenario(
    mu_c=0.04, mu_ns=0.01, mu_ni=0.02, loss_s=8.0, loss_i=8.0, eta_s=0.08, eta_i=0.07,
    d_s=4e-5, d_i=5e-5, km=0.0, phases=PhaseConfig(), frames=10**6, seed=1,
):
    return Scenario(
        SourceBrightness(mu_c, mu_ns, mu_ni),
        phases,
        ChannelParams(loss_s, DetectorParams(eta_s, d_s, 4e6), km, 0.2),
        ChannelParams(loss_i, DetectorParams(eta_i, d_i, 4e6), km, 0.2),
        frames=frames,
        seed=seed,
    )


@pytest.fixture
def cooled():
    return make_scenario()


ACCEPTANCE_LINES = []
SUITE_BUDGET_S = 120.0
_session_start = []


def pytest_sessionstart(session):
    _session_start.append(time.perf_counter())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
        elapsed = time.perf_counter() - _session_start[0]
        verdict = "PASS" if elapsed < SUITE_BUDGET_S else "FAIL"
        terminalreporter.write_line(
            f"[{verdict}] 9b suite wall time {elapsed:.1f} s (budget {SUITE_BUDGET_S:.0f} s)"
        )
