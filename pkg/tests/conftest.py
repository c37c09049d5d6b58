import pytest

from dcffr.grid import GridState, step

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict for an acceptance criterion, then assert."""

    def _report(name: str, ok: bool, detail: str = ""):
        _ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        assert ok, f"{name}: {detail}"

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def simulate_grid(params, disturbance, dt, duration, relief=0.0):
    """Grid-only trajectory of Δf sampled every step (t = k * dt)."""
    n = int(round(duration / dt))
    s = GridState()
    out = [0.0]
    for k in range(n):
        s = step(GridState(s.delta_f, s.p_gov, s.agc_integral, k * dt), relief, disturbance, params, dt)
        out.append(s.delta_f)
    return out


def linear_scenario(dt=0.01, coupling="continuous", duration=60.0):
    """Simulator configured to match the closed-form model: no deadband, limits,
    governor or AGC, and a storage large enough never to hit SOC bounds."""
    from dataclasses import replace

    from dcffr.datacenter import DataCenterParams
    from dcffr.grid import Disturbance, GridParams
    from dcffr.scenario import Scenario

    grid = replace(GridParams(), governor_enabled=False, agc_gain=0.0)
    dc = replace(DataCenterParams(), deadband=0.0, limits_enabled=False, e_cap=1e6, soc_init=0.5)
    return Scenario(Disturbance("generation_trip", 200.0, 0.0), grid, dc, duration, dt, coupling)
