import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from conftest import simulate_grid
from dcffr import analytic
from dcffr.errors import ConfigError, NumericDivergenceError
from dcffr.grid import (
    Disturbance,
    GridParams,
    GridState,
    check_finite,
    disturbance_power,
    governor_target,
    governor_update,
    mw_per_hz_to_pu,
    step,
    swing_rhs,
)

TRIP = Disturbance("generation_trip", 200.0, 5.0)


def reference_solution(params: GridParams, dp_pu: float, t_eval, t_start=0.0):
    """Tight-tolerance integration of the unclamped grid ODE in per-unit frequency."""

    def rhs(t, y):
        x, pg, agc = y
        p = dp_pu if t >= t_start else 0.0
        dx = (p + pg + agc - params.damping_d * x) / (2 * params.inertia_h)
        dpg = (-x / params.governor_droop_r - pg) / params.governor_tc if params.governor_enabled else 0.0
        return [dx, dpg, -params.agc_gain * x]

    sol = solve_ivp(rhs, (t_start, t_eval[-1]), [0.0, 0.0, 0.0], t_eval=t_eval,
                    method="DOP853", rtol=1e-12, atol=1e-15)
    return params.f0 * sol.y[0]


@pytest.mark.parametrize(
    "gain, expected",
    [(0.0, 0.0), (25.0, 25 * 60 / 6100), (6100 / 60, 1.0)],
)
def test_mw_per_hz_to_pu(gain, expected):
    assert mw_per_hz_to_pu(gain, 6100, 60) == pytest.approx(expected, rel=1e-15)
    assert mw_per_hz_to_pu(25, 6100, 60) == pytest.approx(0.2459016393, rel=1e-9)


@pytest.mark.parametrize("s_sys, f0", [(0, 60), (6100, 0), (-1, 60)])
def test_mw_per_hz_to_pu_rejects_bad_base(s_sys, f0):
    with pytest.raises(ConfigError):
        mw_per_hz_to_pu(10, s_sys, f0)


def test_disturbance_power():
    assert disturbance_power(TRIP, 4.99) == 0.0
    assert disturbance_power(TRIP, 5.0) == pytest.approx(-0.0327868852, rel=1e-8)
    load = Disturbance("load_step", 150.0, 5.0)
    assert disturbance_power(load, 10.0) == pytest.approx(-0.0245901639, rel=1e-8)
    assert disturbance_power(Disturbance("none", 500.0, 0.0), 10.0) == 0.0


@pytest.mark.parametrize("kwargs", [{"kind": "blackout"}, {"magnitude": -1}, {"t_start": -0.1}])
def test_disturbance_validation(kwargs):
    with pytest.raises(ConfigError):
        Disturbance(**kwargs)


def test_governor_update():
    p = GridParams()
    assert governor_update(GridState(), p, 0.01) == 0.0
    # hold Δf long enough for the lag to settle: (0.3/60)/0.05 = 0.1 p.u.
    s = GridState(delta_f=-0.3)
    g = 0.0
    for _ in range(20000):
        g = governor_update(replace(s, p_gov=g), replace(p, governor_limit=1.0), 0.01)
    assert g == pytest.approx(0.1, rel=1e-9)
    off = replace(p, governor_enabled=False)
    assert governor_update(GridState(delta_f=-0.5, p_gov=0.0), off, 0.01) == 0.0


def test_governor_respects_limit():
    p = GridParams(governor_limit=0.02)
    g = 0.0
    for _ in range(10000):
        g = governor_update(GridState(delta_f=-1.0, p_gov=g), p, 0.01)
    assert g == pytest.approx(0.02)


@given(st.floats(-2.0, 2.0, allow_nan=False), st.floats(-0.1, 0.1))
def test_governor_sign(delta_f, p_gov):
    p = GridParams()
    target = governor_target(delta_f, p)
    assert math.copysign(1.0, -delta_f) * target >= 0 or target == 0
    nxt = governor_update(GridState(delta_f=delta_f, p_gov=p_gov), p, 0.01)
    # moves toward the target, never away
    assert abs(nxt - target) <= abs(p_gov - target) + 1e-15


def test_swing_rhs():
    p = GridParams(inertia_h=2.0, damping_d=0.0)
    assert swing_rhs(0.0, 0.0, p) == 0.0
    rocof = swing_rhs(0.0, -200 / 6100, p)
    assert rocof == pytest.approx(-0.4918032787, rel=1e-9)
    assert swing_rhs(0.0, -200 / 6100, replace(p, inertia_h=4.0)) == rocof / 2


def test_quiescent_fixed_point():
    traj = simulate_grid(GridParams(), Disturbance("none", 0.0, 0.0), 0.01, 20.0)
    assert all(x == 0.0 for x in traj)


def test_first_post_event_step():
    p = GridParams()
    traj = simulate_grid(p, TRIP, 0.01, 5.01)
    assert traj[500] == 0.0
    ref = reference_solution(p, -200 / 6100, np.array([5.0, 5.01]), t_start=5.0)[-1]
    assert traj[501] == pytest.approx(ref, abs=1e-10)
    # RoCoF * dt with a small damping/governor correction
    assert traj[501] == pytest.approx(-0.4918 * 0.01, abs=1e-5)


def test_matches_reference_ode():
    p = GridParams()
    traj = np.array(simulate_grid(p, Disturbance("generation_trip", 200.0, 0.0), 0.01, 20.0))
    t = np.arange(len(traj)) * 0.01
    ref = reference_solution(p, -200 / 6100, t)
    assert np.max(np.abs(traj - ref)) < 1e-8


def test_richardson_fourth_order():
    p = GridParams()
    dist = Disturbance("generation_trip", 200.0, 0.0)
    ref = reference_solution(p, -200 / 6100, np.array([0.0, 4.0]))[-1]
    errs = [abs(simulate_grid(p, dist, dt, 4.0)[-1] - ref) for dt in (0.2, 0.1, 0.05)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    for r in ratios:
        assert 12 < r < 20


def test_dt_convergence_linear_config():
    p = GridParams(governor_limit=1.0)
    coarse = np.array(simulate_grid(p, TRIP, 0.01, 60.0))
    fine = np.array(simulate_grid(p, TRIP, 0.001, 60.0))[::10]
    assert np.max(np.abs(coarse - fine)) < 1e-6


def test_linearity():
    p = GridParams(governor_limit=10.0)
    a = np.array(simulate_grid(p, Disturbance("generation_trip", 100.0, 1.0), 0.01, 30.0))
    b = np.array(simulate_grid(p, Disturbance("generation_trip", 200.0, 1.0), 0.01, 30.0))
    np.testing.assert_allclose(b, 2 * a, rtol=1e-9, atol=1e-15)


def test_determinism():
    a = simulate_grid(GridParams(), TRIP, 0.01, 30.0)
    b = simulate_grid(GridParams(), TRIP, 0.01, 30.0)
    assert a == b


def test_agc_restores_frequency():
    traj = simulate_grid(GridParams(agc_gain=4.0), TRIP, 0.01, 200.0)
    assert abs(traj[-1]) < 1e-4


def test_final_value_without_agc():
    dp = -200 / 6100
    p = GridParams(agc_gain=0.0)
    traj = simulate_grid(p, TRIP, 0.01, 200.0)
    expected = 60 * dp / (p.damping_d + 1 / p.governor_droop_r)
    assert traj[-1] == pytest.approx(expected, abs=1e-9)

    no_gov = replace(p, governor_enabled=False)
    traj = simulate_grid(no_gov, TRIP, 0.01, 200.0)
    model = analytic.ClosedLoopModel(h=2.0, d=0.8, k_dc=0.0, tau=0.0)
    assert traj[-1] == pytest.approx(analytic.steady_state_deviation(model, dp), abs=1e-4)


def test_divergence_names_field():
    with pytest.raises(NumericDivergenceError, match="delta_f"):
        step(GridState(delta_f=float("nan")), 0.0, TRIP, GridParams(), 0.01)
    with pytest.raises(NumericDivergenceError, match="delta_f"):
        step(GridState(agc_integral=float("inf")), 0.0, TRIP, GridParams(), 0.01)
    with pytest.raises(NumericDivergenceError, match=r"p_gov=nan at t=1\.5"):
        check_finite(1.5, delta_f=0.0, p_gov=float("nan"))


def test_tiny_inertia_diverges():
    with pytest.raises(NumericDivergenceError):
        simulate_grid(GridParams(inertia_h=1e-4), TRIP, 0.01, 10.0)


def test_step_rejects_bad_dt():
    with pytest.raises(ConfigError):
        step(GridState(), 0.0, TRIP, GridParams(), 0.0)


@pytest.mark.parametrize(
    "field, value",
    [("f0", 0), ("s_sys", -1), ("inertia_h", 0), ("damping_d", -0.1), ("governor_droop_r", 0),
     ("governor_tc", 0), ("agc_gain", -1), ("governor_limit", -0.1), ("inertia_h", float("nan"))],
)
def test_grid_params_validation(field, value):
    with pytest.raises(ConfigError, match=field):
        GridParams(**{field: value})


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 400.0))
def test_governor_within_limit_every_step(mag):
    p = GridParams(governor_limit=0.02)
    s = GridState()
    dist = Disturbance("generation_trip", mag, 0.0)
    for k in range(500):
        s = step(s, 0.0, dist, p, 0.01)
        assert abs(s.p_gov) <= p.governor_limit
