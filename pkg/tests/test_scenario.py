from dataclasses import replace

import numpy as np
import pytest

from conftest import linear_scenario
from dcffr import analytic
from dcffr.errors import ConfigError
from dcffr.grid import Disturbance
from dcffr.scenario import (
    Scenario,
    TimeSeries,
    compare_cases,
    compute_metrics,
    run,
    run_case,
    scale_gains,
    sweep,
)

SCENARIO_A = Scenario()
SCENARIO_B = Scenario(disturbance=Disturbance("load_step", 150.0, 5.0))


def trapezoid(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def synthetic_series(deficit_mw, p_srv0, dt=0.01, duration=60.0):
    n = int(round(duration / dt)) + 1
    t = np.arange(n) * dt
    zeros = np.zeros(n)
    p_srv = p_srv0 - deficit_mw(t)
    return TimeSeries(t, zeros, zeros, p_srv, zeros, zeros, zeros, zeros)


def test_flat_without_disturbance():
    for mode in ("baseline", "ups_only", "coordinated"):
        sc = Scenario(disturbance=Disturbance("none", 0.0, 5.0)).with_mode(mode)
        ts, m = run_case(sc)
        assert np.all(ts.delta_f == 0.0)
        assert np.allclose(ts.p_dc, 20.0, rtol=0, atol=1e-12)
        assert m.f_min == 60.0
        assert m.delta_sla == 0.0 and m.e_ffr == 0.0
        assert m.t_rec == 0.0


def test_series_shape():
    ts = run(SCENARIO_A)
    assert len(ts) == 6001
    np.testing.assert_array_equal(ts.t, np.arange(6001) * 0.01)
    assert np.all(ts.p_cool == SCENARIO_A.dc.p_cool0)
    np.testing.assert_allclose(ts.p_dc, ts.p_srv + ts.p_cool - ts.p_ups, atol=1e-12)


def test_synthetic_sla():
    p_srv0 = 20 / 1.2

    def deficit(t):
        d = np.where((t > 5.0 + 1e-9) & (t < 11.0 - 1e-9), 2.0, 0.0)
        d[np.isclose(t, 5.0) | np.isclose(t, 11.0)] = 1.0
        return d

    ts = synthetic_series(deficit, p_srv0)
    m = compute_metrics(ts, SCENARIO_A)
    assert m.delta_sla == pytest.approx(100 * 2 * 6 / (p_srv0 * 60), rel=1e-12)
    assert m.delta_sla == pytest.approx(1.2, rel=1e-12)
    # energy integral starts at t_start, so the 4.99-5.00 s ramp is excluded
    assert m.e_ffr == pytest.approx((12 - 0.5 * 0.01) / 3600, rel=1e-12)


def test_e_ffr_is_sum_of_parts():
    ts, total = run_case(SCENARIO_A.with_mode("coordinated"))
    ups_only = compute_metrics(ts, SCENARIO_A, e_ffr_scope="ups")
    deferred = np.maximum(0.0, SCENARIO_A.dc.p_srv0 - ts.p_srv)
    i0 = 500
    it_mwh = trapezoid(deferred[i0:], ts.t[i0:]) / 3600
    ups_mwh = trapezoid(np.abs(ts.p_ups[i0:]), ts.t[i0:]) / 3600
    assert ups_only.e_ffr == pytest.approx(ups_mwh, rel=1e-9)
    assert total.e_ffr == pytest.approx(ups_mwh + it_mwh, rel=1e-9)


@pytest.mark.parametrize("scenario", [SCENARIO_A, SCENARIO_B], ids=["A", "B"])
@pytest.mark.parametrize("coupling", ["continuous", "sampled"])
def test_case_ordering(scenario, coupling):
    results, _ = compare_cases(replace(scenario, coupling=coupling))
    base, ups, coord = (r.metrics for r in results)
    assert base.f_min < ups.f_min < coord.f_min
    assert coord.t_rec < ups.t_rec < base.t_rec
    assert base.delta_sla == 0.0 and ups.delta_sla == 0.0
    assert 0 < coord.delta_sla < 2
    assert results[0].nadir_improvement is None
    assert results[2].nadir_improvement >= results[1].nadir_improvement > 0


def test_compare_without_disturbance_is_trivial():
    results, _ = compare_cases(Scenario(disturbance=Disturbance("none", 0.0, 5.0)))
    assert len({r.metrics for r in results}) == 1
    assert all(r.nadir_improvement in (None, 0.0) for r in results)


def test_avg_ups_power_positive_only():
    ts, m = run_case(SCENARIO_A)
    assert m.avg_ups_power == pytest.approx(ts.p_ups[ts.p_ups > 0].mean())
    _, base = run_case(SCENARIO_A.with_mode("baseline"))
    assert base.avg_ups_power == 0.0


def test_single_nadir_then_settles():
    ts = run(SCENARIO_A.with_mode("baseline"))
    after = ts.delta_f[ts.t >= 5.0]
    i = int(np.argmin(after))
    # strictly falling into the nadir
    assert np.all(np.diff(after[: i + 1]) <= 0)
    assert abs(ts.delta_f[-1]) < 0.02


@pytest.mark.xfail(strict=True, reason="governor loop is underdamped; recovery overshoots nominal")
def test_monotone_recovery_after_nadir():
    ts = run(SCENARIO_A.with_mode("baseline"))
    after = ts.delta_f[ts.t >= 5.0]
    i = int(np.argmin(after))
    assert np.all(np.diff(after[i:]) >= 0)


def test_soc_recharges_after_event():
    ts = run(replace(SCENARIO_A, duration=600.0))
    assert ts.soc.min() < SCENARIO_A.dc.soc_init
    assert ts.soc[-1] == pytest.approx(SCENARIO_A.dc.soc_init, abs=1e-12)


def test_couplings_agree():
    a = run(SCENARIO_A)
    b = run(replace(SCENARIO_A, coupling="sampled"))
    assert np.max(np.abs(a.delta_f - b.delta_f)) < 1e-3


@pytest.mark.parametrize("coupling", ["continuous", "sampled"])
def test_linear_mode_matches_closed_form(coupling):
    sc = linear_scenario(coupling=coupling)
    ts = run(sc)
    model = analytic.ClosedLoopModel.from_params(sc.grid, sc.dc)
    ref = analytic.step_response(model, -200 / 6100, ts.t)
    assert np.max(np.abs(ts.delta_f - ref)) < 1e-4


def test_scale_gains_keeps_ratio():
    dc = scale_gains(SCENARIO_A.dc, 30.0)
    assert (dc.k_srv, dc.k_ups) == pytest.approx((12.0, 18.0))
    zero = replace(SCENARIO_A.dc, k_srv=0.0, k_ups=0.0)
    assert scale_gains(zero, 10.0).k_srv == pytest.approx(4.0)


def test_sweep_zero_gain():
    cells = sweep(replace(SCENARIO_A, duration=20.0), [0.0], [2.0, 5.0])
    assert [c.nadir_improvement for c in cells] == [0.0, 0.0]


def test_sweep_order_and_worker_invariance():
    sc = replace(SCENARIO_A, duration=15.0)
    serial = sweep(sc, [10.0, 30.0], [2.0, 4.0], workers=1)
    parallel = sweep(sc, [10.0, 30.0], [2.0, 4.0], workers=3)
    assert serial == parallel
    assert [(c.h, c.k_dc) for c in serial] == [(2.0, 10.0), (2.0, 30.0), (4.0, 10.0), (4.0, 30.0)]


def test_dt_halving_stability():
    coarse = run_case(SCENARIO_A)[1]
    fine = run_case(replace(SCENARIO_A, dt=0.005))[1]
    assert abs(coarse.f_min - fine.f_min) < 1e-4
    assert abs(coarse.t_rec - fine.t_rec) < 2 * 0.01


@pytest.mark.parametrize(
    "kw",
    [{"dt": 0.0}, {"duration": 4.0}, {"dt": 0.03, "duration": 10.0}, {"coupling": "loose"}, {"dt": 100.0}],
)
def test_scenario_validation(kw):
    with pytest.raises(ConfigError):
        Scenario(**kw)


def test_never_recovered():
    sc = replace(SCENARIO_A, grid=replace(SCENARIO_A.grid, agc_gain=0.0, governor_enabled=False),
                 duration=10.0)
    assert run_case(sc)[1].t_rec is None
