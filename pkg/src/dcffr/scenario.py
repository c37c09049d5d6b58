"""Scenario runs, performance metrics, case comparison and sensitivity sweeps."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from dcffr import datacenter as dcm
from dcffr import grid as gm
from dcffr.datacenter import MODES, DataCenterParams
from dcffr.errors import ConfigError
from dcffr.grid import Disturbance, GridParams, GridState

COUPLINGS = ("continuous", "sampled")
RECOVERY_BAND_HZ = 0.02

COLUMNS = ("t", "delta_f", "p_gov", "p_srv", "p_ups", "p_cool", "p_dc", "soc")


@dataclass(frozen=True)
class Scenario:
    disturbance: Disturbance = field(default_factory=Disturbance)
    grid: GridParams = field(default_factory=GridParams)
    dc: DataCenterParams = field(default_factory=DataCenterParams)
    duration: float = 60.0
    dt: float = 0.01
    # continuous: data-center lag integrated jointly with the swing equation
    # sampled: controller updated once per step, relief held over the grid step
    coupling: str = "continuous"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"scenario.dt: must be > 0, got {self.dt!r}")
        if not self.dt <= self.duration:
            raise ConfigError("scenario.dt: must not exceed scenario.duration")
        if not self.duration > self.disturbance.t_start:
            raise ConfigError("scenario.duration: must exceed disturbance.t_start")
        if self.coupling not in COUPLINGS:
            raise ConfigError(f"scenario.coupling: {self.coupling!r} not in {COUPLINGS}")
        n = self.duration / self.dt
        if abs(n - round(n)) > 1e-6 * max(1.0, n):
            raise ConfigError("scenario.duration must be an integer multiple of scenario.dt")

    @property
    def mode(self) -> str:
        return self.dc.mode

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    def with_mode(self, mode: str) -> "Scenario":
        return replace(self, dc=replace(self.dc, mode=mode))


@dataclass
class TimeSeries:
    """Uniformly sampled trajectories; powers in MW, frequency deviation in Hz."""

    t: np.ndarray
    delta_f: np.ndarray
    p_gov: np.ndarray
    p_srv: np.ndarray
    p_ups: np.ndarray
    p_cool: np.ndarray
    p_dc: np.ndarray
    soc: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def columns(self) -> list[np.ndarray]:
        return [getattr(self, c) for c in COLUMNS]


@dataclass(frozen=True)
class Metrics:
    f_min: float
    t_nadir: float
    t_rec: Optional[float]
    e_ffr: float
    delta_sla: float
    avg_ups_power: float


@dataclass(frozen=True)
class CaseResult:
    mode: str
    metrics: Metrics
    nadir_improvement: Optional[float]


@dataclass(frozen=True)
class SweepCell:
    k_dc: float
    h: float
    nadir_improvement: float


def run(scenario: Scenario) -> TimeSeries:
    if scenario.coupling == "sampled":
        rows = _run_sampled(scenario)
    else:
        rows = _run_continuous(scenario)
    arr = np.array(rows, dtype=float)
    return TimeSeries(*(arr[:, i].copy() for i in range(len(COLUMNS))))


def _record(t, df, p_gov_pu, p_srv, p_ups, soc, grid: GridParams, dc: DataCenterParams):
    p_cool = dc.p_cool0
    return (t, df, p_gov_pu * grid.s_sys, p_srv, p_ups, p_cool, p_srv + p_cool - p_ups, soc)


def _run_sampled(sc: Scenario) -> list[tuple]:
    g, dc, dt = sc.grid, sc.dc, sc.dt
    gs = GridState()
    ds = dcm.initial_state(dc)
    rows = [_record(0.0, 0.0, 0.0, ds.p_srv, ds.p_ups, ds.soc, g, dc)]
    for k in range(sc.n_steps):
        ds = dcm.advance(ds, gs.delta_f, dc, dt)
        relief = dcm.grid_relief(ds, dc, g.s_sys)
        gs = gm.step(replace(gs, t=k * dt), relief, sc.disturbance, g, dt)
        t = (k + 1) * dt
        rows.append(_record(t, gs.delta_f, gs.p_gov, ds.p_srv, ds.p_ups, ds.soc, g, dc))
    return rows


def _run_continuous(sc: Scenario) -> list[tuple]:
    """Joint RK4 over (Δf, p_gov, agc, p_srv, p_ups); SOC advanced per step."""
    g, dc, dt = sc.grid, sc.dc, sc.dt
    s_sys, f0 = g.s_sys, g.f0
    c_swing = f0 / (2.0 * g.inertia_h)
    damp = g.damping_d / f0
    gov_on = g.governor_enabled
    gov_gain = 1.0 / (g.governor_droop_r * f0)
    gov_lim = g.governor_limit
    inv_tg = 1.0 / g.governor_tc
    agc_k = g.agc_gain / f0

    baseline = dc.mode == "baseline"
    coord = dc.mode == "coordinated"
    p_srv0 = dc.p_srv0
    db, k_srv, k_ups = dc.deadband, dc.k_srv, dc.k_ups
    tau_s, tau_u = dc.tau_server, dc.tau_dc
    limits = dc.limits_enabled
    p_max = dc.p_ups_max

    def targets(df, rech, no_dis, no_ch):
        if baseline:
            return p_srv0, 0.0
        if df < -db:
            srv = p_srv0 + k_srv * df if coord else p_srv0
            ups = -k_ups * df
        elif df > db:
            srv = p_srv0
            ups = -k_ups * df
        else:
            srv = p_srv0
            ups = rech
        if (no_dis and ups > 0.0) or (no_ch and ups < 0.0):
            ups = 0.0
        if limits:
            srv = min(max(srv, 0.0), p_srv0)
            ups = min(max(ups, -p_max), p_max)
        return srv, ups

    def rates(df, pg, agc, ps, pu, ext, rech, no_dis, no_ch):
        ts, tu = targets(df, rech, no_dis, no_ch)
        if tau_s > 0.0:
            d_ps = (ts - ps) / tau_s
        else:
            d_ps, ps = 0.0, ts
        if tau_u > 0.0:
            d_pu = (tu - pu) / tau_u
        else:
            d_pu, pu = 0.0, tu
        relief = (p_srv0 - ps + pu) / s_sys
        d_df = c_swing * (ext + pg + agc + relief - damp * df)
        if gov_on:
            tgt = min(max(-gov_gain * df, -gov_lim), gov_lim)
            d_pg = (tgt - pg) * inv_tg
        else:
            d_pg = 0.0
        return d_df, d_pg, -agc_k * df, d_ps, d_pu

    ds = dcm.initial_state(dc)
    df = pg = agc = 0.0
    ps, pu, soc = ds.p_srv, ds.p_ups, ds.soc
    rows = [_record(0.0, df, pg, ps, pu, soc, g, dc)]
    h2, w = 0.5 * dt, dt / 6.0
    for k in range(sc.n_steps):
        t = k * dt
        ext = gm.disturbance_power(sc.disturbance, t + h2, s_sys)
        no_dis = soc <= dc.soc_min
        no_ch = soc >= dc.soc_max
        if (no_dis and pu > 0.0) or (no_ch and pu < 0.0):
            pu = 0.0
        if baseline or soc >= dc.soc_init:
            rech = 0.0
        else:
            rech = dcm.recharge_controller(0.0, dcm.DataCenterState(ps, pu, soc, 0.0, 0.0), dc, dt)

        a = rates(df, pg, agc, ps, pu, ext, rech, no_dis, no_ch)
        b = rates(df + h2 * a[0], pg + h2 * a[1], agc + h2 * a[2], ps + h2 * a[3], pu + h2 * a[4],
                  ext, rech, no_dis, no_ch)
        c = rates(df + h2 * b[0], pg + h2 * b[1], agc + h2 * b[2], ps + h2 * b[3], pu + h2 * b[4],
                  ext, rech, no_dis, no_ch)
        d = rates(df + dt * c[0], pg + dt * c[1], agc + dt * c[2], ps + dt * c[3], pu + dt * c[4],
                  ext, rech, no_dis, no_ch)
        df += w * (a[0] + 2.0 * b[0] + 2.0 * c[0] + d[0])
        pg += w * (a[1] + 2.0 * b[1] + 2.0 * c[1] + d[1])
        agc += w * (a[2] + 2.0 * b[2] + 2.0 * c[2] + d[2])
        ps += w * (a[3] + 2.0 * b[3] + 2.0 * c[3] + d[3])
        pu += w * (a[4] + 2.0 * b[4] + 2.0 * c[4] + d[4])
        pg = min(max(pg, -gov_lim), gov_lim)
        if tau_s == 0.0 or tau_u == 0.0:
            ts, tu = targets(df, rech, no_dis, no_ch)
            if tau_s == 0.0:
                ps = ts
            if tau_u == 0.0:
                pu = tu
        ps, pu = dcm.clamp_outputs(ps, pu, dc)
        pu = dcm.gate_ups_command(pu, soc, dc)
        soc, pu = dcm.soc_update(dcm.DataCenterState(ps, pu, soc, 0.0, 0.0), dc, dt)

        t = (k + 1) * dt
        gm.check_finite(t, delta_f=df, p_gov=pg, agc_integral=agc, p_srv=ps, p_ups=pu)
        rows.append(_record(t, df, pg, ps, pu, soc, g, dc))
    return rows


def _trapz(y: np.ndarray, dt: float) -> float:
    if len(y) < 2:
        return 0.0
    return float(dt * (y.sum() - 0.5 * (y[0] + y[-1])))


def compute_metrics(ts: TimeSeries, scenario: Scenario, e_ffr_scope: str = "total") -> Metrics:
    """Nadir, recovery time, FFR energy, task delay ratio, mean UPS discharge.

    ``e_ffr_scope="ups"`` counts only UPS energy in the FFR energy figure.
    """
    if len(ts) == 0:
        raise ValueError("empty time series")
    g, dc = scenario.grid, scenario.dc
    dt = scenario.dt
    t_start = scenario.disturbance.t_start
    after = ts.t >= t_start - 1e-9 * dt
    i0 = int(np.argmax(after))
    window = ts.delta_f[i0:]
    i_nadir = i0 + int(np.argmin(window))
    f_min = g.f0 + float(ts.delta_f[i_nadir])
    t_nadir = round(float(ts.t[i_nadir]), 9)

    outside = np.nonzero(np.abs(ts.delta_f) > RECOVERY_BAND_HZ)[0]
    if len(outside) == 0:
        i_rec = i_nadir
    else:
        i_rec = max(int(outside[-1]) + 1, i_nadir)
    t_rec = max(round(float(ts.t[i_rec]) - t_start, 9), 0.0) if i_rec < len(ts) else None

    deferred = np.maximum(0.0, dc.p_srv0 - ts.p_srv)
    ups_mwh = _trapz(np.abs(ts.p_ups[i0:]), dt) / 3600.0
    it_mwh = _trapz(deferred[i0:], dt) / 3600.0
    e_ffr = ups_mwh if e_ffr_scope == "ups" else ups_mwh + it_mwh

    delta_sla = 100.0 * _trapz(deferred, dt) / (dc.p_srv0 * scenario.duration)
    discharging = ts.p_ups[ts.p_ups > 0]
    avg_ups = float(discharging.mean()) if len(discharging) else 0.0
    return Metrics(f_min, t_nadir, t_rec, e_ffr, delta_sla, avg_ups)


def run_case(scenario: Scenario, e_ffr_scope: str = "total") -> tuple[TimeSeries, Metrics]:
    ts = run(scenario)
    return ts, compute_metrics(ts, scenario, e_ffr_scope)


def compare_cases(
    scenario: Scenario, e_ffr_scope: str = "total"
) -> tuple[list[CaseResult], dict[str, TimeSeries]]:
    """Run baseline, ups_only and coordinated on identical grid settings."""
    results, series = [], {}
    base_fmin = None
    for mode in MODES:
        sc = scenario.with_mode(mode)
        ts, m = run_case(sc, e_ffr_scope)
        if mode == "baseline":
            base_fmin = m.f_min
            improvement = None
        else:
            improvement = m.f_min - base_fmin
        results.append(CaseResult(mode, m, improvement))
        series[mode] = ts
    return results, series


def scale_gains(dc: DataCenterParams, k_dc: float) -> DataCenterParams:
    """Split an aggregate gain between server and UPS at the configured ratio."""
    total = dc.k_srv + dc.k_ups
    share = dc.k_srv / total if total > 0 else 0.4
    return replace(dc, k_srv=k_dc * share, k_ups=k_dc * (1.0 - share))


def _nadir_task(args: tuple[Scenario, str]) -> float:
    sc, scope = args
    return run_case(sc, scope)[1].f_min


def sweep(
    scenario: Scenario,
    k_dc_values: Sequence[float],
    h_values: Sequence[float],
    workers: int = 1,
) -> list[SweepCell]:
    """Nadir improvement of coordinated over baseline on a (H, K_dc) grid.

    Cells are returned H-major in the order given, independent of ``workers``.
    """
    if not k_dc_values or not h_values:
        raise ConfigError("sweep: k_dc_values and h_values must be non-empty")
    tasks: list[Scenario] = []
    for h in h_values:
        g = replace(scenario.grid, inertia_h=float(h))
        tasks.append(replace(scenario, grid=g).with_mode("baseline"))
        for k in k_dc_values:
            dc = replace(scale_gains(scenario.dc, float(k)), mode="coordinated")
            tasks.append(replace(scenario, grid=g, dc=dc))
    jobs = [(t, "total") for t in tasks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            f_mins = list(pool.map(_nadir_task, jobs))
    else:
        f_mins = [_nadir_task(j) for j in jobs]

    cells = []
    stride = len(k_dc_values) + 1
    for i, h in enumerate(h_values):
        base = f_mins[i * stride]
        for j, k in enumerate(k_dc_values):
            cells.append(SweepCell(float(k), float(h), f_mins[i * stride + 1 + j] - base))
    return cells
