"""Aggregated single-bus frequency dynamics.

Swing equation in per-unit power on the generation base ``s_sys``, with
frequency deviation carried in Hz::

    dΔf/dt = f0 / (2 H) * (ΔP_dist + p_gov + p_agc + ΔP_dc - D * Δf / f0)

The governor is a first-order lag toward ``-(Δf/f0)/R`` clamped to
``±governor_limit``; AGC is a pure integrator of ``-Δf/f0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from dcffr.errors import ConfigError, NumericDivergenceError

DISTURBANCE_KINDS = ("generation_trip", "load_step", "none")


@dataclass(frozen=True)
class GridParams:
    f0: float = 60.0
    s_sys: float = 6100.0
    inertia_h: float = 2.0
    damping_d: float = 0.8
    governor_droop_r: float = 0.05
    governor_tc: float = 3.0
    governor_enabled: bool = True
    agc_gain: float = 4.0
    governor_limit: float = 0.1

    def __post_init__(self):
        checks = {
            "f0": self.f0 > 0,
            "s_sys": self.s_sys > 0,
            "inertia_h": self.inertia_h > 0,
            "damping_d": self.damping_d >= 0,
            "governor_droop_r": self.governor_droop_r > 0,
            "governor_tc": self.governor_tc > 0,
            "agc_gain": self.agc_gain >= 0,
            "governor_limit": self.governor_limit >= 0,
        }
        for name, ok in checks.items():
            value = getattr(self, name)
            if not ok or not math.isfinite(value):
                raise ConfigError(f"grid.{name}: invalid value {value!r}")


@dataclass(frozen=True, slots=True)
class GridState:
    delta_f: float = 0.0
    p_gov: float = 0.0
    agc_integral: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class Disturbance:
    kind: str = "generation_trip"
    magnitude: float = 200.0
    t_start: float = 5.0

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise ConfigError(
                f"scenario.disturbance.kind: {self.kind!r} not in {DISTURBANCE_KINDS}"
            )
        if not (self.magnitude >= 0 and math.isfinite(self.magnitude)):
            raise ConfigError(f"scenario.disturbance.magnitude: must be >= 0, got {self.magnitude!r}")
        if not (self.t_start >= 0 and math.isfinite(self.t_start)):
            raise ConfigError(f"scenario.disturbance.t_start: must be >= 0, got {self.t_start!r}")


def mw_per_hz_to_pu(gain_mw_per_hz: float, s_sys: float, f0: float) -> float:
    """Convert a droop gain in MW/Hz to per-unit power per per-unit frequency."""
    if not s_sys > 0:
        raise ConfigError(f"s_sys must be > 0, got {s_sys!r}")
    if not f0 > 0:
        raise ConfigError(f"f0 must be > 0, got {f0!r}")
    if gain_mw_per_hz < 0:
        raise ConfigError(f"gain must be >= 0, got {gain_mw_per_hz!r}")
    return gain_mw_per_hz * f0 / s_sys


def disturbance_power(d: Disturbance, t: float, s_sys: float = 6100.0) -> float:
    """Per-unit power imbalance injected by ``d`` at time ``t``.

    A generation trip and a load increase both remove net power, so both
    map to a negative step of ``magnitude / s_sys``.
    """
    if d.kind == "none" or t < d.t_start:
        return 0.0
    return -d.magnitude / s_sys


def swing_rhs(delta_f: float, net_imbalance: float, params: GridParams) -> float:
    """Rate of change of frequency deviation, Hz/s."""
    return params.f0 / (2.0 * params.inertia_h) * (
        net_imbalance - params.damping_d * delta_f / params.f0
    )


def governor_target(delta_f: float, params: GridParams) -> float:
    if not params.governor_enabled:
        return 0.0
    target = -delta_f / params.f0 / params.governor_droop_r
    lim = params.governor_limit
    return min(max(target, -lim), lim)


def governor_update(state: GridState, params: GridParams, dt: float) -> float:
    """Exact lag update of governor output with Δf held over ``dt``."""
    if not params.governor_enabled:
        return 0.0
    target = governor_target(state.delta_f, params)
    p = target + (state.p_gov - target) * math.exp(-dt / params.governor_tc)
    lim = params.governor_limit
    return min(max(p, -lim), lim)


def grid_rates(
    delta_f: float, p_gov: float, agc: float, external: float, params: GridParams
) -> tuple[float, float, float]:
    """Time derivatives of (Δf, p_gov, agc_integral).

    ``external`` is the per-unit sum of disturbance and data-center relief.
    """
    d_df = swing_rhs(delta_f, external + p_gov + agc, params)
    if params.governor_enabled:
        d_gov = (governor_target(delta_f, params) - p_gov) / params.governor_tc
    else:
        d_gov = 0.0
    d_agc = -params.agc_gain * delta_f / params.f0
    return d_df, d_gov, d_agc


def check_finite(t: float, **fields: float) -> None:
    for name, value in fields.items():
        if not math.isfinite(value):
            raise NumericDivergenceError(name, value, t)


def step(
    grid: GridState,
    dc_relief: float,
    disturbance: Disturbance,
    params: GridParams,
    dt: float,
) -> GridState:
    """Advance the grid one RK4 step with relief and disturbance held constant.

    The disturbance is sampled at the step midpoint so a step boundary that
    coincides with ``t_start`` is robust to rounding in ``t``.
    """
    if not dt > 0:
        raise ConfigError(f"dt must be > 0, got {dt!r}")
    external = disturbance_power(disturbance, grid.t + 0.5 * dt, params.s_sys) + dc_relief
    f, g, a = grid.delta_f, grid.p_gov, grid.agc_integral
    h2 = 0.5 * dt

    k1 = grid_rates(f, g, a, external, params)
    k2 = grid_rates(f + h2 * k1[0], g + h2 * k1[1], a + h2 * k1[2], external, params)
    k3 = grid_rates(f + h2 * k2[0], g + h2 * k2[1], a + h2 * k2[2], external, params)
    k4 = grid_rates(f + dt * k3[0], g + dt * k3[1], a + dt * k3[2], external, params)

    w = dt / 6.0
    f = f + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    g = g + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    a = a + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    lim = params.governor_limit
    g = min(max(g, -lim), lim)

    t = grid.t + dt
    check_finite(t, delta_f=f, p_gov=g, agc_integral=a)
    return replace(grid, delta_f=f, p_gov=g, agc_integral=a, t=t)
