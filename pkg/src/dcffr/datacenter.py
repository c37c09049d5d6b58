"""Frequency-responsive data center: deadband droop, actuation lag, UPS storage.

Sign conventions (MW):
    p_ups > 0 discharging into the facility, p_ups < 0 charging.
    Under-frequency reduces server load and discharges the UPS, so the
    facility draws less from the grid and the relief term is positive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from dcffr.errors import ConfigError

MODES = ("baseline", "ups_only", "coordinated")
SOC_CONVENTIONS = ("paper", "conventional")
SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class DataCenterParams:
    p_dc0: float = 20.0
    pue: float = 1.2
    k_srv: float = 10.0
    k_ups: float = 15.0
    tau_dc: float = 0.1
    tau_srv: Optional[float] = None
    e_cap: float = 5.0
    soc_min: float = 0.2
    soc_max: float = 0.8
    soc_init: float = 0.8
    eta_dis: float = 0.95
    eta_ch: float = 0.9
    p_ups_max: float = 10.0
    p_recharge: float = 2.0
    deadband: float = 0.03
    mode: str = "coordinated"
    soc_convention: str = "paper"
    limits_enabled: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"scenario.mode: {self.mode!r} not in {MODES}")
        if self.soc_convention not in SOC_CONVENTIONS:
            raise ConfigError(
                f"datacenter.soc_convention: {self.soc_convention!r} not in {SOC_CONVENTIONS}"
            )
        nonneg = ("k_srv", "k_ups", "tau_dc", "e_cap", "p_ups_max", "p_recharge", "deadband")
        for name in nonneg:
            value = getattr(self, name)
            if not (value >= 0):
                raise ConfigError(f"datacenter.{name}: must be >= 0, got {value!r}")
        if self.tau_srv is not None and not self.tau_srv >= 0:
            raise ConfigError(f"datacenter.tau_srv: must be >= 0, got {self.tau_srv!r}")
        if not self.p_dc0 > 0:
            raise ConfigError(f"datacenter.p_dc0: must be > 0, got {self.p_dc0!r}")
        if not self.pue >= 1:
            raise ConfigError(f"datacenter.pue: must be >= 1, got {self.pue!r}")
        if not (0 < self.eta_dis <= 1 and 0 < self.eta_ch <= 1):
            raise ConfigError("datacenter.eta_dis/eta_ch: efficiencies must lie in (0, 1]")
        if not (0 <= self.soc_min < self.soc_max <= 1):
            raise ConfigError(
                f"datacenter.soc_min/soc_max: need 0 <= soc_min < soc_max <= 1, "
                f"got soc_min={self.soc_min!r}, soc_max={self.soc_max!r}"
            )
        if not (self.soc_min <= self.soc_init <= self.soc_max):
            raise ConfigError(
                f"datacenter.soc_init: {self.soc_init!r} outside [soc_min, soc_max]"
            )

    @property
    def p_srv0(self) -> float:
        return self.p_dc0 / self.pue

    @property
    def p_cool0(self) -> float:
        return self.p_dc0 - self.p_srv0

    @property
    def k_dc(self) -> float:
        """Aggregate droop gain active in the configured mode, MW/Hz."""
        if self.mode == "baseline":
            return 0.0
        if self.mode == "ups_only":
            return self.k_ups
        return self.k_srv + self.k_ups

    @property
    def tau_server(self) -> float:
        return self.tau_dc if self.tau_srv is None else self.tau_srv


@dataclass(frozen=True, slots=True)
class DataCenterState:
    p_srv: float
    p_ups: float
    soc: float
    p_srv_cmd: float
    p_ups_cmd: float


def initial_state(params: DataCenterParams) -> DataCenterState:
    return DataCenterState(
        p_srv=params.p_srv0,
        p_ups=0.0,
        soc=params.soc_init,
        p_srv_cmd=params.p_srv0,
        p_ups_cmd=0.0,
    )


def droop_command(delta_f: float, params: DataCenterParams) -> tuple[float, float]:
    """Return (server reduction MW, UPS power MW) for a frequency deviation.

    Outside the deadband the gains act on the full deviation. Over-frequency
    never raises server load above nominal; only the UPS absorbs.
    """
    if params.mode == "baseline" or abs(delta_f) <= params.deadband:
        return 0.0, 0.0
    if delta_f < 0:
        srv = params.k_srv * -delta_f if params.mode == "coordinated" else 0.0
        return srv, params.k_ups * -delta_f
    return 0.0, -params.k_ups * delta_f


def _energy_rate_factor(params: DataCenterParams) -> tuple[float, float]:
    # (stored-energy loss per MW discharged, stored-energy gain per MW charged)
    if params.soc_convention == "paper":
        return params.eta_dis, 1.0 / params.eta_ch
    return 1.0 / params.eta_dis, params.eta_ch


def recharge_controller(
    delta_f: float,
    state: DataCenterState,
    params: DataCenterParams,
    dt: Optional[float] = None,
) -> float:
    """Charge command (MW, <= 0) restoring SOC to ``soc_init`` after an event.

    Only active inside the deadband; droop takes precedence outside it. With
    ``dt`` given, the command is limited so one step cannot overshoot soc_init.
    """
    if params.mode == "baseline" or abs(delta_f) > params.deadband:
        return 0.0
    if state.soc >= params.soc_init:
        return 0.0
    p = params.p_recharge
    if dt is not None and dt > 0:
        _, gain = _energy_rate_factor(params)
        headroom_mwh = (params.soc_init - state.soc) * params.e_cap
        p = min(p, headroom_mwh * SECONDS_PER_HOUR / (gain * dt))
    return -p


def gate_ups_command(p_ups_cmd: float, soc: float, params: DataCenterParams) -> float:
    """Zero the UPS command in the direction forbidden at an SOC bound."""
    if soc <= params.soc_min and p_ups_cmd > 0:
        return 0.0
    if soc >= params.soc_max and p_ups_cmd < 0:
        return 0.0
    return p_ups_cmd


def clamp_outputs(p_srv: float, p_ups: float, params: DataCenterParams) -> tuple[float, float]:
    if not params.limits_enabled:
        return p_srv, p_ups
    p_srv = min(max(p_srv, 0.0), params.p_srv0)
    p_ups = min(max(p_ups, -params.p_ups_max), params.p_ups_max)
    return p_srv, p_ups


def commands(
    delta_f: float,
    state: DataCenterState,
    params: DataCenterParams,
    dt: Optional[float] = None,
) -> tuple[float, float]:
    """Clamped (server power, UPS power) setpoints fed to the actuation lag."""
    srv_red, ups = droop_command(delta_f, params)
    if ups == 0.0:
        ups = recharge_controller(delta_f, state, params, dt)
    ups = gate_ups_command(ups, state.soc, params)
    return clamp_outputs(params.p_srv0 - srv_red, ups, params)


def _relax(x: float, target: float, tau: float, dt: float) -> float:
    if tau == 0:
        return target
    return target + (x - target) * math.exp(-dt / tau)


def lag_update(
    state: DataCenterState,
    cmds: tuple[float, float],
    params: DataCenterParams,
    dt: float,
) -> tuple[float, float]:
    """Exact first-order relaxation of (p_srv, p_ups) toward held commands.

    Outputs are clamped and the clamped values become the new internal state,
    so nothing accumulates while saturated.
    """
    srv_cmd, ups_cmd = cmds
    p_srv = _relax(state.p_srv, srv_cmd, params.tau_server, dt)
    p_ups = _relax(state.p_ups, ups_cmd, params.tau_dc, dt)
    return clamp_outputs(p_srv, p_ups, params)


def stored_energy_rate(p_ups: float, params: DataCenterParams) -> float:
    """dE/dt in MW for a UPS power (positive = discharge)."""
    loss, gain = _energy_rate_factor(params)
    if p_ups >= 0:
        return -loss * p_ups
    return -gain * p_ups


def soc_update(
    state: DataCenterState, params: DataCenterParams, dt: float
) -> tuple[float, float]:
    """Advance SOC over ``dt`` with ``state.p_ups`` held; returns (soc, p_ups).

    A step that would cross a bound has its UPS power curtailed so the SOC
    lands exactly on the bound.
    """
    p_ups = state.p_ups
    if params.e_cap == 0:
        return state.soc, 0.0
    loss, gain = _energy_rate_factor(params)
    hours = dt / SECONDS_PER_HOUR
    soc = state.soc + stored_energy_rate(p_ups, params) * hours / params.e_cap
    if p_ups > 0 and soc <= params.soc_min:
        available = max(state.soc - params.soc_min, 0.0) * params.e_cap
        return params.soc_min, available / (loss * hours)
    if p_ups < 0 and soc >= params.soc_max:
        room = max(params.soc_max - state.soc, 0.0) * params.e_cap
        return params.soc_max, -room / (gain * hours)
    return soc, p_ups


def net_power(state: DataCenterState, params: DataCenterParams) -> float:
    """Total grid draw of the facility, MW."""
    return state.p_srv + params.p_cool0 - state.p_ups


def pue(p_srv: float, p_cool: float) -> float:
    if not p_srv > 0:
        raise ValueError(f"PUE undefined for non-positive server power {p_srv!r}")
    return (p_srv + p_cool) / p_srv


def grid_relief(state: DataCenterState, params: DataCenterParams, s_sys: float) -> float:
    """Reduction in grid draw below nominal, per-unit on ``s_sys``."""
    return (params.p_dc0 - net_power(state, params)) / s_sys


def advance(
    state: DataCenterState, delta_f: float, params: DataCenterParams, dt: float
) -> DataCenterState:
    """One sampled controller step: commands, lag, SOC with curtailment."""
    cmds = commands(delta_f, state, params, dt)
    p_srv, p_ups = lag_update(state, cmds, params, dt)
    p_ups = gate_ups_command(p_ups, state.soc, params)
    soc, p_ups = soc_update(replace(state, p_ups=p_ups), params, dt)
    return DataCenterState(p_srv, p_ups, soc, cmds[0], cmds[1])
