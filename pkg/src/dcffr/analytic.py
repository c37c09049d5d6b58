"""Closed-form small-signal response of the swing equation with lagged droop relief.

In per-unit frequency x = Δf/f0 the loop is::

    X(s) / P(s) = (1 + tau s) / (2 h tau s^2 + (2 h + d tau) s + (d + k_dc))

Everything here is a pure function of a ``ClosedLoopModel``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from dcffr.datacenter import DataCenterParams
from dcffr.errors import ConfigError, UnboundedResponseError
from dcffr.grid import GridParams, mw_per_hz_to_pu

_DEGENERATE = 1e-12
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ClosedLoopModel:
    h: float
    d: float
    k_dc: float
    tau: float
    f0: float = 60.0

    def __post_init__(self):
        if not (self.h > 0 and self.d >= 0 and self.k_dc >= 0 and self.tau >= 0 and self.f0 > 0):
            raise ConfigError(f"invalid closed-loop parameters: {self}")

    @classmethod
    def from_params(cls, grid: GridParams, dc: DataCenterParams) -> "ClosedLoopModel":
        """Linearization of a configured grid + data center (governor excluded)."""
        return cls(
            h=grid.inertia_h,
            d=grid.damping_d,
            k_dc=mw_per_hz_to_pu(dc.k_dc, grid.s_sys, grid.f0),
            tau=dc.tau_dc,
            f0=grid.f0,
        )

    @property
    def denominator(self) -> tuple[float, float, float]:
        return (
            2.0 * self.h * self.tau,
            2.0 * self.h + self.d * self.tau,
            self.d + self.k_dc,
        )


def poles(model: ClosedLoopModel) -> tuple[complex, Optional[complex]]:
    """Closed-loop poles; the second is None when tau == 0 (first-order loop)."""
    a, b, c = model.denominator
    if model.tau == 0:
        return complex(-c / b), None
    disc = b * b - 4.0 * a * c
    root = cmath.sqrt(disc)
    # stable form avoids cancellation in the small root
    q = -0.5 * (b + root)
    p1 = q / a
    p2 = c / q if q != 0 else complex(-b / (2.0 * a))
    return p1, p2


def _is_repeated(model: ClosedLoopModel) -> bool:
    a, b, c = model.denominator
    return abs(b * b - 4.0 * a * c) <= _DEGENERATE * b * b


def step_response_pu(model: ClosedLoopModel, dp: float, t):
    """Per-unit frequency response to a per-unit power step ``dp`` at t = 0."""
    t = np.asarray(t, dtype=float)
    a, b, c = model.denominator
    if model.tau == 0:
        if c == 0:
            return dp * t / b
        return dp / c * (1.0 - np.exp(-c / b * t))
    if c == 0:
        raise UnboundedResponseError("d + k_dc == 0: step response grows without bound")
    tau = model.tau
    if _is_repeated(model):
        p = -b / (2.0 * a)
        e = np.exp(p * t)
        return dp / a * (1.0 / p**2 - e / p**2 + (1.0 + tau * p) / p * t * e)
    p1, p2 = poles(model)
    r1 = (1.0 + tau * p1) / (p1 * (p1 - p2))
    r2 = (1.0 + tau * p2) / (p2 * (p2 - p1))
    x = 1.0 / (p1 * p2) + r1 * np.exp(p1 * t) + r2 * np.exp(p2 * t)
    return dp / a * np.real(x)


def step_response(model: ClosedLoopModel, dp: float, t):
    """Frequency deviation in Hz at time(s) ``t`` after a step of ``dp`` per-unit."""
    return model.f0 * step_response_pu(model, dp, t)


def steady_state_deviation(model: ClosedLoopModel, dp: float) -> float:
    c = model.d + model.k_dc
    if c == 0:
        raise UnboundedResponseError("d + k_dc == 0: no finite steady state")
    return model.f0 * dp / c


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    return 0.5 * (lo + hi)


def analytic_nadir(model: ClosedLoopModel, dp: float) -> tuple[float, float]:
    """(time, Δf in Hz) of the deepest point of the step response.

    Returns ``(inf, steady_state)`` when the response approaches its final
    value without overshoot.
    """
    if dp == 0:
        return 0.0, 0.0
    ss = steady_state_deviation(model, dp)
    p1, p2 = poles(model)
    slowest = min(abs(p.real) for p in (p1, p2) if p is not None)
    dt = min(model.tau / 10.0, model.h / 100.0) if model.tau > 0 else model.h / 100.0
    horizon = 40.0 / slowest
    dt = max(dt, horizon / 2e5)
    n = int(math.ceil(horizon / dt)) + 1
    # sign-normalize so the search is always for a minimum
    sign = 1.0 if dp < 0 else -1.0
    ts = np.arange(n) * dt
    vals = sign * step_response(model, dp, ts)
    i = int(np.argmin(vals))
    if vals[i] >= sign * ss - 1e-12 * abs(ss) or i == n - 1:
        return math.inf, ss
    lo, hi = float(ts[max(i - 1, 0)]), float(ts[min(i + 1, n - 1)])
    t_star = _golden_min(lambda t: sign * float(step_response(model, dp, t)), lo, hi, 1e-9)
    return float(t_star), float(step_response(model, dp, t_star))
