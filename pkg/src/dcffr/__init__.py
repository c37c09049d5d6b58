"""Grid frequency dynamics with a frequency-responsive data center."""

from dcffr.analytic import ClosedLoopModel
from dcffr.datacenter import DataCenterParams, DataCenterState
from dcffr.errors import ConfigError, NumericDivergenceError, UnboundedResponseError
from dcffr.grid import Disturbance, GridParams, GridState
from dcffr.scenario import Metrics, Scenario, TimeSeries, compare_cases, compute_metrics, run, sweep

__all__ = [
    "ClosedLoopModel",
    "ConfigError",
    "DataCenterParams",
    "DataCenterState",
    "Disturbance",
    "GridParams",
    "GridState",
    "Metrics",
    "NumericDivergenceError",
    "Scenario",
    "TimeSeries",
    "UnboundedResponseError",
    "compare_cases",
    "compute_metrics",
    "run",
    "sweep",
]
