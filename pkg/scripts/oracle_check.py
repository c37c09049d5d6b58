"""Compare the simulator in its linear configuration against the closed-form response."""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, replace

import numpy as np

from dcffr import analytic
from dcffr.datacenter import DataCenterParams
from dcffr.grid import Disturbance, GridParams
from dcffr.scenario import Scenario, run


@dataclass
class OracleConfig:
    dts: tuple[float, ...] = (0.02, 0.01, 0.005, 0.001)
    duration: float = 60.0
    magnitude_mw: float = 200.0


def linear_scenario(dt: float, coupling: str, cfg: OracleConfig) -> Scenario:
    grid = replace(GridParams(), governor_enabled=False, agc_gain=0.0)
    dc = replace(DataCenterParams(), deadband=0.0, limits_enabled=False, e_cap=1e6, soc_init=0.5)
    return Scenario(Disturbance("generation_trip", cfg.magnitude_mw, 0.0), grid, dc, cfg.duration, dt, coupling)


def main(cfg: OracleConfig) -> None:
    print(f"{'coupling':<12}{'dt s':>8}{'max err Hz':>14}{'runtime s':>11}")
    for coupling in ("continuous", "sampled"):
        for dt in cfg.dts:
            sc = linear_scenario(dt, coupling, cfg)
            t0 = time.perf_counter()
            ts = run(sc)
            elapsed = time.perf_counter() - t0
            model = analytic.ClosedLoopModel.from_params(sc.grid, sc.dc)
            ref = analytic.step_response(model, -cfg.magnitude_mw / sc.grid.s_sys, ts.t)
            print(f"{coupling:<12}{dt:>8g}{np.max(np.abs(ts.delta_f - ref)):>14.3e}{elapsed:>11.2f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--duration", type=float, default=60.0)
    ap.add_argument("--magnitude", type=float, default=200.0)
    a = ap.parse_args()
    main(OracleConfig(duration=a.duration, magnitude_mw=a.magnitude))
