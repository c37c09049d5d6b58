"""Nadir improvement over a grid of aggregate droop gain and inertia.

Prints the grid as a table (rows: H, columns: K_dc) plus marginal gains,
and optionally writes the sweep CSV.
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from dcffr import io as dio
from dcffr.scenario import Scenario, sweep


@dataclass
class SweepConfig:
    k_dc_values: list[float] = field(default_factory=lambda: [10.0, 15.0, 20.0, 25.0, 30.0])
    h_values: list[float] = field(default_factory=lambda: [2.0, 3.0, 4.0, 5.0])
    workers: int = 1
    out: Path | None = None


def main(cfg: SweepConfig) -> np.ndarray:
    t0 = time.perf_counter()
    cells = sweep(Scenario(), cfg.k_dc_values, cfg.h_values, cfg.workers)
    elapsed = time.perf_counter() - t0
    grid = np.array([c.nadir_improvement for c in cells]).reshape(len(cfg.h_values), -1)

    print("nadir improvement, mHz")
    print("H \\ K_dc " + "".join(f"{k:>9g}" for k in cfg.k_dc_values))
    for h, row in zip(cfg.h_values, grid):
        print(f"{h:<9g}" + "".join(f"{1e3 * v:>9.3f}" for v in row))
    print("marginal gain per step in K_dc, mHz")
    for h, row in zip(cfg.h_values, np.diff(grid, axis=1)):
        print(f"{h:<9g}" + " " * 9 + "".join(f"{1e3 * v:>9.3f}" for v in row))
    print(f"{len(cells)} cells in {elapsed:.1f} s")

    if cfg.out is not None:
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        dio.write_sweep(cells, cfg.out)
        print(f"wrote {cfg.out}")
    return grid


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k-dc", type=float, nargs="+", default=SweepConfig().k_dc_values)
    ap.add_argument("--h", type=float, nargs="+", default=SweepConfig().h_values)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path)
    a = ap.parse_args()
    main(SweepConfig(a.k_dc, a.h, a.workers, a.out))
