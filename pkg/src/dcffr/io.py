"""Deterministic CSV and JSON writers."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from dcffr.scenario import COLUMNS, CaseResult, SweepCell, TimeSeries

TIMESERIES_HEADER = ("t", "delta_f_hz", "p_gov_mw", "p_srv_mw", "p_ups_mw", "p_cool_mw", "p_dc_mw", "soc")
SWEEP_HEADER = ("k_dc_mw_per_hz", "h_s", "nadir_improvement_hz")

METRIC_DEFINITIONS = {
    "f_min_hz": "f0 + min(delta_f) over t >= disturbance start",
    "nadir_improvement_hz": "f_min_hz of this case minus f_min_hz of the baseline case",
    "t_rec_s": "first sample at or after the nadir from which |delta_f| <= 0.02 Hz holds "
    "for the rest of the run, minus the disturbance start; null if never recovered",
    "e_ffr_mwh": "trapezoidal integral from the disturbance start of |p_ups| plus deferred "
    "server power max(0, p_srv0 - p_srv), in MWh (UPS term only when e_ffr_scope = ups)",
    "avg_ups_mw": "mean of p_ups over samples with p_ups > 0; 0 if none",
    "delta_sla_pct": "100 * integral of max(0, p_srv0 - p_srv) dt / (p_srv0 * duration): "
    "deferred server energy as a share of nominal server energy over the whole run",
}

PathLike = Union[str, Path]


def format_number(x: float) -> str:
    s = f"{x:.9f}"
    if s == "-0.000000000":
        return "0.000000000"
    return s


def _write_text(dest: PathLike, text: str) -> Path:
    path = Path(dest)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def timeseries_csv(ts: TimeSeries) -> str:
    lines = [",".join(TIMESERIES_HEADER)]
    cols = ts.columns()
    for row in zip(*(c.tolist() for c in cols)):
        lines.append(",".join(map(format_number, row)))
    return "\n".join(lines) + "\n"


def write_timeseries(ts: TimeSeries, dest: PathLike) -> Path:
    return _write_text(dest, timeseries_csv(ts))


def read_timeseries(src: PathLike) -> TimeSeries:
    path = Path(src)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != TIMESERIES_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return TimeSeries(*(data[:, i].copy() for i in range(len(COLUMNS))))


def _case_entry(result: CaseResult) -> dict:
    m = result.metrics
    entry = {"mode": result.mode, "f_min_hz": m.f_min}
    if result.nadir_improvement is not None:
        entry["nadir_improvement_hz"] = result.nadir_improvement
    entry["t_nadir_s"] = m.t_nadir
    entry["t_rec_s"] = m.t_rec
    entry["e_ffr_mwh"] = m.e_ffr
    entry["avg_ups_mw"] = m.avg_ups_power
    entry["delta_sla_pct"] = m.delta_sla
    return entry


def metrics_document(results: Sequence[CaseResult], provenance: dict) -> dict:
    if not results:
        raise ValueError("at least one metrics row is required")
    return {
        "cases": [_case_entry(r) for r in results],
        "definitions": dict(METRIC_DEFINITIONS),
        "provenance": provenance,
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_metrics(results: Sequence[CaseResult], provenance: dict, dest: PathLike) -> Path:
    return _write_text(dest, dumps(metrics_document(results, provenance)))


def sweep_csv(cells: Sequence[SweepCell]) -> str:
    lines = [",".join(SWEEP_HEADER)]
    for c in cells:
        lines.append(",".join(map(format_number, (c.k_dc, c.h, c.nadir_improvement))))
    return "\n".join(lines) + "\n"


def write_sweep(cells: Sequence[SweepCell], dest: PathLike) -> Path:
    return _write_text(dest, sweep_csv(cells))


def json_float(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None
