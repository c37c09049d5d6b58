"""JSON configuration: defaults, validation, overrides and provenance."""
from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Optional, Union

from dcffr.datacenter import DataCenterParams
from dcffr.errors import ConfigError
from dcffr.grid import Disturbance, GridParams, mw_per_hz_to_pu
from dcffr.scenario import Scenario

SECTIONS = ("grid", "datacenter", "scenario", "sweep", "output")
E_FFR_SCOPES = ("total", "ups")

# Defaults with a published value; everything else is a modelling choice.
TABULATED_DEFAULTS = frozenset(
    {
        "grid.f0", "grid.s_sys", "grid.inertia_h", "grid.damping_d", "grid.governor_droop_r",
        "datacenter.p_dc0", "datacenter.pue", "datacenter.k_srv", "datacenter.k_ups",
        "datacenter.tau_dc", "datacenter.e_cap", "datacenter.soc_min", "datacenter.soc_max",
        "datacenter.eta_dis", "datacenter.eta_ch", "datacenter.deadband",
        "scenario.disturbance.kind", "scenario.disturbance.magnitude",
        "scenario.disturbance.t_start", "scenario.mode", "scenario.duration", "scenario.dt",
        "sweep.k_dc_values", "sweep.h_values",
    }
)


@dataclass(frozen=True)
class SweepSettings:
    k_dc_values: tuple = (10.0, 15.0, 20.0, 25.0, 30.0)
    h_values: tuple = (2.0, 3.0, 4.0, 5.0)
    workers: int = 1

    def __post_init__(self):
        for name in ("k_dc_values", "h_values"):
            values = getattr(self, name)
            if not values:
                raise ConfigError(f"sweep.{name}: must be a non-empty list")
            if any(v < 0 for v in values):
                raise ConfigError(f"sweep.{name}: values must be >= 0")
        if any(h <= 0 for h in self.h_values):
            raise ConfigError("sweep.h_values: inertia must be > 0")
        if self.workers < 1:
            raise ConfigError(f"sweep.workers: must be >= 1, got {self.workers!r}")


@dataclass(frozen=True)
class OutputSettings:
    e_ffr_scope: str = "total"

    def __post_init__(self):
        if self.e_ffr_scope not in E_FFR_SCOPES:
            raise ConfigError(f"output.e_ffr_scope: {self.e_ffr_scope!r} not in {E_FFR_SCOPES}")


@dataclass(frozen=True)
class ResolvedConfig:
    scenario: Scenario
    sweep: SweepSettings
    output: OutputSettings
    provenance: dict = field(compare=False)


def _grid_keys() -> list[str]:
    return [f.name for f in fields(GridParams)]


def _dc_keys() -> list[str]:
    return [f.name for f in fields(DataCenterParams) if f.name != "mode"]


def _type_of(default: Any, path: str):
    if isinstance(default, bool):
        return bool
    if isinstance(default, (int, float)):
        return float
    if isinstance(default, str):
        return str
    raise AssertionError(path)


def _coerce(value: Any, kind, path: str, optional: bool = False):
    if value is None and optional:
        return None
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    raise AssertionError(kind)


def _check_keys(section: dict, allowed: Iterable[str], prefix: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{prefix}: expected an object")
    allowed = set(allowed)
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {prefix}.{key}")


def _number_list(value: Any, path: str) -> tuple:
    if not isinstance(value, list):
        raise ConfigError(f"{path}: expected a list of numbers")
    return tuple(_coerce(v, float, f"{path}[{i}]") for i, v in enumerate(value))


def apply_overrides(doc: dict, overrides: Iterable[str]) -> dict:
    """Apply ``section.key=value`` strings; values are parsed as JSON when possible."""
    doc = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected KEY=VALUE")
        path, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        parts = path.strip().split(".")
        node = doc
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {path!r}: {part} is not a section")
        node[parts[-1]] = value
    return doc


def config_from_dict(doc: dict) -> ResolvedConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    _check_keys(doc, SECTIONS, "<root>")
    sources: dict[str, str] = {}
    conversions: list[str] = []

    def resolve(section: dict, key: str, default: Any, prefix: str, kind=None, optional=False):
        path = f"{prefix}.{key}"
        if key in section:
            sources[path] = "user"
            return _coerce(section[key], kind or _type_of(default, path), path, optional)
        sources[path] = "paper-default" if path in TABULATED_DEFAULTS else "model-default"
        return default

    # grid
    g_doc = doc.get("grid", {})
    _check_keys(g_doc, _grid_keys() + ["damping_d_pu_per_hz"], "grid")
    g_def = GridParams()
    g_kwargs = {k: resolve(g_doc, k, getattr(g_def, k), "grid") for k in _grid_keys()}
    if "damping_d_pu_per_hz" in g_doc:
        if "damping_d" in g_doc:
            raise ConfigError("grid.damping_d and grid.damping_d_pu_per_hz are mutually exclusive")
        per_hz = _coerce(g_doc["damping_d_pu_per_hz"], float, "grid.damping_d_pu_per_hz")
        g_kwargs["damping_d"] = per_hz * g_kwargs["f0"]
        sources["grid.damping_d"] = "user"
        conversions.append(
            f"grid.damping_d = damping_d_pu_per_hz * f0 = {per_hz!r} * {g_kwargs['f0']!r}"
        )
    grid = GridParams(**g_kwargs)

    # datacenter
    d_doc = doc.get("datacenter", {})
    _check_keys(d_doc, _dc_keys(), "datacenter")
    d_def = DataCenterParams()
    d_kwargs = {}
    for k in _dc_keys():
        if k == "tau_srv":
            d_kwargs[k] = resolve(d_doc, k, None, "datacenter", kind=float, optional=True)
        else:
            d_kwargs[k] = resolve(d_doc, k, getattr(d_def, k), "datacenter")

    # scenario
    s_doc = doc.get("scenario", {})
    _check_keys(s_doc, ("disturbance", "mode", "duration", "dt", "coupling"), "scenario")
    dist_doc = s_doc.get("disturbance", {})
    _check_keys(dist_doc, ("kind", "magnitude", "t_start"), "scenario.disturbance")
    dist_def = Disturbance()
    disturbance = Disturbance(
        **{
            k: resolve(dist_doc, k, getattr(dist_def, k), "scenario.disturbance")
            for k in ("kind", "magnitude", "t_start")
        }
    )
    s_def = Scenario()
    mode = resolve(s_doc, "mode", d_def.mode, "scenario")
    dc = DataCenterParams(mode=mode, **d_kwargs)
    scenario = Scenario(
        disturbance=disturbance,
        grid=grid,
        dc=dc,
        duration=resolve(s_doc, "duration", s_def.duration, "scenario"),
        dt=resolve(s_doc, "dt", s_def.dt, "scenario"),
        coupling=resolve(s_doc, "coupling", s_def.coupling, "scenario"),
    )

    # sweep
    w_doc = doc.get("sweep", {})
    _check_keys(w_doc, ("k_dc_values", "h_values", "workers"), "sweep")
    w_def = SweepSettings()
    sweep_kwargs = {}
    for k in ("k_dc_values", "h_values"):
        path = f"sweep.{k}"
        if k in w_doc:
            sweep_kwargs[k] = _number_list(w_doc[k], path)
            sources[path] = "user"
        else:
            sweep_kwargs[k] = getattr(w_def, k)
            sources[path] = "paper-default"
    workers = resolve(w_doc, "workers", w_def.workers, "sweep", kind=float)
    if workers != int(workers):
        raise ConfigError(f"sweep.workers: expected an integer, got {workers!r}")
    sweep = SweepSettings(workers=int(workers), **sweep_kwargs)

    # output
    o_doc = doc.get("output", {})
    _check_keys(o_doc, ("e_ffr_scope",), "output")
    output = OutputSettings(
        e_ffr_scope=resolve(o_doc, "e_ffr_scope", OutputSettings().e_ffr_scope, "output")
    )

    provenance = build_provenance(scenario, sweep, output, sources, conversions)
    return ResolvedConfig(scenario, sweep, output, provenance)


def resolved_document(scenario: Scenario, sweep: SweepSettings, output: OutputSettings) -> dict:
    """Config-shaped dict of fully resolved values; loads back to the same parameters."""
    dc = asdict(scenario.dc)
    dc.pop("mode")
    return {
        "grid": asdict(scenario.grid),
        "datacenter": dc,
        "scenario": {
            "disturbance": asdict(scenario.disturbance),
            "mode": scenario.mode,
            "duration": scenario.duration,
            "dt": scenario.dt,
            "coupling": scenario.coupling,
        },
        "sweep": {
            "k_dc_values": list(sweep.k_dc_values),
            "h_values": list(sweep.h_values),
            "workers": sweep.workers,
        },
        "output": {"e_ffr_scope": output.e_ffr_scope},
    }


def build_provenance(
    scenario: Scenario,
    sweep: SweepSettings,
    output: OutputSettings,
    sources: dict[str, str],
    conversions: Optional[list[str]] = None,
) -> dict:
    g, dc = scenario.grid, scenario.dc
    k_total = dc.k_srv + dc.k_ups
    return {
        "config": resolved_document(scenario, sweep, output),
        "sources": dict(sorted(sources.items())),
        "derived": {
            "p_srv0_mw": dc.p_srv0,
            "p_cool0_mw": dc.p_cool0,
            "k_dc_mw_per_hz": k_total,
            "k_dc_pu": mw_per_hz_to_pu(k_total, g.s_sys, g.f0),
            "k_srv_pu": mw_per_hz_to_pu(dc.k_srv, g.s_sys, g.f0),
            "k_ups_pu": mw_per_hz_to_pu(dc.k_ups, g.s_sys, g.f0),
            "per_unit_base_mw": g.s_sys,
            "damping_d_pu": g.damping_d,
        },
        "conversions": list(conversions or []),
    }


def loads_config(text: str, overrides: Iterable[str] = (), origin: str = "<string>") -> ResolvedConfig:
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{origin}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    return config_from_dict(apply_overrides(doc, overrides))


def load_config(
    source: Union[str, Path, None] = None, overrides: Iterable[str] = ()
) -> ResolvedConfig:
    """Load a config file (or all defaults when ``source`` is None)."""
    if source is None:
        return config_from_dict(apply_overrides({}, overrides))
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not valid UTF-8") from None
    return loads_config(text, overrides, origin=str(path))
