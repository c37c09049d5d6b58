"""Command-line entry point: run, compare, sweep, analyze.

Exit codes: 0 success, 1 usage error, 2 config validation error,
3 runtime or numeric error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from dcffr import analytic
from dcffr import io as dio
from dcffr.config import ResolvedConfig, load_config
from dcffr.errors import ConfigError, NumericDivergenceError, UnboundedResponseError
from dcffr.grid import disturbance_power
from dcffr.scenario import CaseResult, compare_cases, run_case, sweep

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dcffr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out: bool):
        sp.add_argument("--config", type=Path, help="JSON config file (defaults if omitted)")
        sp.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config value, e.g. grid.inertia_h=4 (repeatable)",
        )
        if out:
            sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")

    common(sub.add_parser("run", help="simulate one scenario; write CSV + JSON"), True)
    common(sub.add_parser("compare", help="baseline / ups_only / coordinated comparison"), True)
    sp = sub.add_parser("sweep", help="K_dc x H nadir-improvement grid")
    common(sp, True)
    sp.add_argument("--workers", type=int, help="parallel worker processes")
    common(sub.add_parser("analyze", help="closed-loop poles, steady state and nadir as JSON"), False)
    return p


def _prepare_out(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)


def cmd_run(cfg: ResolvedConfig, out: Path) -> None:
    ts, m = run_case(cfg.scenario, cfg.output.e_ffr_scope)
    _prepare_out(out)
    dio.write_timeseries(ts, out / "timeseries.csv")
    dio.write_metrics([CaseResult(cfg.scenario.mode, m, None)], cfg.provenance, out / "metrics.json")


def cmd_compare(cfg: ResolvedConfig, out: Path) -> None:
    results, series = compare_cases(cfg.scenario, cfg.output.e_ffr_scope)
    _prepare_out(out)
    for mode, ts in series.items():
        dio.write_timeseries(ts, out / f"timeseries_{mode}.csv")
    dio.write_metrics(results, cfg.provenance, out / "metrics.json")


def cmd_sweep(cfg: ResolvedConfig, out: Path, workers: Optional[int]) -> None:
    s = cfg.sweep
    if workers is not None and workers < 1:
        raise ConfigError(f"--workers: must be >= 1, got {workers}")
    cells = sweep(cfg.scenario, s.k_dc_values, s.h_values, workers or s.workers)
    _prepare_out(out)
    dio.write_sweep(cells, out / "sweep.csv")


def analysis_document(cfg: ResolvedConfig) -> dict:
    sc = cfg.scenario
    model = analytic.ClosedLoopModel.from_params(sc.grid, sc.dc)
    dp = disturbance_power(sc.disturbance, sc.disturbance.t_start, sc.grid.s_sys)
    poles = [p for p in analytic.poles(model) if p is not None]
    t_nadir, f_nadir = analytic.analytic_nadir(model, dp) if dp < 0 else (0.0, 0.0)
    return {
        "model": {
            "h_s": model.h,
            "d_pu": model.d,
            "k_dc_pu": model.k_dc,
            "tau_s": model.tau,
            "f0_hz": model.f0,
        },
        "step_pu": dp,
        "poles": [{"re": p.real, "im": p.imag} for p in poles],
        "steady_state_hz": analytic.steady_state_deviation(model, dp),
        "nadir": {
            "t_after_step_s": dio.json_float(t_nadir),
            "delta_f_hz": f_nadir,
            "monotone": bool(t_nadir == float("inf")),
        },
        "note": "linear model without governor or AGC; deadband and limits ignored",
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "run":
            cmd_run(cfg, args.out)
        elif args.command == "compare":
            cmd_compare(cfg, args.out)
        elif args.command == "sweep":
            cmd_sweep(cfg, args.out, args.workers)
        else:
            print(dio.dumps(analysis_document(cfg)), end="")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericDivergenceError, UnboundedResponseError, OSError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
