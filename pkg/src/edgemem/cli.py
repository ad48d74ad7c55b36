"""Command-line entry point.

Subcommands: ``run`` (single realization), ``sweep`` (full grid with resume),
``analyze`` (aggregate tables for plotting), ``validate`` (invariant suite).
Configuration comes from an optional JSON file whose keys are the
ExperimentConfig field names; command-line flags override file values.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 resumption conflict.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from edgemem.ensemble import (
    ConfigError,
    ExperimentConfig,
    ResumptionConflictError,
    _execute_triple,
    analyze,
    merge_results,
    run_sweep,
    run_validation_suite,
)

logger = logging.getLogger(__name__)

_LIST_FIELDS = {"J_list", "delta_list"}
_SKIP_FLAGS = {"thresholds"}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (field names as keys)")
    for f in dataclasses.fields(ExperimentConfig):
        flag = f"--{f.name}"
        if f.name in _SKIP_FLAGS:
            parser.add_argument(flag, default=None,
                                help="JSON object, e.g. "
                                     '\'{"integrity": 0.7, "coherent_info": 1.2}\'')
        elif f.name in _LIST_FIELDS:
            parser.add_argument(flag, default=None,
                                help="comma-separated values, e.g. 0.1,0.05")
        elif f.type in ("bool", bool):
            parser.add_argument(flag, default=None, action="store_const",
                                const=True)
        else:
            parser.add_argument(flag, default=None)


def _coerce(name: str, raw: str):
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    ftype = fields[name].type
    if name in _LIST_FIELDS:
        return [float(x) for x in str(raw).split(",") if x != ""]
    if name == "thresholds":
        return json.loads(raw)
    if ftype in ("int", int):
        return int(raw)
    if ftype in ("float", float):
        return float(raw)
    if ftype in ("bool", bool):
        return bool(raw)
    return raw


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        data.update(ExperimentConfig.from_file(args.config).to_dict())
    for f in dataclasses.fields(ExperimentConfig):
        raw = getattr(args, f.name, None)
        if raw is not None:
            data[f.name] = raw if not isinstance(raw, str) else _coerce(f.name, raw)
    return ExperimentConfig.from_dict(data)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "parts").mkdir(exist_ok=True)
    key, status, detail = _execute_triple(
        config, float(args.J), float(args.delta), int(args.realization_index),
        out_dir)
    merge_results(config, out_dir)
    print(f"{status} {key}" + (f": {detail}" if detail else ""))
    return 0 if status == "ok" else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    summary = run_sweep(config)
    print(json.dumps(summary, indent=1))
    return 0 if summary["n_failed"] == 0 else 1


def _cmd_analyze(args: argparse.Namespace) -> int:
    tau_grid = ([float(x) for x in args.tau_grid.split(",")]
                if args.tau_grid else None)
    t_grid = ([float(x) for x in args.t_grid.split(",")]
              if args.t_grid else None)
    outputs = analyze(
        args.results_dir,
        quantity=args.quantity,
        tau_grid=tau_grid,
        t_grid=t_grid,
        tau=args.tau,
        trace_J=args.trace_J,
        trace_delta=args.trace_delta,
        trace_samples=args.trace_samples,
        out_dir=args.out_dir,
    )
    print(json.dumps(outputs, indent=1))
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    checks = run_validation_suite(n_sites=args.n_sites)
    failed = 0
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status}  {check.name}: {check.detail}")
        failed += 0 if check.passed else 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgemem",
        description="Edge-qubit memory dynamics of disordered cluster chains")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single disorder realization")
    _add_config_flags(p_run)
    p_run.add_argument("--J", required=True, type=float)
    p_run.add_argument("--delta", required=True, type=float)
    p_run.add_argument("--realization-index", required=True, type=int)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the full (J, delta, index) grid")
    _add_config_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_an = sub.add_parser("analyze", help="aggregate results into plotting tables")
    p_an.add_argument("--results-dir", required=True)
    p_an.add_argument("--quantity", required=True,
                      choices=("I_x", "I_y", "I_z", "coherent_info"))
    p_an.add_argument("--tau", type=float, default=None,
                      help="threshold for the fixed-threshold tables")
    p_an.add_argument("--tau-grid", default=None,
                      help="comma-separated thresholds for recovery_vs_tau")
    p_an.add_argument("--t-grid", default=None,
                      help="comma-separated sample times to keep")
    p_an.add_argument("--trace-J", type=float, default=None)
    p_an.add_argument("--trace-delta", type=float, default=None)
    p_an.add_argument("--trace-samples", type=int, default=None)
    p_an.add_argument("--out-dir", default=None)
    p_an.set_defaults(func=_cmd_analyze)

    p_val = sub.add_parser("validate", help="run the cross-check suite")
    p_val.add_argument("--n-sites", type=int, default=6)
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResumptionConflictError as exc:
        print(f"resumption conflict: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
