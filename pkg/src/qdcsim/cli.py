"""Command-line driver: compile circuits and run sweep experiments.

Subcommands:

* ``compile``: lower a circuit for one distribution scheme and print a
  report (JSON by default) with the partition, remote gates, and resource
  counts.
* ``sweep``: simulate a grid of error and input parameters, one CSV row per
  point.
* ``compare``: sweep plus first-order approximation columns and the
  percentage gap between approximate and simulated output error.
* ``input-scan``: sweep over the separable input-state family at a fixed
  hardware profile.

Grids are given as ``--grid key=start:stop:step`` or ``--grid key=a,b,c``;
error keys are f_w, eps_ebit, eps_cnot, r and input keys are alpha2, phi,
gamma, theta.  ``--spec file.json`` loads the same structure from a file.
"""

from __future__ import annotations

import argparse
import json
import sys

from .compiler import CompileError, Scheme, compile_circuit, compile_report, report_to_text
from .engine import EngineError
from .experiments import (
    PROFILES,
    ExperimentError,
    ExperimentSpec,
    compare_csv,
    load_circuit,
    load_spec,
    run_compare,
    run_sweep,
    spec_from_mapping,
    sweep_csv,
)
from .qasm import QasmError

_ERROR_AXES = ("f_w", "eps_ebit", "eps_cnot", "r")
_INPUT_AXES = ("alpha2", "phi", "gamma", "theta")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="-", help="output path, '-' for stdout")
    parser.add_argument("--seed", type=int, default=None, help="sampled-mode RNG seed")
    parser.add_argument(
        "--schedule-mode", choices=("sequential", "layered"), default="sequential"
    )
    parser.add_argument(
        "--measurement-mode", choices=("mixture", "sampled"), default="mixture"
    )


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", default=None, help="JSON experiment spec file")
    parser.add_argument("--circuit", default="remote-cnot", help="template name or QASM path")
    parser.add_argument(
        "--scheme",
        action="append",
        default=None,
        help="distribution scheme (repeatable or comma-separated)",
    )
    parser.add_argument("--profile", choices=sorted(PROFILES), default="soa")
    parser.add_argument(
        "--grid",
        action="append",
        default=None,
        metavar="KEY=VALUES",
        help="axis grid, e.g. f_w=0.90:0.99:0.01 or alpha2=0,0.5,1",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdcsim",
        description="Two-QPU quantum data centre simulator and remote-gate compiler.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_compile = sub.add_parser("compile", help="lower a circuit and report resources")
    p_compile.add_argument("circuit", help="template name or QASM path")
    p_compile.add_argument(
        "--scheme", default="cat", help="distribution scheme (default: cat)"
    )
    p_compile.add_argument("--out", default="-", help="report path, '-' for stdout")
    p_compile.add_argument(
        "--format", choices=("json", "text"), default="json", help="report format"
    )

    for name, help_text in (
        ("sweep", "simulate an error/input grid to CSV"),
        ("compare", "sweep plus first-order approximation columns"),
        ("input-scan", "sweep the input-state family at a fixed profile"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_grid_flags(p)
        _add_common(p)
    return parser


def _parse_grid_flags(pairs, allowed) -> dict:
    data: dict = {}
    inputs: dict = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        key = key.strip()
        if not sep or not value.strip():
            raise ExperimentError(f"--grid expects KEY=VALUES, got '{pair}'")
        if key not in allowed:
            raise ExperimentError(f"unknown grid axis '{key}'; allowed: {sorted(allowed)}")
        if key in _INPUT_AXES:
            inputs[key] = value.strip()
        else:
            data[key] = value.strip()
    if inputs:
        data["inputs"] = inputs
    return data


def _spec_from_args(args, allowed_axes) -> ExperimentSpec:
    if args.spec is not None:
        if args.grid:
            raise ExperimentError("--spec and --grid are mutually exclusive")
        return load_spec(args.spec)
    data = _parse_grid_flags(args.grid, allowed_axes)
    data["circuit"] = args.circuit
    data["profile"] = args.profile
    if args.scheme:
        schemes = []
        for chunk in args.scheme:
            schemes += [s.strip() for s in chunk.split(",") if s.strip()]
        data["schemes"] = schemes
    data["measurement_mode"] = args.measurement_mode
    data["schedule_mode"] = args.schedule_mode
    if args.seed is not None:
        data["seed"] = args.seed
    return spec_from_mapping(data)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _cmd_compile(args) -> int:
    circuit = load_circuit(args.circuit)
    dc = compile_circuit(circuit, Scheme.from_name(args.scheme))
    report = compile_report(dc)
    if args.format == "json":
        _write(args.out, json.dumps(report, indent=2) + "\n")
    else:
        _write(args.out, report_to_text(report))
    return 0


def _cmd_sweep(args) -> int:
    spec = _spec_from_args(args, allowed_axes=set(_ERROR_AXES) | set(_INPUT_AXES))
    _write(args.out, sweep_csv(run_sweep(spec)))
    return 0


def _cmd_compare(args) -> int:
    spec = _spec_from_args(args, allowed_axes=set(_ERROR_AXES) | set(_INPUT_AXES))
    _write(args.out, compare_csv(run_compare(spec)))
    return 0


def _cmd_input_scan(args) -> int:
    if args.grid is None and args.spec is None:
        args.grid = ["alpha2=0:1:0.1"]
    spec = _spec_from_args(args, allowed_axes=set(_INPUT_AXES))
    _write(args.out, sweep_csv(run_sweep(spec)))
    return 0


_COMMANDS = {
    "compile": _cmd_compile,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "input-scan": _cmd_input_scan,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (QasmError, CompileError, EngineError, ExperimentError, ValueError) as exc:
        print(f"qdcsim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
