"""Command-line interface: ``monoseq <command> [flags]``.

Exit status is 0 on success, 1 on a bad argument or unusable output path and
2 when ``--strict`` is set and a bounds or properties check fails.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, fields

from . import export
from .simulator import simulate_batch, simulate_poisson_batch, simulate_traces
from .stats import bound_report, property_report, summarize, trace_property_report
from .value_engine import MEMORY_GUARD, GridSpec, build_value_table
from .variance_engine import build_variance_table

COMMANDS = ("table", "simulate", "clt", "bounds", "properties", "poisson")
DEFAULT_N_LIST = (10, 100, 1000)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    grid_points: int = 4097
    reps: int | None = None
    seed: int | None = None
    output_path: str | None = None
    format: str = "csv"
    with_variance: bool = False
    n_list: list = field(default_factory=lambda: list(DEFAULT_N_LIST))
    strict: bool = False
    nu: float | None = None
    root_tolerance: float = 1e-12

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        for name in ("n", "grid_points", "reps", "nu"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise UsageError(f"{name} must be positive")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        if not self.n_list or any(int(k) < 1 for k in self.n_list):
            raise UsageError("--n-list needs positive integers")
        needs_n = self.command in ("table", "simulate", "clt", "properties", "poisson")
        if needs_n and self.n is None:
            raise UsageError(f"{self.command} needs --n")
        if self.command in ("simulate", "clt", "poisson"):
            if self.reps is None:
                raise UsageError(f"{self.command} needs --reps")
            if self.seed is None:
                raise UsageError(f"{self.command} needs --seed")
        if self.command == "properties" and self.reps is not None and self.seed is None:
            raise UsageError("trace checks need --seed")
        try:
            grid = GridSpec(self.grid_points, self.root_tolerance)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        horizon = max(self.n_list) if self.command == "bounds" else self.n
        if (horizon + 1) * grid.points > MEMORY_GUARD:
            raise UsageError(f"n={horizon} with G={grid.points} exceeds the memory guard of {MEMORY_GUARD} entries")
        if self.output_path is not None:
            parent = os.path.dirname(os.path.abspath(self.output_path))
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise UsageError(f"cannot write to {self.output_path}")
            if os.path.isdir(self.output_path):
                raise UsageError(f"{self.output_path} is a directory")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.grid_points, self.root_tolerance)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _n_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --n-list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, help="horizon (number of draws)")
    common.add_argument("--grid", dest="grid_points", type=int, help="grid nodes on [0, 1] (default 4097)")
    common.add_argument("--root-tolerance", type=float, help="threshold root tolerance (default 1e-12)")
    common.add_argument("--reps", type=int, help="Monte Carlo replicates")
    common.add_argument("--seed", type=int, help="master seed; required by every random command")
    common.add_argument("--output", dest="output_path", help="output file (default: standard output)")
    common.add_argument("--format", choices=("csv", "json"), help="file format (default csv)")
    common.add_argument("--with-variance", action="store_true", default=None, help="include the variance table or series")
    common.add_argument("--n-list", type=_n_list, help="comma separated horizons for bounds")
    common.add_argument("--strict", action="store_true", default=None, help="exit 2 when a check fails")
    common.add_argument("--nu", type=float, help="Poisson mean (default n)")
    common.add_argument("--json-config", help="JSON file with RunConfig fields; flags override it")

    parser = _Parser(prog="monoseq", description="Optimal online selection of a monotone subsequence.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "table": "build and export the value table",
        "simulate": "simulate L_n and write one value per line",
        "clt": "simulate and compare normalized lengths with N(0, 1)",
        "bounds": "mean and variance bounds over --n-list",
        "properties": "structural property checks on the tables",
        "poisson": "fixed-horizon policy on a Poisson number of arrivals",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.json_config is not None:
        try:
            with open(args.json_config) as fh:
                doc = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read --json-config: {exc}") from None
        known = {f.name for f in fields(RunConfig)}
        unknown = set(doc) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update(doc)
    for f in fields(RunConfig):
        given = getattr(args, f.name, None)
        if given is not None:
            values[f.name] = given
    values["command"] = args.command
    config = RunConfig(**values)
    config.validate()
    return config


def _open_output(config: RunConfig):
    if config.output_path is None:
        return sys.stdout, False
    return open(config.output_path, "w", newline=""), True


def _emit(config: RunConfig, write) -> None:
    stream, close = _open_output(config)
    try:
        write(stream)
    finally:
        if close:
            stream.close()


def _report(summary, vt, wt, bounds=None, properties=None) -> dict:
    out = summary.to_dict()
    out["v_table"] = vt.mean_length(summary.n)
    out["w_table"] = None if wt is None else wt.total_variance(summary.n)
    out["bounds"] = {} if bounds is None else bounds.to_dict()
    out["properties"] = [] if properties is None else [p.to_dict() for p in properties]
    return out


def _cmd_table(config: RunConfig) -> int:
    vt = build_value_table(config.n, config.grid)
    wt = build_variance_table(vt) if config.with_variance else None
    if config.format == "json":
        _emit(config, lambda fh: fh.write(export.dumps(export.value_table_json(vt, wt))))
    else:
        _emit(config, lambda fh: export.write_value_csv(vt, fh, wt))
    return 0


def _cmd_simulate(config: RunConfig) -> int:
    vt = build_value_table(config.n, config.grid)
    wt = build_variance_table(vt) if config.with_variance else None
    if config.with_variance:
        lengths, series = simulate_batch(vt, config.reps, config.seed, with_series=True)
    else:
        lengths, series = simulate_batch(vt, config.reps, config.seed), None
    if config.output_path is not None:
        _emit(config, lambda fh: export.write_batch(lengths, fh, series))
    summary = summarize(lengths, config.n, mean_center=vt.mean_length()) if config.reps >= 2 else None
    doc = {"n": config.n, "reps": config.reps, "v_table": vt.mean_length()}
    if summary is not None:
        doc = _report(summary, vt, wt)
    sys.stdout.write(export.dumps(doc))
    return 0


def _cmd_clt(config: RunConfig) -> int:
    if config.reps < 2:
        raise UsageError("clt needs --reps of at least 2")
    vt = build_value_table(config.n, config.grid)
    wt = build_variance_table(vt)
    lengths = simulate_batch(vt, config.reps, config.seed)
    summary = summarize(lengths, config.n, mean_center=vt.mean_length())
    doc = _report(summary, vt, wt, bounds=bound_report(vt, wt, [config.n]))
    if config.output_path is not None:
        if config.format == "json":
            full = dict(doc, histogram=[list(r) for r in summary.histogram_rows()])
            _emit(config, lambda fh: fh.write(export.dumps(full)))
        else:
            _emit(config, lambda fh: export.write_histogram_csv(summary, fh))
    sys.stdout.write(export.dumps(doc))
    return 0


def _cmd_bounds(config: RunConfig) -> int:
    top = max(config.n_list)
    vt = build_value_table(top, config.grid)
    wt = build_variance_table(vt)
    report = bound_report(vt, wt, config.n_list)
    doc = report.to_dict()
    if config.format == "json" or config.output_path is None:
        text = export.dumps(doc)
    else:
        head = "n,mean,sqrt_2n,gap_ratio,variance,lower,upper,passed\n"
        text = head + "".join(
            f"{r.n},{export.fmt(r.mean)},{export.fmt(r.sqrt_2n)},{export.fmt(r.gap_ratio)},"
            f"{export.fmt(r.variance)},{export.fmt(r.lower)},{export.fmt(r.upper)},{int(r.passed)}\n"
            for r in report.rows
        )
    _emit(config, lambda fh: fh.write(text))
    return 2 if config.strict and not report.passed else 0


def _cmd_properties(config: RunConfig) -> int:
    vt = build_value_table(config.n, config.grid)
    wt = build_variance_table(vt)
    records = property_report(vt, wt)
    if config.reps is not None:
        records += trace_property_report(vt, simulate_traces(vt, config.reps, config.seed))
    if config.format == "json" or config.output_path is None:
        text = export.dumps({"properties": [r.to_dict() for r in records]})
    else:
        text = "name,max_violation,tolerance,passed\n" + "".join(
            f"{r.name},{export.fmt(r.max_violation)},{export.fmt(r.tolerance)},{int(r.passed)}\n" for r in records
        )
    _emit(config, lambda fh: fh.write(text))
    return 2 if config.strict and not all(r.passed for r in records) else 0


def _cmd_poisson(config: RunConfig) -> int:
    if config.reps < 2:
        raise UsageError("poisson needs --reps of at least 2")
    nu = float(config.n if config.nu is None else config.nu)
    vt = build_value_table(config.n, config.grid)
    lengths = simulate_poisson_batch(vt, nu, config.reps, config.seed)
    if config.output_path is not None:
        _emit(config, lambda fh: export.write_batch(lengths, fh))
    summary = summarize(lengths, config.n)
    v = vt.mean_length()
    doc = {
        "n": config.n,
        "nu": nu,
        "reps": config.reps,
        "mean": summary.mean,
        "stderr": summary.stderr_mean,
        "v_table": v,
        "mean_within_bound": summary.mean <= v + 3.0 * summary.stderr_mean,
    }
    sys.stdout.write(export.dumps(doc))
    return 0


HANDLERS = {
    "table": _cmd_table,
    "simulate": _cmd_simulate,
    "clt": _cmd_clt,
    "bounds": _cmd_bounds,
    "properties": _cmd_properties,
    "poisson": _cmd_poisson,
}


def run(config: RunConfig) -> int:
    config.validate()
    return HANDLERS[config.command](config)


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
        return run(config)
    except UsageError as exc:
        sys.stderr.write(f"monoseq: error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"monoseq: error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
