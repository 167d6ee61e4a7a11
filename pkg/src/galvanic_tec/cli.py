"""Command-line entry point: ``galvanic-tec gain|sweep|safety|compare``.

Exit status is 0 on success (a failed safety verdict is still a result),
2 on a configuration or validation error and 3 on a numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    RunConfig,
    config_to_dict,
    parse_config,
    with_frequency,
    with_output,
    with_overrides,
    with_sweep,
)
from .errors import ConfigError, IoError, ParseError, SingularityError, TECError, ValidationError
from .io import emit_plot, write_csv, write_yaml
from .network import BandWarning, ConditionWarning
from .safety import safety_report
from .sweeps import ALL_PATHS, SweepRecord, SweepResult, describe, path_comparison, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("gain", "sweep", "safety", "compare")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="galvanic-tec", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="YAML run configuration")
    ap.add_argument("--path", default=None, help="ss|sm|ms|mm|all or a comma list")
    ap.add_argument("--freq", help="Hz, or start:stop[:points_per_decade]")
    ap.add_argument("--sweep", help="param=start:stop:count in config units (mm or Hz)")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--plot", action="store_true", help="also write an SVG plot")
    ap.add_argument("--strict", action="store_true", help="treat warnings and empty results as errors")
    ap.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="dotted config override, e.g. geometry.d_mm=50 (repeatable)",
    )
    return ap


def resolve(args) -> RunConfig:
    cfg = parse_config(args.config, args.overrides)
    if args.path:
        sel = args.path.strip().lower()
        paths = list(ALL_PATHS) if sel == "all" else [p.strip() for p in sel.split(",")]
        cfg = with_overrides(cfg, {"paths": paths})
    if args.freq:
        cfg = with_frequency(cfg, args.freq)
    if args.sweep:
        cfg = with_sweep(cfg, args.sweep)
    out = {}
    if args.out:
        out["dir"] = args.out
    if args.plot:
        out["plot"] = True
    if args.strict:
        out["strict"] = True
    return with_output(cfg, **out) if out else cfg


def _finish(name: str, result: SweepResult, cfg: RunConfig, resolved: dict) -> list[Path]:
    out = Path(cfg.output.dir)
    if cfg.output.strict and not result.records:
        raise ConfigError("empty result in strict mode")
    files = [write_csv(result, out / f"{name}.csv")]
    files.append(write_yaml({"config": config_to_dict(cfg), "resolved": resolved}, out / f"{name}.meta.yaml"))
    if cfg.output.plot:
        files.append(emit_plot(result, out / f"{name}.svg", strict=cfg.output.strict))
    return files


def cmd_gain(cfg: RunConfig) -> list[Path]:
    spec = cfg.frequency_spec()
    return _finish("gain", run_sweep(spec), cfg, describe(spec))


def cmd_sweep(cfg: RunConfig) -> list[Path]:
    if cfg.sweep is None:
        raise ConfigError("sweep needs --sweep param=start:stop:count or a 'sweep' config section")
    spec = cfg.sweep_spec()
    return _finish("sweep", run_sweep(spec), cfg, describe(spec))


def cmd_compare(cfg: RunConfig) -> list[Path]:
    table = cfg.tissue_table()
    spec = cfg.frequency_spec(table)
    cmp = path_comparison(table, spec.stack, spec.geom, spec.elec, spec.values, spec.current)
    records = [
        SweepRecord(f, p, cmp.points[p][i]) for i, f in enumerate(cmp.frequencies) for p in ALL_PATHS
    ]
    result = SweepResult("frequency", tuple(records))
    for f in sorted({cmp.frequencies[0], cmp.frequencies[-1]}):
        pts = cmp.at(f)
        print(f"{f:g} Hz: " + " > ".join(f"{p} ({pts[p].gain:.2f} dB)" for p in cmp.ordering(f)))
    meta = describe(spec)
    meta["paths"] = list(ALL_PATHS)
    return _finish("compare", result, cfg, meta)


def cmd_safety(cfg: RunConfig) -> list[Path]:
    table = cfg.tissue_table()
    stack = cfg.stack(table)
    elec = cfg.electrode_config()
    reports = {}
    for p in cfg.paths:
        rep = safety_report(
            table,
            stack,
            cfg.channel_geometry(p),
            elec,
            cfg.analysis_frequency_hz,
            current=cfg.safety.drive_current_a,
            density_limit=cfg.safety.density_limit_a_per_m2,
            contact_limit=cfg.safety.contact_limit_a,
        )
        reports[p] = rep.as_dict()
        print(f"{p}: {rep.verdict}" + (f" ({'; '.join(rep.reasons)})" if rep.reasons else ""))
    path = Path(cfg.output.dir) / "safety.yaml"
    return [write_yaml({"config": config_to_dict(cfg), "reports": reports}, path)]


_RUN = {"gain": cmd_gain, "sweep": cmd_sweep, "safety": cmd_safety, "compare": cmd_compare}


def run(command: str, cfg: RunConfig) -> int:
    """Execute ``command`` and return the exit status; diagnostics go to stderr."""
    try:
        with warnings.catch_warnings():
            if cfg.output.strict:
                warnings.simplefilter("error", BandWarning)
                warnings.simplefilter("error", ConditionWarning)
            with np.errstate(divide="raise", invalid="raise", over="raise"):
                files = _RUN[command](cfg)
    except (ConditionWarning, SingularityError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (BandWarning, ValidationError, ParseError, ConfigError, IoError, TECError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
    except (ValidationError, ParseError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.command, cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
