"""Command-line entry point: ``vlp-mono {simulate,localize,export-plots}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .exceptions import ConfigError, VLPError
from .geometry import default_features
from .io import default_config, load_config, load_transmitter_json, write_results
from .localization import METHOD_ALIASES, Observation, localize
from .plots import export_plots
from .projection import ImagePoint, load_intrinsics
from .simulation import run_scenario

log = logging.getLogger("vlp_mono")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4


def _fail(code: int, msg: str) -> int:
    print(f"vlp-mono: error: {msg}", file=sys.stderr)
    return code


def thread_count() -> int:
    """Worker count from ``VLP_MONO_THREADS``; unset means 1, 0 means all CPUs."""
    raw = os.environ.get("VLP_MONO_THREADS", "1").strip() or "1"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"VLP_MONO_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError("VLP_MONO_THREADS must be >= 0")
    return n


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config) if args.config else default_config()
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.method is not None:
            overrides["method"] = args.method
        if overrides:
            cfg = replace(cfg, **overrides)
        n_jobs = thread_count()
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except OSError as exc:
        return _fail(EXIT_CONFIG, f"cannot read config: {exc}")

    log.info("running %s: %d grid points x %d trials", cfg.scenario_id, len(cfg.grid_points()), cfg.trials_per_point)
    results = run_scenario(cfg, n_jobs=n_jobs)
    try:
        paths = write_results(results, cfg, args.out)
        if any(r.successes for r in results):
            export_plots(Path(args.out))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write results: {exc}")
    failures = sum(r.failures for r in results)
    log.info("wrote %s (%d failed trials)", ", ".join(str(p) for p in paths.values()), failures)
    return EXIT_OK


def read_observations(path: Path, intrinsics, raw: bool) -> list[Observation]:
    """Rows of ``label,u_um,v_um``; an optional header row is skipped."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and rows[0][0].strip().lower() == "label":
        rows = rows[1:]
    if not rows:
        raise ConfigError(f"{path}: no observations")
    obs = []
    for n, row in enumerate(rows, 1):
        if len(row) != 3:
            raise ConfigError(f"{path}: row {n} must be label,u_um,v_um")
        try:
            u, v = float(row[1]), float(row[2])
        except ValueError:
            raise ConfigError(f"{path}: row {n} has non-numeric coordinates") from None
        point = intrinsics.from_sensor(u, v) if raw else ImagePoint(u, v)
        obs.append(Observation(row[0].strip(), point))
    return obs


def cmd_localize(args: argparse.Namespace) -> int:
    try:
        k = load_intrinsics(args.intrinsics)
        transmitter = load_transmitter_json(args.transmitter)
        obs = read_observations(Path(args.observations), k, args.raw_coords)
    except (ConfigError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    features = default_features(transmitter)
    method = args.method or "trilaterate"
    try:
        res = localize(obs, features, k, transmitter.center.z, method)
    except VLPError as exc:
        return _fail(EXIT_SOLVER, f"{type(exc).__name__}: {exc}")
    record = {
        "transmitter": transmitter.id,
        "method": METHOD_ALIASES[method],
        "X": res.position.x,
        "Y": res.position.y,
        "Z": res.position.z,
        "L": res.depth_scale,
        "residual_rms": res.residual_rms,
    }
    print(json.dumps(record))
    return EXIT_OK


def cmd_export_plots(args: argparse.Namespace) -> int:
    results_dir = Path(args.results_dir)
    if not results_dir.is_dir():
        return _fail(EXIT_IO, f"{results_dir} is not a directory")
    try:
        written = export_plots(results_dir, Path(args.out) if args.out else None)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(EXIT_IO, f"missing or corrupt results in {results_dir}: {exc}")
    for p in written:
        log.info("wrote %s", p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vlp-mono", description="Monocular single-luminaire visible-light positioning")
    parser.add_argument("--quiet", action="store_true", help="only print errors")
    sub = parser.add_subparsers(dest="command", required=True)
    methods = sorted(METHOD_ALIASES)

    p = sub.add_parser("simulate", help="run a Monte Carlo scenario")
    p.add_argument("--config", help="scenario YAML (default: bundled reference scenario)")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--method", choices=methods)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("localize", help="localize from one set of observations")
    p.add_argument("--intrinsics", required=True, help="intrinsics YAML (fx_um, fy_um, cx_um, cy_um, pixel_pitch_um)")
    p.add_argument("--transmitter", required=True, help="transmitter JSON")
    p.add_argument("--observations", required=True, help="CSV rows label,u_um,v_um")
    p.add_argument("--method", choices=methods)
    p.add_argument("--raw-coords", action="store_true", help="u, v are raw sensor coordinates; subtract the principal point")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("export-plots", help="plot data and SVGs from simulate output")
    p.add_argument("results_dir")
    p.add_argument("--out", help="output directory (default: results_dir)")
    p.set_defaults(func=cmd_export_plots)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
