"""Scenario config files and simulation result tables.

Configs are YAML with units spelled out in every key (``_m``, ``_um``).
Result tables are CSV with floats written to 9 significant digits.
"""

from __future__ import annotations

import csv
import json
import math
from importlib import resources
from pathlib import Path
from typing import Any, Sequence, Union

import yaml

from .exceptions import ConfigError
from .geometry import Circle, Rectangle, RoomConfig, TransmitterModel, WorldPoint
from .projection import intrinsics_from_mapping, intrinsics_to_mapping, noise_from_mapping, noise_to_mapping
from .simulation import CdfSeries, PointResult, ScenarioConfig, rmse_cdf

PathLike = Union[str, Path]

RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.csv"
CDF_FILE = "cdf.csv"

RESULTS_COLUMNS = ["scenario_id", "gx", "gy", "gz", "trial", "est_x", "est_y", "est_z", "err_3d", "status"]
SUMMARY_COLUMNS = [
    "scenario_id", "gx", "gy", "gz", "successes", "failures",
    "offset_max", "rmse_xy", "rmse_yz", "rmse_3d",
]
CDF_COLUMNS = ["error", "probability"]


def fmt(value: float) -> str:
    return "nan" if value is None or math.isnan(value) else f"{value:.9g}"


def _get(data: dict, key: str, where: str) -> Any:
    try:
        return data[key]
    except (KeyError, TypeError):
        raise ConfigError(f"missing key {where}.{key}") from None


def transmitter_from_mapping(data: dict) -> TransmitterModel:
    if not isinstance(data, dict):
        raise ConfigError("transmitter must be a mapping")
    try:
        center = _get(data, "center_m", "transmitter")
        if len(center) != 3:
            raise ConfigError("transmitter.center_m must have 3 components")
        kind = str(data.get("shape", "rectangle")).lower()
        if kind == "rectangle":
            shape = Rectangle(float(_get(data, "width_x_m", "transmitter")), float(_get(data, "length_y_m", "transmitter")))
        elif kind == "circle":
            shape = Circle(float(_get(data, "diameter_m", "transmitter")))
        else:
            raise ConfigError(f"unknown transmitter shape {kind!r}")
        return TransmitterModel(str(data.get("id", "LED-1")), WorldPoint(*map(float, center)), shape)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad transmitter description: {exc}") from None


def transmitter_to_mapping(t: TransmitterModel) -> dict:
    out: dict[str, Any] = {"id": t.id, "center_m": list(t.center)}
    if isinstance(t.shape, Rectangle):
        out.update(shape="rectangle", width_x_m=t.shape.width_x, length_y_m=t.shape.length_y)
    else:
        out.update(shape="circle", diameter_m=t.shape.diameter)
    return out


def load_transmitter_json(path: PathLike) -> TransmitterModel:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return transmitter_from_mapping(data)


def config_from_mapping(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("scenario config must be a mapping")
    try:
        room_d = _get(data, "room", "")
        room = RoomConfig(
            float(_get(room_d, "width_x_m", "room")),
            float(_get(room_d, "length_y_m", "room")),
            float(_get(room_d, "height_m", "room")),
        )
        grid = _get(data, "grid", "")
        return ScenarioConfig(
            room=room,
            transmitter=transmitter_from_mapping(_get(data, "transmitter", "")),
            intrinsics=intrinsics_from_mapping(data.get("intrinsics") or {}),
            receiver_height=float(_get(grid, "receiver_height_m", "grid")),
            grid_min=float(_get(grid, "min_m", "grid")),
            grid_max=float(_get(grid, "max_m", "grid")),
            grid_step=float(_get(grid, "step_m", "grid")),
            noise=noise_from_mapping(data.get("noise") or {}),
            trials_per_point=int(data.get("trials_per_point", 1)),
            seed=int(data.get("seed", 0)),
            method=str(data.get("method", "trilaterate")),
            scenario_id=str(data.get("scenario_id", "scenario")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad config value: {exc}") from None


def config_to_mapping(cfg: ScenarioConfig) -> dict:
    return {
        "scenario_id": cfg.scenario_id,
        "seed": cfg.seed,
        "method": cfg.method,
        "trials_per_point": cfg.trials_per_point,
        "room": {"width_x_m": cfg.room.width_x, "length_y_m": cfg.room.length_y, "height_m": cfg.room.height},
        "transmitter": transmitter_to_mapping(cfg.transmitter),
        "intrinsics": intrinsics_to_mapping(cfg.intrinsics),
        "grid": {
            "receiver_height_m": cfg.receiver_height,
            "min_m": cfg.grid_min,
            "max_m": cfg.grid_max,
            "step_m": cfg.grid_step,
        },
        "noise": noise_to_mapping(cfg.noise),
    }


def load_config(path: PathLike) -> ScenarioConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_mapping(data)


def default_config_text() -> str:
    return resources.files("vlp_mono").joinpath("data/paper_scenario.yaml").read_text()


def default_config() -> ScenarioConfig:
    return config_from_mapping(yaml.safe_load(default_config_text()))


def write_results(results: Sequence[PointResult], cfg: ScenarioConfig, out_dir: PathLike) -> dict[str, Path]:
    """Write the per-trial, per-point and CDF tables; return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"results": out / RESULTS_FILE, "summary": out / SUMMARY_FILE, "cdf": out / CDF_FILE}
    sid = cfg.scenario_id

    with open(paths["results"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_COLUMNS)
        for r in results:
            g = [fmt(c) for c in r.truth]
            for t, (est, status) in enumerate(zip(r.estimates, r.statuses)):
                if est is None:
                    w.writerow([sid, *g, t, "nan", "nan", "nan", "nan", status])
                else:
                    w.writerow([sid, *g, t, *(fmt(c) for c in est), fmt(est.distance(r.truth)), status])

    with open(paths["summary"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in results:
            w.writerow([
                sid, *(fmt(c) for c in r.truth), r.successes, r.failures,
                fmt(r.offset_max), fmt(r.rmse_xy), fmt(r.rmse_yz), fmt(r.rmse_3d),
            ])

    cdf = rmse_cdf(results) if any(r.successes for r in results) else CdfSeries([])
    write_cdf(cdf, paths["cdf"])
    return paths


def write_cdf(cdf: CdfSeries, path: PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CDF_COLUMNS)
        for v, p in cdf.points:
            w.writerow([fmt(v), fmt(p)])


def read_table(path: PathLike, columns: Sequence[str]) -> list[dict[str, str]]:
    """Read a CSV written by this module, checking its header."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != list(columns):
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return list(reader)
