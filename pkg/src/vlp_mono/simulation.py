"""Monte Carlo harness over a grid of receiver positions."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .exceptions import ConfigError, VLPError
from .geometry import PAPER_ROOM, PAPER_TRANSMITTER, RoomConfig, TransmitterModel, WorldPoint, default_features
from .localization import METHOD_ALIASES, Observation, localize
from .projection import (
    PAPER_INTRINSICS,
    CameraIntrinsics,
    GaussianNoise,
    NoiseModel,
    QuantizeNoise,
    apply_noise,
    project,
)


@dataclass(frozen=True)
class ScenarioConfig:
    room: RoomConfig = PAPER_ROOM
    transmitter: TransmitterModel = PAPER_TRANSMITTER
    intrinsics: CameraIntrinsics = PAPER_INTRINSICS
    receiver_height: float = 2.0
    grid_min: float = 0.0
    grid_max: float = 3.0
    grid_step: float = 0.5
    noise: NoiseModel = QuantizeNoise(1.0)
    trials_per_point: int = 1
    seed: int = 0
    method: str = "trilaterate"
    scenario_id: str = "paper"

    def __post_init__(self):
        if not (math.isfinite(self.grid_step) and self.grid_step > 0):
            raise ConfigError(f"grid_step must be > 0, got {self.grid_step}")
        if not self.grid_min < self.grid_max:
            raise ConfigError("grid_min must be < grid_max")
        if int(self.trials_per_point) != self.trials_per_point or self.trials_per_point < 1:
            raise ConfigError("trials_per_point must be an integer >= 1")
        if not 0 < self.receiver_height < self.room.height:
            raise ConfigError("receiver_height must lie strictly between floor and ceiling")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.method not in METHOD_ALIASES:
            raise ConfigError(f"unknown method {self.method!r}")
        object.__setattr__(self, "method", METHOD_ALIASES[self.method])
        self.transmitter.check_in_room(self.room)

    def grid_axis(self) -> np.ndarray:
        n = int(math.floor((self.grid_max - self.grid_min) / self.grid_step + 1e-9)) + 1
        return self.grid_min + self.grid_step * np.arange(n)

    def grid_points(self) -> list[WorldPoint]:
        """Receiver positions, x-major; list index is the grid index."""
        axis = self.grid_axis()
        return [WorldPoint(float(x), float(y), self.receiver_height) for x in axis for y in axis]


class Metrics(NamedTuple):
    offset_max: float
    rmse_xy: float
    rmse_yz: float
    rmse_3d: float


@dataclass
class PointResult:
    truth: WorldPoint
    estimates: list[Optional[WorldPoint]]  # one per trial, None on failure
    statuses: list[str]
    offset_max: float = math.nan
    rmse_xy: float = math.nan
    rmse_yz: float = math.nan
    rmse_3d: float = math.nan
    failures: int = 0

    @property
    def successes(self) -> int:
        return len(self.estimates) - self.failures


@dataclass(frozen=True)
class CdfSeries:
    points: list[tuple[float, float]] = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        return [v for v, _ in self.points]

    @property
    def probabilities(self) -> list[float]:
        return [p for _, p in self.points]


def compute_metrics(truth: WorldPoint, estimates: Sequence[WorldPoint]) -> Metrics:
    if len(estimates) == 0:
        raise ValueError("compute_metrics needs at least one estimate")
    d = np.asarray(estimates, dtype=float) - np.asarray(truth, dtype=float)
    sq = d * d
    return Metrics(
        offset_max=float(np.sqrt(sq.sum(axis=1)).max()),
        rmse_xy=float(np.sqrt((sq[:, 0] + sq[:, 1]).mean())),
        rmse_yz=float(np.sqrt((sq[:, 1] + sq[:, 2]).mean())),
        rmse_3d=float(np.sqrt(sq.sum(axis=1).mean())),
    )


def build_cdf(values: Sequence[float]) -> CdfSeries:
    """Empirical CDF; ties collapse into a single step."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("build_cdf needs at least one value")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("build_cdf needs finite nonnegative values")
    uniq, counts = np.unique(arr, return_counts=True)
    cum = np.cumsum(counts)
    n = arr.size
    return CdfSeries([(float(v), float(c / n)) for v, c in zip(uniq, cum)])


def trial_rng(seed: int, grid_index: int, trial: int) -> np.random.Generator:
    """Independent stream for one (grid point, trial); order of execution does not matter."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), grid_index, trial]))


def _run_point(cfg: ScenarioConfig, grid_index: int, truth: WorldPoint) -> PointResult:
    features = default_features(cfg.transmitter)
    k = cfg.intrinsics
    H = cfg.room.height
    needs_rng = isinstance(cfg.noise, GaussianNoise)
    try:
        clean = [(label, project(truth, k, p)) for label, p in features]
    except VLPError as exc:
        clean, reason = None, type(exc).__name__
    estimates: list[Optional[WorldPoint]] = []
    statuses: list[str] = []
    for t in range(cfg.trials_per_point):
        if clean is None:
            estimates.append(None)
            statuses.append(reason)
            continue
        rng = trial_rng(cfg.seed, grid_index, t) if needs_rng else None
        obs = [Observation(label, apply_noise(a, cfg.noise, rng)) for label, a in clean]
        try:
            est = localize(obs, features, k, H, cfg.method).position
        except VLPError as exc:
            estimates.append(None)
            statuses.append(type(exc).__name__)
        else:
            estimates.append(est)
            statuses.append("ok")
    result = PointResult(truth, estimates, statuses, failures=len(statuses) - statuses.count("ok"))
    good = [e for e in estimates if e is not None]
    if good:
        m = compute_metrics(truth, good)
        result.offset_max, result.rmse_xy, result.rmse_yz, result.rmse_3d = m
    return result


def _run_chunk(args: tuple[ScenarioConfig, list[tuple[int, WorldPoint]]]) -> list[PointResult]:
    cfg, chunk = args
    return [_run_point(cfg, g, p) for g, p in chunk]


def run_scenario(cfg: ScenarioConfig, n_jobs: int = 1) -> list[PointResult]:
    """Localize every grid point ``trials_per_point`` times.

    Results depend only on ``cfg``: each trial draws from its own stream keyed
    by (seed, grid index, trial), so ``n_jobs`` changes speed, not output.
    Unreachable or failed trials are counted in ``failures``.
    """
    points = list(enumerate(cfg.grid_points()))
    if n_jobs <= 0:
        n_jobs = _auto_jobs()
    if n_jobs == 1 or len(points) < 2:
        return [_run_point(cfg, g, p) for g, p in points]
    chunks = [c for c in (points[i::n_jobs] for i in range(n_jobs)) if c]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        parts = list(pool.map(_run_chunk, [(cfg, c) for c in chunks]))
    merged = {}
    for chunk, part in zip(chunks, parts):
        for (g, _), res in zip(chunk, part):
            merged[g] = res
    return [merged[g] for g, _ in points]


def _auto_jobs() -> int:
    if hasattr(os, "sched_getaffinity"):
        return max(1, len(os.sched_getaffinity(0)))
    return os.cpu_count() or 1


def rmse_cdf(results: Sequence[PointResult], which: str = "rmse_3d") -> CdfSeries:
    """CDF of per-point RMSE over grid points with at least one success."""
    values = [getattr(r, which) for r in results if r.successes > 0]
    return build_cdf(values)
