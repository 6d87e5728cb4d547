"""Pinhole image formation for an upward-facing camera.

Image-plane quantities are in micrometers and centered on the principal point.
The camera looks along +z with its image axes aligned to world x and y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np
import yaml

from .exceptions import BehindCameraError, ConfigError
from .geometry import WorldPoint


class ImagePoint(NamedTuple):
    """Image-plane point relative to the principal point, micrometers."""

    u: float
    v: float


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float = 0.0
    cy: float = 0.0
    pixel_pitch: float = 1.0

    def __post_init__(self):
        for name in ("fx", "fy", "pixel_pitch"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be > 0, got {value}")
        if not (math.isfinite(self.cx) and math.isfinite(self.cy)):
            raise ConfigError("principal point must be finite")

    @property
    def f_mean(self) -> float:
        """Geometric-mean focal length used for all distance computations."""
        return math.sqrt(self.fx * self.fy)

    def matrix(self) -> np.ndarray:
        """Conventional upper-triangular intrinsic matrix."""
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def from_sensor(self, x_raw: float, y_raw: float) -> ImagePoint:
        """Raw sensor coordinates (um) to a principal-point-centered ``ImagePoint``."""
        return ImagePoint(x_raw - self.cx, y_raw - self.cy)

    def to_sensor(self, a: ImagePoint) -> tuple[float, float]:
        return a.u + self.cx, a.v + self.cy

    def isotropic(self, a: ImagePoint) -> ImagePoint:
        """Rescale ``a`` to the image of an isotropic camera with focal length ``f_mean``.

        After this, image separations are proportional to world separations on
        any plane parallel to the sensor, whatever the fx/fy ratio.
        """
        f = self.f_mean
        return ImagePoint(a.u * f / self.fx, a.v * f / self.fy)

    def scaled(self, s: float) -> "CameraIntrinsics":
        return CameraIntrinsics(self.fx * s, self.fy * s, self.cx * s, self.cy * s, self.pixel_pitch * s)


# Table 1 of the reference calibration, micrometers
PAPER_INTRINSICS = CameraIntrinsics(fx=4.0001e3, fy=4.0102e3, cx=2.6348e3, cy=1.5286e3)

_INTRINSICS_KEYS = {"fx_um": "fx", "fy_um": "fy", "cx_um": "cx", "cy_um": "cy", "pixel_pitch_um": "pixel_pitch"}


def intrinsics_from_mapping(data: dict) -> CameraIntrinsics:
    if not isinstance(data, dict):
        raise ConfigError("intrinsics must be a key-value mapping")
    unknown = set(data) - set(_INTRINSICS_KEYS)
    if unknown:
        raise ConfigError(f"unknown intrinsics keys: {sorted(unknown)}")
    defaults = asdict(PAPER_INTRINSICS)
    try:
        kwargs = {attr: float(data.get(key, defaults[attr])) for key, attr in _INTRINSICS_KEYS.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad intrinsics value: {exc}") from None
    return CameraIntrinsics(**kwargs)


def intrinsics_to_mapping(k: CameraIntrinsics) -> dict:
    return {key: getattr(k, attr) for key, attr in _INTRINSICS_KEYS.items()}


def load_intrinsics(path: Union[str, Path]) -> CameraIntrinsics:
    """Read an intrinsics file. Missing keys fall back to the paper calibration."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return intrinsics_from_mapping(data or {})


def save_intrinsics(k: CameraIntrinsics, path: Union[str, Path]) -> None:
    Path(path).write_text(yaml.safe_dump(intrinsics_to_mapping(k), sort_keys=False))


def project(camera_pos: WorldPoint, k: CameraIntrinsics, p: WorldPoint) -> ImagePoint:
    depth = p[2] - camera_pos[2]
    if not depth > 0:
        raise BehindCameraError(f"point {tuple(p)} is not in front of camera at {tuple(camera_pos)}")
    return ImagePoint(k.fx * (p[0] - camera_pos[0]) / depth, k.fy * (p[1] - camera_pos[1]) / depth)


def back_project(camera_pos: WorldPoint, k: CameraIntrinsics, a: ImagePoint, plane_z: float) -> WorldPoint:
    """Intersect the viewing ray through ``a`` with the horizontal plane ``z = plane_z``."""
    depth = plane_z - camera_pos[2]
    if not depth > 0:
        raise BehindCameraError(f"plane z={plane_z} is not above the camera")
    return WorldPoint(camera_pos[0] + a.u * depth / k.fx, camera_pos[1] + a.v * depth / k.fy, plane_z)


def image_distance(a: ImagePoint, k: CameraIntrinsics) -> float:
    """Distance from the optical center to image point ``a``, micrometers.

    Computed in the isotropic frame, so the result is ``>= k.f_mean`` with
    equality only at the principal point.
    """
    iso = k.isotropic(a)
    return math.sqrt(iso.u * iso.u + iso.v * iso.v + k.f_mean * k.f_mean)


@dataclass(frozen=True)
class NoNoise:
    kind = "none"


@dataclass(frozen=True)
class GaussianNoise:
    sigma: float
    kind = "gaussian"

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ConfigError(f"gaussian sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class QuantizeNoise:
    pitch: float
    kind = "quantize"

    def __post_init__(self):
        if not (math.isfinite(self.pitch) and self.pitch > 0):
            raise ConfigError(f"quantize pitch must be > 0, got {self.pitch}")


NoiseModel = Union[NoNoise, GaussianNoise, QuantizeNoise]


def apply_noise(a: ImagePoint, n: NoiseModel, rng: Optional[np.random.Generator] = None) -> ImagePoint:
    """Corrupt an image point. Only the gaussian model consumes ``rng``."""
    if isinstance(n, NoNoise):
        return a
    if isinstance(n, QuantizeNoise):
        # np.round is symmetric about zero, so mirrored scenes quantize identically
        return ImagePoint(float(np.round(a.u / n.pitch)) * n.pitch, float(np.round(a.v / n.pitch)) * n.pitch)
    if isinstance(n, GaussianNoise):
        if rng is None:
            raise ValueError("gaussian noise needs an explicit rng")
        du, dv = rng.normal(0.0, n.sigma, size=2)
        return ImagePoint(a.u + float(du), a.v + float(dv))
    raise TypeError(f"unknown noise model {n!r}")


def noise_from_mapping(data: dict) -> NoiseModel:
    kind = str(data.get("kind", "none")).lower()
    try:
        if kind == "none":
            return NoNoise()
        if kind == "gaussian":
            return GaussianNoise(float(data["sigma_um"]))
        if kind == "quantize":
            return QuantizeNoise(float(data.get("pitch_um", 1.0)))
    except KeyError as exc:
        raise ConfigError(f"noise model {kind!r} needs key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad noise parameter: {exc}") from None
    raise ConfigError(f"unknown noise kind {kind!r}")


def noise_to_mapping(n: NoiseModel) -> dict:
    if isinstance(n, GaussianNoise):
        return {"kind": "gaussian", "sigma_um": n.sigma}
    if isinstance(n, QuantizeNoise):
        return {"kind": "quantize", "pitch_um": n.pitch}
    return {"kind": "none"}
