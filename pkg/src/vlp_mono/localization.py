"""Single-luminaire monocular localization.

Pipeline: recover the camera-to-ceiling depth ``L`` from the known luminaire
size, convert each feature's image distance into a world range via similar
triangles (``d_A = d_a * L / f``), then intersect the range spheres on the
horizontal slice ``Z = H - L``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Literal, NamedTuple, Sequence

from .exceptions import (
    CollinearError,
    ConvergenceError,
    DegenerateImageError,
    GeometryError,
    ImplausibleDepthError,
    InsufficientFeaturesError,
)
from .geometry import FeatureSet, WorldPoint
from .projection import CameraIntrinsics, ImagePoint, image_distance

Method = Literal["trilaterate", "least_squares"]

_DET_TOL = 1e-12  # m^2
_PLANE_TOL = 1e-9  # m
_MIN_IMAGE_SEPARATION = 1e-9  # um
_MAX_EXTRA_DEPTH = 10.0  # m beyond the ceiling height

METHOD_ALIASES = {
    "tri": "trilaterate",
    "trilaterate": "trilaterate",
    "lsq": "least_squares",
    "least_squares": "least_squares",
}


class Observation(NamedTuple):
    label: str
    point: ImagePoint


class SphereConstraint(NamedTuple):
    center: WorldPoint
    radius: float


@dataclass(frozen=True)
class LocalizationResult:
    position: WorldPoint
    depth_scale: float
    residual_rms: float


def _match(obs: Iterable[Observation], features: FeatureSet) -> list[tuple[str, ImagePoint, WorldPoint]]:
    """Pair observations with feature points, in feature-set order."""
    by_label: dict[str, ImagePoint] = {}
    for label, point in obs:
        if label in by_label:
            raise GeometryError(f"duplicate observation label {label!r}")
        if label not in features:
            raise GeometryError(f"observation label {label!r} is not a feature of the transmitter")
        by_label[label] = ImagePoint(*point)
    return [(label, by_label[label], p) for label, p in features if label in by_label]


def estimate_depth_scale(obs: Iterable[Observation], features: FeatureSet, k: CameraIntrinsics) -> float:
    """Perpendicular camera-to-ceiling distance ``L``, meters.

    Averages ``f * world_separation / image_separation`` over every pair of
    observed features. Image points are first mapped to the isotropic frame so
    anisotropic focal lengths do not bias the ratio.
    """
    matched = _match(obs, features)
    if len(matched) < 2:
        raise InsufficientFeaturesError(f"depth scale needs >= 2 matched features, got {len(matched)}")
    ratios = []
    for (la, a, pa), (lb, b, pb) in itertools.combinations(matched, 2):
        ia, ib = k.isotropic(a), k.isotropic(b)
        sep = math.hypot(ia.u - ib.u, ia.v - ib.v)
        if sep < _MIN_IMAGE_SEPARATION:
            raise DegenerateImageError(f"image points {la!r} and {lb!r} coincide")
        ratios.append(pa.xy_distance(pb) / sep)
    return k.f_mean * math.fsum(ratios) / len(ratios)


def feature_distance(d_a: float, L: float, k: CameraIntrinsics) -> float:
    """World range to a feature from its image distance ``d_a`` (um) and depth ``L`` (m)."""
    if not L > 0:
        raise ImplausibleDepthError(f"depth scale must be > 0, got {L}")
    return d_a * L / k.f_mean


def _check_slice(centers: Sequence[WorldPoint], H: float, L: float) -> None:
    for c in centers:
        if abs(c.z - H) > _PLANE_TOL:
            raise GeometryError(f"sphere center {tuple(c)} is not on the plane z={H}")
    if not (0 < L < H + _MAX_EXTRA_DEPTH):
        raise ImplausibleDepthError(f"depth scale {L} outside (0, {H + _MAX_EXTRA_DEPTH})")


def _linearized(spheres: Sequence[SphereConstraint]) -> tuple[list[tuple[float, float]], list[float]]:
    """Rows of the subtracted-pairs system ``(c_i - c_0) . (X, Y) = rhs_i``."""
    (x0, y0, _), r0 = spheres[0]
    rows, rhs = [], []
    for (xi, yi, _), ri in spheres[1:]:
        rows.append((xi - x0, yi - y0))
        rhs.append(0.5 * (r0 * r0 - ri * ri + xi * xi - x0 * x0 + yi * yi - y0 * y0))
    return rows, rhs


def trilaterate_planar(
    sA: SphereConstraint, sB: SphereConstraint, sC: SphereConstraint, H: float, L: float
) -> WorldPoint:
    """Closed-form intersection of three range spheres centered on the ceiling.

    Z is pinned to ``H - L``; X and Y come from the 2x2 system obtained by
    subtracting sphere B and sphere C from sphere A.
    """
    spheres = [SphereConstraint(WorldPoint(*s.center), float(s.radius)) for s in (sA, sB, sC)]
    _check_slice([s.center for s in spheres], H, L)
    ((a11, a12), (a21, a22)), (b1, b2) = _linearized(spheres)
    det = a11 * a22 - a12 * a21
    if abs(det) < _DET_TOL:
        raise CollinearError(f"sphere centers are collinear (det={det:.3g} m^2)")
    x = (b1 * a22 - a12 * b2) / det
    y = (a11 * b2 - a21 * b1) / det
    return WorldPoint(x, y, H - L)


def _normal_equations_seed(spheres: Sequence[SphereConstraint]) -> tuple[float, float]:
    rows, rhs = _linearized(spheres)
    s11 = math.fsum(r[0] * r[0] for r in rows)
    s12 = math.fsum(r[0] * r[1] for r in rows)
    s22 = math.fsum(r[1] * r[1] for r in rows)
    t1 = math.fsum(r[0] * b for r, b in zip(rows, rhs))
    t2 = math.fsum(r[1] * b for r, b in zip(rows, rhs))
    det = s11 * s22 - s12 * s12
    # det of the normal matrix is a sum of squared pair determinants (Cauchy-Binet)
    if math.sqrt(max(det, 0.0)) < _DET_TOL:
        raise CollinearError("sphere centers are collinear")
    return (t1 * s22 - s12 * t2) / det, (s11 * t2 - s12 * t1) / det


def least_squares_multilaterate(
    spheres: Sequence[SphereConstraint], H: float, L: float, max_iter: int = 100, tol: float = 1e-10
) -> WorldPoint:
    """Range least squares on the slice ``Z = H - L``.

    Minimizes ``sum((|P - c_i| - r_i)^2)`` over (X, Y) with Gauss-Newton,
    starting from the linearized normal-equations solution.
    """
    spheres = [SphereConstraint(WorldPoint(*s.center), float(s.radius)) for s in spheres]
    if len(spheres) < 3:
        raise InsufficientFeaturesError(f"least squares needs >= 3 spheres, got {len(spheres)}")
    _check_slice([s.center for s in spheres], H, L)
    x, y = _normal_equations_seed(spheres)
    z = H - L
    dz2 = [(z - c.z) ** 2 for c, _ in spheres]
    for _ in range(max_iter):
        j11 = j12 = j22 = g1 = g2 = 0.0
        for (c, r), h2 in zip(spheres, dz2):
            dx, dy = x - c.x, y - c.y
            dist = math.sqrt(dx * dx + dy * dy + h2)
            jx, jy = dx / dist, dy / dist
            res = dist - r
            j11 += jx * jx
            j12 += jx * jy
            j22 += jy * jy
            g1 += jx * res
            g2 += jy * res
        det = j11 * j22 - j12 * j12
        if det <= 0.0:
            raise ConvergenceError("singular Gauss-Newton step")
        sx = -(g1 * j22 - j12 * g2) / det
        sy = -(j11 * g2 - j12 * g1) / det
        x += sx
        y += sy
        if math.hypot(sx, sy) < tol:
            return WorldPoint(x, y, z)
    raise ConvergenceError(f"least squares did not converge in {max_iter} iterations")


def localize(
    obs: Iterable[Observation],
    features: FeatureSet,
    k: CameraIntrinsics,
    H: float,
    method: str = "trilaterate",
) -> LocalizationResult:
    """Estimate the camera position from one snapshot of a known luminaire.

    ``trilaterate`` uses the first three observed features; ``least_squares``
    uses all of them. ``residual_rms`` is the RMS range misfit over the
    features the solver used.
    """
    try:
        method = METHOD_ALIASES[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    obs = list(obs)
    matched = _match(obs, features)
    if len(matched) < 3:
        raise InsufficientFeaturesError(f"localization needs >= 3 matched features, got {len(matched)}")
    L = estimate_depth_scale(obs, features, k)
    spheres = [SphereConstraint(p, feature_distance(image_distance(a, k), L, k)) for _, a, p in matched]
    if method == "trilaterate":
        spheres = spheres[:3]
        position = trilaterate_planar(*spheres, H=H, L=L)
    else:
        position = least_squares_multilaterate(spheres, H, L)
    misfit = [(position.distance(c) - r) ** 2 for c, r in spheres]
    return LocalizationResult(position, L, math.sqrt(math.fsum(misfit) / len(misfit)))
