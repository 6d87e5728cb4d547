"""Room frame, transmitter model and feature points.

World frame: right-handed, origin at a floor corner, z up. The ceiling (and the
transmitter) lies in the plane ``z = room.height``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence, Union

import numpy as np

from .exceptions import ConfigError, GeometryError

_COLLINEAR_AREA = 1e-12


class WorldPoint(NamedTuple):
    """Position in the room frame, meters."""

    x: float
    y: float
    z: float

    def translated(self, v: Sequence[float]) -> "WorldPoint":
        return WorldPoint(self.x + v[0], self.y + v[1], self.z + v[2])

    def distance(self, other: Sequence[float]) -> float:
        return math.dist(self, other)

    def xy_distance(self, other: Sequence[float]) -> float:
        return math.hypot(self.x - other[0], self.y - other[1])

    def check_finite(self) -> "WorldPoint":
        if not all(math.isfinite(c) for c in self):
            raise ConfigError(f"non-finite coordinate in {self}")
        return self


@dataclass(frozen=True)
class RoomConfig:
    width_x: float
    length_y: float
    height: float

    def __post_init__(self):
        for name in ("width_x", "length_y", "height"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"room {name} must be > 0, got {value}")


@dataclass(frozen=True)
class Rectangle:
    width_x: float
    length_y: float

    def __post_init__(self):
        if not (self.width_x > 0 and self.length_y > 0):
            raise ConfigError("rectangle dimensions must be > 0")

    @property
    def half_extent(self) -> tuple[float, float]:
        return self.width_x / 2, self.length_y / 2


@dataclass(frozen=True)
class Circle:
    diameter: float

    def __post_init__(self):
        if not self.diameter > 0:
            raise ConfigError("circle diameter must be > 0")

    @property
    def half_extent(self) -> tuple[float, float]:
        return self.diameter / 2, self.diameter / 2


Shape = Union[Rectangle, Circle]


@dataclass(frozen=True)
class TransmitterModel:
    """A shaped luminaire on the ceiling, identified by ``id``, centered at ``center``."""

    id: str
    center: WorldPoint
    shape: Shape

    def __post_init__(self):
        object.__setattr__(self, "center", WorldPoint(*map(float, self.center)).check_finite())
        if not isinstance(self.shape, (Rectangle, Circle)):
            raise ConfigError(f"unsupported transmitter shape {self.shape!r}")

    def check_in_room(self, room: RoomConfig, tol: float = 1e-9) -> None:
        """Raise ``ConfigError`` unless the footprint sits on the ceiling of ``room``."""
        if abs(self.center.z - room.height) > tol:
            raise ConfigError(
                f"transmitter z={self.center.z} is not on the ceiling z={room.height}"
            )
        hx, hy = self.shape.half_extent
        cx, cy = self.center.x, self.center.y
        if cx - hx < -tol or cy - hy < -tol or cx + hx > room.width_x + tol or cy + hy > room.length_y + tol:
            raise ConfigError("transmitter footprint extends past the ceiling")


class FeatureSet:
    """Ordered, labeled luminaire points used as range anchors.

    The first three points are the trilateration anchors; any further points
    (typically the center ``E``) only feed the depth-scale and least-squares
    estimates.
    """

    def __init__(self, items: Sequence[tuple[str, Sequence[float]]]):
        items = [(str(label), WorldPoint(*map(float, p)).check_finite()) for label, p in items]
        if len(items) < 3:
            raise GeometryError("a feature set needs at least 3 points")
        labels = [label for label, _ in items]
        if len(set(labels)) != len(labels):
            raise GeometryError(f"duplicate feature labels in {labels}")
        for i, (_, p) in enumerate(items):
            for _, q in items[i + 1 :]:
                if p.distance(q) <= 0.0:
                    raise GeometryError(f"coincident feature points at {p}")
        heights = {p.z for _, p in items}
        if max(heights) - min(heights) > 1e-9:
            raise GeometryError("feature points must share the transmitter plane")
        a, b, c = (p for _, p in items[:3])
        if abs(triangle_area(a, b, c)) <= _COLLINEAR_AREA:
            raise GeometryError("the first three feature points are collinear")
        self._items = tuple(items)
        self._index = dict(items)

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self._items]

    @property
    def height(self) -> float:
        return self._items[0][1].z

    def __getitem__(self, label: str) -> WorldPoint:
        return self._index[label]

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def __iter__(self) -> Iterator[tuple[str, WorldPoint]]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FeatureSet) and self._items == other._items

    def __repr__(self) -> str:
        body = ", ".join(f"{label}={tuple(p)}" for label, p in self._items)
        return f"FeatureSet({body})"


def triangle_area(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> float:
    """Signed area of the xy-projection of triangle abc."""
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))


def virtual_point_grid(t: TransmitterModel, nx: int, ny: int) -> list[WorldPoint]:
    """Discretize the transmitter footprint into evenly spaced points.

    The grid spans the bounding box inclusive of its boundary, so a 2x2 grid on
    a rectangle returns its corners. For a circle the bounding-square grid is
    filtered down to the closed disk.
    """
    if nx < 2 or ny < 2:
        raise GeometryError(f"virtual point grid needs nx, ny >= 2, got {nx}x{ny}")
    hx, hy = t.shape.half_extent
    cx, cy, cz = t.center
    # offsets built symmetric about zero so the grid centroid is exactly E
    ox = (np.arange(nx) - (nx - 1) / 2) * (2 * hx / (nx - 1))
    oy = (np.arange(ny) - (ny - 1) / 2) * (2 * hy / (ny - 1))
    points = []
    for dx in ox:
        for dy in oy:
            if isinstance(t.shape, Circle) and math.hypot(dx, dy) > hx * (1 + 1e-12):
                continue
            points.append(WorldPoint(cx + float(dx), cy + float(dy), cz))
    return points


def default_features(t: TransmitterModel) -> FeatureSet:
    """Anchor points A, B, C (plus the center E) for ``t``.

    Rectangles use three corners: A at min-x/min-y, B at max-x/min-y, C at
    min-x/max-y. Circles use rim points at 90, 210 and 330 degrees.
    """
    cx, cy, cz = t.center
    if isinstance(t.shape, Rectangle):
        hx, hy = t.shape.half_extent
        anchors = [
            ("A", (cx - hx, cy - hy, cz)),
            ("B", (cx + hx, cy - hy, cz)),
            ("C", (cx - hx, cy + hy, cz)),
        ]
    else:
        r = t.shape.diameter / 2
        anchors = [
            (label, (cx + r * math.cos(math.radians(deg)), cy + r * math.sin(math.radians(deg)), cz))
            for label, deg in zip("ABC", (90.0, 210.0, 330.0))
        ]
    return FeatureSet(anchors + [("E", (cx, cy, cz))])


PAPER_ROOM = RoomConfig(3.0, 3.0, 5.0)
PAPER_TRANSMITTER = TransmitterModel("LED-1", WorldPoint(1.5, 1.5, 5.0), Rectangle(1.0, 1.0))
