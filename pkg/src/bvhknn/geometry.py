"""Points, axis-aligned boxes, and containment tests.

Everything here is an immutable value with pure operations, so instances
can be shared freely across concurrent query workers.  Boxes are closed:
a point sitting exactly on a face counts as contained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class Point3:
    """A point (or vector) in 3D space. Coordinates must be finite."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite coordinates: ({self.x}, {self.y}, {self.z})")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


def as_point3(p) -> Point3:
    """Coerce a Point3 or any (x, y, z) sequence to Point3."""
    if isinstance(p, Point3):
        return p
    x, y, z = p
    return Point3(float(x), float(y), float(z))


@dataclass(frozen=True, slots=True)
class Aabb:
    """Closed axis-aligned box [min, max]; zero-width boxes are allowed."""

    min: Point3
    max: Point3

    def __post_init__(self):
        if self.min.x > self.max.x or self.min.y > self.max.y or self.min.z > self.max.z:
            raise ValueError(f"inverted box: min={self.min} max={self.max}")


@dataclass(frozen=True, slots=True)
class PointQuery:
    """A query against the scene, reduced to pure point containment.

    Hardware rays of infinitesimal length report every box containing their
    origin regardless of direction, so no direction field is needed.
    """

    origin: Point3


def aabb_around(center: Point3, half_width: float) -> Aabb:
    """Cube of side 2*half_width centered on `center`."""
    if not math.isfinite(half_width) or half_width < 0:
        raise ValueError(f"half_width must be finite and >= 0, got {half_width}")
    c = as_point3(center)
    h = float(half_width)
    return Aabb(
        Point3(c.x - h, c.y - h, c.z - h),
        Point3(c.x + h, c.y + h, c.z + h),
    )


def aabb_contains(box: Aabb, p: Point3) -> bool:
    """True iff min <= p <= max componentwise (boundary inclusive)."""
    return (
        box.min.x <= p.x <= box.max.x
        and box.min.y <= p.y <= box.max.y
        and box.min.z <= p.z <= box.max.z
    )


def l2_distance(a: Point3, b: Point3) -> float:
    """Euclidean distance between two points."""
    dx = a.x - b.x
    dy = a.y - b.y
    dz = a.z - b.z
    return math.sqrt(dx * dx + dy * dy + dz * dz)
