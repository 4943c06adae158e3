"""Distance measures and their geometry.

Two families are supported:

* native metrics, handled directly by the filter-refine pipeline:
  ``Lp`` for any finite p >= 1 and ``LInf`` (componentwise max);
* transform-backed metrics (cosine, angular, 2D Euclidean, Hamming on
  bit strings of length <= 3), which are mapped onto a native pipeline
  by the transforms in :mod:`bvhknn.pipeline`.

Comparisons inside the pipeline use *weights*: the un-rooted sum
sum(|d_i|^p) for Lp and max(|d_i|) for LInf.  Weights are order-isomorphic
to true distances, so sorting by weight sorts by distance; the p-th root
is taken only when distances are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import Point3

KIND_LP = "lp"
KIND_LINF = "linf"
KIND_COSINE = "cosine"
KIND_ANGULAR = "angular"
KIND_EUCLID2D = "euclid2d"
KIND_HAMMING3 = "hamming3"

_TRANSFORM_KINDS = (KIND_COSINE, KIND_ANGULAR, KIND_EUCLID2D, KIND_HAMMING3)


@dataclass(frozen=True, slots=True)
class MetricSpec:
    """A target distance measure. For kind "lp", `p` is the exponent (>= 1)."""

    kind: str
    p: float | None = None

    def __post_init__(self):
        if self.kind == KIND_LP:
            if self.p is None or not math.isfinite(self.p) or self.p < 1:
                raise ValueError(f"lp metric needs finite p >= 1, got {self.p}")
        elif self.kind in (KIND_LINF,) + _TRANSFORM_KINDS:
            if self.p is not None:
                raise ValueError(f"metric {self.kind!r} takes no exponent")
        else:
            raise ValueError(f"unknown metric kind {self.kind!r}")

    @classmethod
    def lp(cls, p: float) -> "MetricSpec":
        return cls(KIND_LP, float(p))

    @classmethod
    def linf(cls) -> "MetricSpec":
        return cls(KIND_LINF)

    @classmethod
    def cosine(cls) -> "MetricSpec":
        return cls(KIND_COSINE)

    @classmethod
    def angular(cls) -> "MetricSpec":
        return cls(KIND_ANGULAR)

    @classmethod
    def euclid2d(cls) -> "MetricSpec":
        return cls(KIND_EUCLID2D)

    @classmethod
    def hamming3(cls) -> "MetricSpec":
        return cls(KIND_HAMMING3)

    @property
    def is_native(self) -> bool:
        """True for metrics the filter-refine pipeline runs directly."""
        return self.kind in (KIND_LP, KIND_LINF)

    @property
    def is_transform_backed(self) -> bool:
        return self.kind in _TRANSFORM_KINDS

    def canonical(self) -> str:
        """Canonical string form, e.g. "lp:2", "linf", "cosine"."""
        if self.kind == KIND_LP:
            p = self.p
            return f"lp:{int(p)}" if float(p).is_integer() else f"lp:{p}"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "MetricSpec":
        """Parse the canonical string form (inverse of :meth:`canonical`)."""
        s = text.strip().lower()
        if s.startswith("lp:"):
            try:
                p = float(s[3:])
            except ValueError:
                raise ValueError(f"bad lp exponent in metric {text!r}") from None
            return cls.lp(p)
        if s in (KIND_LINF,) + _TRANSFORM_KINDS:
            return cls(s)
        raise ValueError(f"unknown metric {text!r}")


def lp_weight(a: Point3, b: Point3, p: float) -> float:
    """Un-rooted Lp weight sum(|a_i - b_i|^p); compare against r**p."""
    if not math.isfinite(p) or p < 1:
        raise ValueError(f"p must be finite and >= 1, got {p}")
    if p == 1.0:
        return abs(a.x - b.x) + abs(a.y - b.y) + abs(a.z - b.z)
    if p == 2.0:
        dx = a.x - b.x
        dy = a.y - b.y
        dz = a.z - b.z
        return dx * dx + dy * dy + dz * dz
    return abs(a.x - b.x) ** p + abs(a.y - b.y) ** p + abs(a.z - b.z) ** p


def linf_weight(a: Point3, b: Point3) -> float:
    """Chebyshev weight max(|a_i - b_i|); already in distance units."""
    return max(abs(a.x - b.x), abs(a.y - b.y), abs(a.z - b.z))


def weight_threshold(metric: MetricSpec, r: float) -> float:
    """Weight value equivalent to distance r: r**p for Lp, r for LInf."""
    if metric.kind == KIND_LP:
        return r ** metric.p
    if metric.kind == KIND_LINF:
        return r
    raise ValueError(f"no native weight for metric {metric.canonical()!r}")


def metric_weight(a: Point3, b: Point3, metric: MetricSpec) -> float:
    """Weight between two points under a native metric."""
    if metric.kind == KIND_LP:
        return lp_weight(a, b, metric.p)
    if metric.kind == KIND_LINF:
        return linf_weight(a, b)
    raise ValueError(f"no native weight for metric {metric.canonical()!r}")


def make_weight(metric: MetricSpec):
    """Specialized (a, b) -> weight closure for hot loops (no revalidation)."""
    if metric.kind == KIND_LINF:
        return linf_weight
    if metric.kind != KIND_LP:
        raise ValueError(f"no native weight for metric {metric.canonical()!r}")
    p = metric.p
    if p == 1.0:
        return lambda a, b: abs(a.x - b.x) + abs(a.y - b.y) + abs(a.z - b.z)
    if p == 2.0:
        def sq(a: Point3, b: Point3) -> float:
            dx = a.x - b.x
            dy = a.y - b.y
            dz = a.z - b.z
            return dx * dx + dy * dy + dz * dz

        return sq
    return lambda a, b: abs(a.x - b.x) ** p + abs(a.y - b.y) ** p + abs(a.z - b.z) ** p


def inclusion_radius(metric: MetricSpec, r: float, d: int = 3) -> float:
    """Tight L2 radius f(r) whose ball contains the metric ball of radius r.

    Every point within distance r of a center under `metric` lies within
    L2 distance f(r) of it:

    * 1 <= p <= 2: f(r) = r (the L2 sphere circumscribes these balls);
    * p > 2:       f(r) = r * d**(1/2 - 1/p), attained on the diagonal;
    * LInf:        f(r) = r * sqrt(d), the corner of the cube.

    No finite f exists for the transform-backed metrics, so they are
    rejected; resolve them to a native pipeline metric first.
    """
    if not metric.is_native:
        raise ValueError(
            f"metric {metric.canonical()!r} has no L2 inclusion radius; "
            "apply its transform and query in the range space instead"
        )
    if not (r > 0) or not math.isfinite(r):
        raise ValueError(f"radius must be finite and > 0, got {r}")
    if d not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {d}")
    if metric.kind == KIND_LINF:
        return r * math.sqrt(d)
    if metric.p <= 2:
        return r
    return r * d ** (0.5 - 1.0 / metric.p)


def in_lp_ball(q: Point3, center: Point3, metric: MetricSpec, r: float) -> bool:
    """True iff q lies in the closed metric ball of radius r around center.

    This is the membership test behind the user-filter geometries: sphere
    (p=2), square bi-pyramid (p=1), cube (LInf), and the surfaces between.
    """
    if not metric.is_native:
        raise ValueError(f"metric {metric.canonical()!r} has no ball geometry")
    if not (r > 0):
        raise ValueError(f"radius must be > 0, got {r}")
    return metric_weight(q, center, metric) <= weight_threshold(metric, r)
