"""Filter-refine k-NN queries on top of the BVH containment engine.

A query runs in up to three narrowing stages, each of which only discards
points:

1. hardware filter: the BVH reports every primitive box containing the
   query point (one any-hit callback per box);
2. pre-filters: the plain pipeline additionally drops hits outside the L2
   sphere of the circumscribing radius, then both pipelines apply the
   target-metric ball test (weight <= threshold);
3. refine: survivors feed a bounded heap keeping the k smallest
   (weight, id) pairs.

The plain and enhanced pipelines differ only in scene box size and in the
sphere pre-filter; their neighbor lists are always identical.  Metrics
without a finite circumscribing L2 radius (cosine, angular, 2D Euclidean,
Hamming) are handled by mapping the points through an order-preserving
transformation first and running a native pipeline in the mapped space.

Indexes are immutable after build and queries share them read-only; each
query owns its heap and counters, so query fan-out across workers is safe.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass

import numpy as np

from .bvh import (
    DEFAULT_LEAF_SIZE,
    Bvh,
    TraversalCounters,
    build_point_bvh,
    traverse_point,
)
from .geometry import Point3, PointQuery, as_point3
from .metrics import (
    KIND_ANGULAR,
    KIND_COSINE,
    KIND_EUCLID2D,
    KIND_HAMMING3,
    KIND_LINF,
    MetricSpec,
    inclusion_radius,
    make_weight,
    weight_threshold,
)


@dataclass(frozen=True, slots=True)
class ReductionConfig:
    """How to run a search: target metric, radius, k, and pipeline knobs.

    `r` is the search radius in target-metric units (for transform-backed
    metrics: in the mapped space, e.g. chord length for cosine/angular).
    `enhanced` selects the tighter scene geometry; it changes filtering
    cost, never results.
    """

    metric: MetricSpec
    r: float
    k: int
    enhanced: bool = False
    leaf_size: int = DEFAULT_LEAF_SIZE

    def __post_init__(self):
        if not math.isfinite(self.r) or self.r <= 0:
            raise ValueError(f"radius must be finite and > 0, got {self.r}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.leaf_size < 1:
            raise ValueError(f"leaf_size must be >= 1, got {self.leaf_size}")


class NeighborHeap:
    """Bounded collector of the k smallest (weight, id) candidates.

    Ties on weight keep the smaller id, regardless of insertion order.
    """

    __slots__ = ("k", "_heap")

    def __init__(self, k: int):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.k = k
        self._heap: list[tuple[float, int]] = []  # (-weight, -id), max on top

    def __len__(self) -> int:
        return len(self._heap)

    @property
    def worst_weight(self) -> float:
        """Largest kept weight; +inf while the heap is not yet full."""
        if len(self._heap) < self.k:
            return math.inf
        return -self._heap[0][0]

    def insert(self, id: int, weight: float) -> bool:
        """Offer a candidate; returns True if it was kept."""
        entry = (-weight, -id)
        if len(self._heap) < self.k:
            heapq.heappush(self._heap, entry)
            return True
        if entry > self._heap[0]:
            heapq.heapreplace(self._heap, entry)
            return True
        return False

    def items(self) -> list[tuple[int, float]]:
        """Kept (id, weight) pairs, ascending by (weight, id)."""
        return [(-ni, -nw) for nw, ni in sorted(self._heap, reverse=True)]


@dataclass(frozen=True, slots=True)
class QueryResult:
    """Outcome of one query.

    `neighbors` holds up to k (id, distance) pairs in target-metric units,
    ordered by increasing distance (ids break ties).  For the cosine metric
    the reported value is the similarity, so it decreases down the list;
    the ordering key is still the ascending angle.  The counts trace the
    filter chain: hit_count >= candidate_count >= len(neighbors).
    """

    neighbors: list[tuple[int, float]]
    candidate_count: int
    hit_count: int
    node_visits: int = 0

    def ids(self) -> list[int]:
        return [i for i, _ in self.neighbors]


def scene_half_width(config: ReductionConfig, d: int = 3) -> float:
    """Half width of the per-point scene boxes for this configuration.

    Plain pipeline: the circumscribing L2 radius f(r), so the box always
    covers the sphere pre-filter.  Enhanced pipeline: r itself, because a
    metric ball of radius r extends exactly r along each axis.
    """
    if not config.metric.is_native:
        # force the same rejection as the plain path
        inclusion_radius(config.metric, config.r, d)
    if config.enhanced:
        return config.r
    return inclusion_radius(config.metric, config.r, d)


def build_index(points, config: ReductionConfig, dimension: int = 3) -> Bvh:
    """Build the BVH scene for `points` under `config` (boxes sized to match)."""
    half_width = scene_half_width(config, dimension)
    return build_point_bvh(points, half_width, config.leaf_size)


def _report_distance(metric: MetricSpec, weight: float) -> float:
    if metric.kind == KIND_LINF:
        return weight
    p = metric.p
    if p == 1.0:
        return weight
    if p == 2.0:
        return math.sqrt(weight)
    return weight ** (1.0 / p)


def _run_native(bvh, points, q, config, dimension, sphere_prefilter):
    if not config.metric.is_native:
        raise ValueError(
            f"pipeline queries need a native metric, got {config.metric.canonical()!r}; "
            "use transformed_query for transform-backed metrics"
        )
    n = len(points)
    if bvh.num_primitives != n:
        raise ValueError(f"index holds {bvh.num_primitives} primitives but dataset has {n}")
    qp = as_point3(q)
    weight_fn = make_weight(config.metric)
    threshold = weight_threshold(config.metric, config.r)
    heap = NeighborHeap(config.k)
    candidates = 0

    if sphere_prefilter:
        r_prime = inclusion_radius(config.metric, config.r, dimension)
        r_prime_sq = r_prime * r_prime
        qx, qy, qz = qp.x, qp.y, qp.z

        def anyhit(hit):
            nonlocal candidates
            c = hit.center
            dx = c.x - qx
            dy = c.y - qy
            dz = c.z - qz
            if dx * dx + dy * dy + dz * dz > r_prime_sq:
                return None
            w = weight_fn(qp, c)
            if w <= threshold:
                candidates += 1
                heap.insert(hit.id, w)
            return None

    else:

        def anyhit(hit):
            nonlocal candidates
            w = weight_fn(qp, hit.center)
            if w <= threshold:
                candidates += 1
                heap.insert(hit.id, w)
            return None

    counters = TraversalCounters()
    hits = traverse_point(bvh, PointQuery(qp), anyhit, counters)
    neighbors = [(i, _report_distance(config.metric, w)) for i, w in heap.items()]
    return QueryResult(neighbors, candidates, hits, counters.nodes_tested)


def filter_refine_query(bvh: Bvh, points, q, config: ReductionConfig, dimension: int = 3) -> QueryResult:
    """Plain pipeline: hardware filter, sphere pre-filter, metric-ball filter, refine.

    The index must have been built with the plain (enhanced=False) scene
    half width for this config.
    """
    if config.enhanced:
        raise ValueError("config.enhanced is set; use enhanced_query")
    return _run_native(bvh, points, q, config, dimension, sphere_prefilter=True)


def enhanced_query(bvh: Bvh, points, q, config: ReductionConfig, dimension: int = 3) -> QueryResult:
    """Tight-geometry pipeline: no sphere pre-filter, scene boxes of half width r.

    For LInf the metric-ball filter coincides with the box itself, so every
    hardware hit is already a candidate; the weight is still computed to
    drive refinement.  Results always equal the plain pipeline's.
    """
    if not config.enhanced:
        raise ValueError("config.enhanced is not set; use filter_refine_query")
    return _run_native(bvh, points, q, config, dimension, sphere_prefilter=False)


def run_query(bvh: Bvh, points, q, config: ReductionConfig, dimension: int = 3) -> QueryResult:
    """Dispatch to the plain or enhanced pipeline per config.enhanced."""
    if config.enhanced:
        return enhanced_query(bvh, points, q, config, dimension)
    return filter_refine_query(bvh, points, q, config, dimension)


def batch_query(bvh: Bvh, points, queries, config: ReductionConfig, dimension: int = 3) -> list[QueryResult]:
    """Run one query per row of `queries` (each query is independent)."""
    return [run_query(bvh, points, q, config, dimension) for q in np.asarray(queries, dtype=np.float64)]


# ---------------------------------------------------------------------------
# Order-preserving transformations


class Transform(enum.Enum):
    """Point mappings whose images preserve source-metric distance order in L2."""

    NORMALIZE = "normalize"
    EMBED_2D = "embed2d"
    HAMMING_VERTEX = "hamming_vertex"


def apply_transform(t: Transform, p) -> Point3:
    """Map one input through a transform.

    NORMALIZE takes a nonzero 3-vector to the unit sphere; EMBED_2D lifts
    (x, y) to (x, y, 0); HAMMING_VERTEX takes a bit string of length <= 3
    (left-padded with zeros) to the matching unit-cube vertex.
    """
    if t is Transform.NORMALIZE:
        v = as_point3(p)
        norm = math.sqrt(v.x * v.x + v.y * v.y + v.z * v.z)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Point3(v.x / norm, v.y / norm, v.z / norm)
    if t is Transform.EMBED_2D:
        x, y = p
        return Point3(float(x), float(y), 0.0)
    if t is Transform.HAMMING_VERTEX:
        return Point3(*_parse_bits(p))
    raise ValueError(f"unknown transform {t!r}")


def _parse_bits(s) -> tuple[float, float, float]:
    if not isinstance(s, str) or not 1 <= len(s) <= 3 or set(s) - {"0", "1"}:
        raise ValueError(f"expected a bit string of length 1..3, got {s!r}")
    padded = s.zfill(3)
    return (float(padded[0]), float(padded[1]), float(padded[2]))


def transform_points(chain: list[Transform], points, label: str = "point") -> np.ndarray:
    """Apply a transform chain to a whole collection, returning an (n, 3) array.

    Rejects inputs a transform cannot accept, naming the offending row
    (e.g. the index of a zero vector under NORMALIZE).
    """
    current = points
    for t in chain:
        if t is Transform.NORMALIZE:
            arr = np.asarray(current, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 3:
                raise ValueError(f"normalize expects (n, 3) input, got shape {arr.shape}")
            norms = np.sqrt((arr * arr).sum(axis=1))
            zero = np.flatnonzero(norms == 0.0)
            if zero.size:
                raise ValueError(f"cannot normalize zero vector at {label} index {zero[0]}")
            current = arr / norms[:, None]
        elif t is Transform.EMBED_2D:
            arr = np.asarray(current, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise ValueError(f"embed2d expects (n, 2) input, got shape {arr.shape}")
            current = np.hstack([arr, np.zeros((arr.shape[0], 1))])
        elif t is Transform.HAMMING_VERTEX:
            if len(current) and isinstance(current[0], str):
                rows = []
                for i, s in enumerate(current):
                    try:
                        rows.append(_parse_bits(s))
                    except ValueError as exc:
                        raise ValueError(f"{label} index {i}: {exc}") from None
                current = np.asarray(rows, dtype=np.float64)
            else:
                arr = np.asarray(current, dtype=np.float64)
                if arr.ndim != 2 or arr.shape[1] != 3 or not np.isin(arr, (0.0, 1.0)).all():
                    raise ValueError("hamming input must be bit strings or 0/1 vertex rows")
                current = arr
        else:
            raise ValueError(f"unknown transform {t!r}")
    out = np.asarray(current, dtype=np.float64)
    if out.ndim != 2 or out.shape[1] != 3:
        raise ValueError(f"transform chain must end in 3D points, got shape {out.shape}")
    return out


def transform_chain_for(source: MetricSpec) -> list[Transform]:
    """The built-in transform chain that realizes a transform-backed metric."""
    chains = {
        KIND_COSINE: [Transform.NORMALIZE],
        KIND_ANGULAR: [Transform.NORMALIZE],
        KIND_EUCLID2D: [Transform.EMBED_2D],
        KIND_HAMMING3: [Transform.HAMMING_VERTEX],
    }
    if source.kind not in chains:
        raise ValueError(f"metric {source.canonical()!r} is not transform-backed")
    return chains[source.kind]


def pipeline_metric_for(source: MetricSpec) -> MetricSpec:
    """Native metric the mapped space is searched with (L2, or L1 for Hamming)."""
    if source.kind == KIND_HAMMING3:
        return MetricSpec.lp(1)
    if source.kind in (KIND_COSINE, KIND_ANGULAR, KIND_EUCLID2D):
        return MetricSpec.lp(2)
    raise ValueError(f"metric {source.canonical()!r} is not transform-backed")


def _source_distance(source: MetricSpec, weight: float) -> float:
    """Re-express a range-space weight in source-metric units."""
    if source.kind == KIND_ANGULAR:
        # weight is the squared chord between unit vectors
        return 2.0 * math.asin(min(1.0, math.sqrt(weight) / 2.0))
    if source.kind == KIND_COSINE:
        return 1.0 - weight / 2.0  # similarity, not a distance
    if source.kind == KIND_EUCLID2D:
        return math.sqrt(weight)
    if source.kind == KIND_HAMMING3:
        return weight
    raise ValueError(f"metric {source.canonical()!r} is not transform-backed")


def to_source_units(source: MetricSpec, pipeline_metric: MetricSpec, res: QueryResult) -> QueryResult:
    """Re-express a range-space result's distances in source-metric units."""
    neighbors = []
    for i, dist in res.neighbors:
        w = dist * dist if pipeline_metric.p == 2.0 else dist
        neighbors.append((i, _source_distance(source, w)))
    return QueryResult(neighbors, res.candidate_count, res.hit_count, res.node_visits)


def transformed_query(data, queries, source: MetricSpec, config: ReductionConfig) -> list[QueryResult]:
    """Search a transform-backed metric by mapping into its range space.

    `data` and `queries` are given in source form: (n, 3) vectors for
    cosine/angular, (n, 2) points for the 2D metric, and bit strings (or
    pre-mapped 0/1 vertex rows) for Hamming.  `config.metric` must be the
    range-space pipeline metric (see :func:`pipeline_metric_for`) and
    `config.r` is a range-space radius.  Reported distances are converted
    back to source units; ordering follows ascending source distance
    (for cosine: ascending angle, i.e. descending similarity).
    """
    if not source.is_transform_backed:
        raise ValueError(f"metric {source.canonical()!r} is not transform-backed")
    expected = pipeline_metric_for(source)
    if config.metric != expected:
        raise ValueError(
            f"config.metric must be the pipeline metric {expected.canonical()!r} "
            f"for source {source.canonical()!r}, got {config.metric.canonical()!r}"
        )
    chain = transform_chain_for(source)
    data3 = transform_points(chain, data, label="data")
    queries3 = transform_points(chain, queries, label="query")
    dimension = 2 if source.kind == KIND_EUCLID2D else 3
    bvh = build_index(data3, config, dimension)
    out = []
    for row in queries3:
        res = run_query(bvh, data3, row, config, dimension)
        out.append(to_source_units(source, expected, res))
    return out


def knn_search(data, queries, metric: MetricSpec, r: float, k: int,
               enhanced: bool = False, leaf_size: int = DEFAULT_LEAF_SIZE) -> list[QueryResult]:
    """One-call search: builds the scene and runs every query.

    Routes native metrics straight into the filter-refine pipeline and
    transform-backed ones through their mapping.
    """
    if metric.is_native:
        config = ReductionConfig(metric, r, k, enhanced, leaf_size)
        pts = np.asarray(data, dtype=np.float64)
        bvh = build_index(pts, config)
        return batch_query(bvh, pts, queries, config)
    config = ReductionConfig(pipeline_metric_for(metric), r, k, enhanced, leaf_size)
    return transformed_query(data, queries, metric, config)
