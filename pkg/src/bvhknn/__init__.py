"""Generalized k-nearest-neighbor search over a BVH containment pipeline.

The library answers k-NN queries under Lp norms (any finite p >= 1),
Chebyshev distance, and, via order-preserving point transformations,
cosine/angular similarity, 2D Euclidean distance, and Hamming distance
on short bit strings.  Filtering runs on an emulated accelerator: one
axis-aligned box per data point, indexed by a BVH, queried by point
containment with any-hit callbacks, then refined exactly.
"""

from .geometry import Aabb, Point3, PointQuery, aabb_around, aabb_contains, l2_distance
from .metrics import (
    MetricSpec,
    in_lp_ball,
    inclusion_radius,
    linf_weight,
    lp_weight,
)
from .bvh import (
    Bvh,
    HitRecord,
    Primitive,
    TraversalCounters,
    Verdict,
    build_bvh,
    build_point_bvh,
    containment_scan,
    node_visits,
    primitives_from_points,
    traverse_point,
)
from .pipeline import (
    NeighborHeap,
    QueryResult,
    ReductionConfig,
    Transform,
    apply_transform,
    batch_query,
    build_index,
    enhanced_query,
    filter_refine_query,
    knn_search,
    pipeline_metric_for,
    run_query,
    scene_half_width,
    transform_chain_for,
    transform_points,
    transformed_query,
)
from .oracle import GroundTruth, aggregate_recall, brute_force_knn, ground_truth, recall
from .datasets import DatasetFile, load_dataset, read_records, synthetic_points
from .experiments import Dataset, run_experiment, sweep

__version__ = "0.1.0"

__all__ = [
    "Aabb",
    "Bvh",
    "Dataset",
    "DatasetFile",
    "GroundTruth",
    "HitRecord",
    "MetricSpec",
    "NeighborHeap",
    "Point3",
    "PointQuery",
    "Primitive",
    "QueryResult",
    "ReductionConfig",
    "Transform",
    "TraversalCounters",
    "Verdict",
    "aabb_around",
    "aabb_contains",
    "aggregate_recall",
    "apply_transform",
    "batch_query",
    "brute_force_knn",
    "build_bvh",
    "build_index",
    "build_point_bvh",
    "containment_scan",
    "enhanced_query",
    "filter_refine_query",
    "ground_truth",
    "in_lp_ball",
    "inclusion_radius",
    "knn_search",
    "l2_distance",
    "linf_weight",
    "load_dataset",
    "lp_weight",
    "node_visits",
    "pipeline_metric_for",
    "primitives_from_points",
    "read_records",
    "recall",
    "run_experiment",
    "run_query",
    "scene_half_width",
    "sweep",
    "synthetic_points",
    "transform_chain_for",
    "transform_points",
    "transformed_query",
    "traverse_point",
]
