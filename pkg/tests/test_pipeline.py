import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bvhknn import (
    MetricSpec,
    NeighborHeap,
    Point3,
    ReductionConfig,
    Transform,
    apply_transform,
    batch_query,
    brute_force_knn,
    build_index,
    enhanced_query,
    filter_refine_query,
    knn_search,
    pipeline_metric_for,
    scene_half_width,
    transform_chain_for,
    transform_points,
    transformed_query,
)

L1 = MetricSpec.lp(1)
L2 = MetricSpec.lp(2)
L3 = MetricSpec.lp(3)
LINF = MetricSpec.linf()


# --- NeighborHeap -----------------------------------------------------------

def test_heap_basics():
    h = NeighborHeap(2)
    assert h.worst_weight == math.inf
    h.insert(3, 0.5)
    h.insert(1, 0.2)
    h.insert(2, 0.9)  # rejected, heap full with better entries
    assert h.items() == [(1, 0.2), (3, 0.5)]
    assert h.worst_weight == 0.5


def test_heap_tie_keeps_smaller_id():
    h = NeighborHeap(2)
    for i in (2, 1, 0):  # arrival order is not id order
        h.insert(i, 1.0)
    assert h.items() == [(0, 1.0), (1, 1.0)]


def test_heap_rejects_bad_k():
    with pytest.raises(ValueError):
        NeighborHeap(0)


@given(
    st.lists(st.tuples(st.integers(0, 50), st.floats(0, 100, allow_nan=False)), min_size=0, max_size=60),
    st.integers(1, 8),
)
@settings(deadline=None)
def test_heap_matches_sorted_oracle(entries, k):
    h = NeighborHeap(k)
    for i, w in entries:
        h.insert(i, w)
    expected = sorted(((w, i) for i, w in entries))[:k]
    assert h.items() == [(i, w) for w, i in expected]
    if len(entries) >= k and expected:
        assert h.worst_weight == expected[-1][0]


# --- scene geometry ---------------------------------------------------------

def test_scene_half_width_values():
    assert scene_half_width(ReductionConfig(LINF, 1.0, 1)) == math.sqrt(3)
    assert scene_half_width(ReductionConfig(LINF, 1.0, 1, enhanced=True)) == 1.0
    assert scene_half_width(ReductionConfig(L1, 2.0, 1)) == 2.0
    assert scene_half_width(ReductionConfig(L1, 2.0, 1, enhanced=True)) == 2.0
    assert scene_half_width(ReductionConfig(LINF, 1.0, 1), d=2) == math.sqrt(2)


def test_scene_half_width_rejects_transform_metric():
    with pytest.raises(ValueError):
        scene_half_width(ReductionConfig(MetricSpec.cosine(), 1.0, 1))
    with pytest.raises(ValueError):
        scene_half_width(ReductionConfig(MetricSpec.cosine(), 1.0, 1, enhanced=True))


def test_config_validation():
    with pytest.raises(ValueError):
        ReductionConfig(L1, 0.0, 1)
    with pytest.raises(ValueError):
        ReductionConfig(L1, 1.0, 0)
    with pytest.raises(ValueError):
        ReductionConfig(L1, 1.0, 1, leaf_size=0)


# --- filter-refine pipelines ------------------------------------------------

def test_plain_three_point_l1():
    pts = np.array([[0, 0, 0], [1, 0, 0], [3, 0, 0]], float)
    cfg = ReductionConfig(L1, 1.0, 2)
    bvh = build_index(pts, cfg)
    res = filter_refine_query(bvh, pts, [0.4, 0, 0], cfg)
    assert res.neighbors == [(0, pytest.approx(0.4)), (1, pytest.approx(0.6))]
    assert res.hit_count >= res.candidate_count >= len(res.neighbors)


def test_plain_linf_sphere_prefilter_admits_corner():
    # r' = sqrt(3) lets the corner point through although its L2 > 1
    pts = np.array([[0.9, 0.9, 0.9]])
    cfg = ReductionConfig(LINF, 1.0, 1)
    bvh = build_index(pts, cfg)
    res = filter_refine_query(bvh, pts, [0, 0, 0], cfg)
    assert res.neighbors == [(0, pytest.approx(0.9))]


def test_enhanced_equals_plain_on_three_point_scene():
    pts = np.array([[0, 0, 0], [1, 0, 0], [3, 0, 0]], float)
    plain_cfg = ReductionConfig(L1, 1.0, 2)
    enh_cfg = ReductionConfig(L1, 1.0, 2, enhanced=True)
    plain = filter_refine_query(build_index(pts, plain_cfg), pts, [0.4, 0, 0], plain_cfg)
    enh = enhanced_query(build_index(pts, enh_cfg), pts, [0.4, 0, 0], enh_cfg)
    assert plain.neighbors == enh.neighbors


def test_enhanced_linf_excludes_point_outside_box():
    pts = np.array([[0.9, 0.9, 0.9], [1.1, 0, 0]])
    cfg = ReductionConfig(LINF, 1.0, 2, enhanced=True)
    bvh = build_index(pts, cfg)
    res = enhanced_query(bvh, pts, [0, 0, 0], cfg)
    assert res.neighbors == [(0, pytest.approx(0.9))]
    assert res.hit_count == 1  # the second box does not contain the origin


def test_pipeline_flag_mismatch_rejected():
    pts = np.zeros((1, 3))
    cfg = ReductionConfig(L1, 1.0, 1)
    bvh = build_index(pts, cfg)
    with pytest.raises(ValueError):
        enhanced_query(bvh, pts, [0, 0, 0], cfg)
    with pytest.raises(ValueError):
        filter_refine_query(bvh, pts, [0, 0, 0], ReductionConfig(L1, 1.0, 1, enhanced=True))


def test_fewer_than_k_in_range_returns_short_list():
    pts = np.array([[0, 0, 0], [5, 5, 5]], float)
    res = knn_search(pts, [[0.1, 0, 0]], L2, r=1.0, k=10)[0]
    assert res.ids() == [0]


@pytest.mark.parametrize("metric", [L1, L2, L3, LINF])
@pytest.mark.parametrize("enhanced", [False, True])
def test_matches_brute_force_within_radius(metric, enhanced):
    rng = np.random.default_rng(hash((metric.kind, metric.p, enhanced)) % 2**32)
    pts = rng.random((2000, 3))
    queries = rng.random((20, 3))
    k = 10
    truth = [brute_force_knn(pts, q, metric, k) for q in queries]
    r = max(row[-1][1] for row in truth) * (1 + 1e-9)
    results = knn_search(pts, queries, metric, r=r, k=k, enhanced=enhanced)
    for res, row in zip(results, truth):
        assert res.ids() == [i for i, _ in row]
        for (_, got), (_, want) in zip(res.neighbors, row):
            assert got == pytest.approx(want, rel=1e-10)


@pytest.mark.parametrize("metric", [L1, L3, LINF])
def test_plain_enhanced_equivalence_random(metric):
    rng = np.random.default_rng(17)
    pts = rng.random((1500, 3))
    queries = rng.random((15, 3))
    plain = knn_search(pts, queries, metric, r=0.2, k=5, enhanced=False)
    enh = knn_search(pts, queries, metric, r=0.2, k=5, enhanced=True)
    for a, b in zip(plain, enh):
        assert a.neighbors == b.neighbors
        assert b.hit_count <= a.hit_count
        assert a.hit_count >= a.candidate_count >= len(a.neighbors)
        assert b.hit_count >= b.candidate_count >= len(b.neighbors)


def test_radius_monotone_recall():
    rng = np.random.default_rng(23)
    pts = rng.random((3000, 3))
    queries = rng.random((10, 3))
    k = 8
    truth = [set(i for i, _ in brute_force_knn(pts, q, L1, k)) for q in queries]
    last = -1.0
    for r in (0.02, 0.05, 0.1, 0.2, 0.5):
        results = knn_search(pts, queries, L1, r=r, k=k)
        rec = sum(len(set(res.ids()) & t) / len(t) for res, t in zip(results, truth)) / len(truth)
        assert rec >= last
        last = rec
    assert last == 1.0


# --- transforms -------------------------------------------------------------

def test_apply_transform_examples():
    assert apply_transform(Transform.NORMALIZE, (3, 4, 0)) == Point3(0.6, 0.8, 0.0)
    assert apply_transform(Transform.EMBED_2D, (1, 2)) == Point3(1, 2, 0)
    assert apply_transform(Transform.HAMMING_VERTEX, "101") == Point3(1, 0, 1)
    assert apply_transform(Transform.HAMMING_VERTEX, "1") == Point3(0, 0, 1)  # left-padded


def test_normalize_rejects_zero_vector():
    with pytest.raises(ValueError):
        apply_transform(Transform.NORMALIZE, (0, 0, 0))
    with pytest.raises(ValueError, match="index 1"):
        transform_points([Transform.NORMALIZE], np.array([[1, 0, 0], [0, 0, 0]], float))


def test_hamming_vertex_rejects_bad_strings():
    for bad in ("", "0110", "21", 5):
        with pytest.raises(ValueError):
            apply_transform(Transform.HAMMING_VERTEX, bad)


def test_transform_points_matches_scalar():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(50, 3))
    batch = transform_points([Transform.NORMALIZE], pts)
    for row, out in zip(pts, batch):
        single = apply_transform(Transform.NORMALIZE, row)
        assert single.as_tuple() == pytest.approx(tuple(out), rel=1e-15)


def test_chain_resolution():
    assert transform_chain_for(MetricSpec.cosine()) == [Transform.NORMALIZE]
    assert transform_chain_for(MetricSpec.euclid2d()) == [Transform.EMBED_2D]
    assert pipeline_metric_for(MetricSpec.hamming3()) == L1
    assert pipeline_metric_for(MetricSpec.angular()) == L2
    with pytest.raises(ValueError):
        transform_chain_for(L2)


def test_transformed_query_angular_example():
    data = np.array([[0, 1, 0], [1, 1, 0]], float)
    cfg = ReductionConfig(L2, 1.5, 2)
    res = transformed_query(data, [[1, 0, 0]], MetricSpec.angular(), cfg)[0]
    assert res.neighbors[0][0] == 1
    assert res.neighbors[0][1] == pytest.approx(math.pi / 4, rel=1e-12)
    assert res.neighbors[1] == (0, pytest.approx(math.pi / 2, rel=1e-12))


def test_transformed_query_cosine_reports_similarity():
    data = np.array([[0, 1, 0], [1, 1, 0]], float)
    cfg = ReductionConfig(L2, 1.5, 2)
    res = transformed_query(data, [[1, 0, 0]], MetricSpec.cosine(), cfg)[0]
    assert res.neighbors[0] == (1, pytest.approx(math.cos(math.pi / 4), rel=1e-12))
    assert res.neighbors[1][1] == pytest.approx(0.0, abs=1e-12)  # 90 degrees


def test_transformed_query_hamming_tie():
    data = ["000", "011", "111"]
    cfg = ReductionConfig(L1, 3.0, 1)
    res = transformed_query(data, ["001"], MetricSpec.hamming3(), cfg)[0]
    assert res.neighbors == [(0, 1.0)]  # ties at distance 1 break by id


def test_transformed_query_checks_pipeline_metric():
    with pytest.raises(ValueError, match="pipeline metric"):
        transformed_query(np.eye(3), [[1, 0, 0]], MetricSpec.cosine(), ReductionConfig(L1, 1.0, 1))
    with pytest.raises(ValueError):
        transformed_query(np.eye(3), [[1, 0, 0]], L2, ReductionConfig(L2, 1.0, 1))


def test_transformed_query_euclid2d():
    rng = np.random.default_rng(31)
    data = rng.random((500, 2))
    queries = rng.random((5, 2))
    truth = [brute_force_knn(data, q, MetricSpec.euclid2d(), 5) for q in queries]
    r = max(row[-1][1] for row in truth) * (1 + 1e-9)
    cfg = ReductionConfig(L2, r, 5)
    results = transformed_query(data, queries, MetricSpec.euclid2d(), cfg)
    for res, row in zip(results, truth):
        assert res.ids() == [i for i, _ in row]
        for (_, got), (_, want) in zip(res.neighbors, row):
            assert got == pytest.approx(want, rel=1e-10)


def test_angular_top_k_matches_dot_product_oracle():
    rng = np.random.default_rng(37)
    data = rng.normal(size=(100_000, 3))
    queries = rng.normal(size=(5, 3))
    k = 10
    # independent oracle: rank by descending cosine similarity via raw dots
    unit = data / np.linalg.norm(data, axis=1, keepdims=True)
    truth_rows = [brute_force_knn(data, q, MetricSpec.angular(), k) for q in queries]
    r = max(row[-1][1] for row in truth_rows)  # max angular distance at rank k
    chord = 2 * math.sin(min(r, math.pi) / 2) * (1 + 1e-9)
    results = knn_search(data, queries, MetricSpec.angular(), r=chord, k=k)
    for res, q in zip(results, queries):
        uq = q / np.linalg.norm(q)
        dots = unit @ uq
        want = np.argsort(-dots, kind="stable")[:k]
        assert res.ids() == list(want)


def test_cosine_order_reversed_against_chord():
    # larger chord means smaller similarity, order for order
    rng = np.random.default_rng(53)
    q = rng.normal(size=(2000, 3))
    a = rng.normal(size=(2000, 3))
    b = rng.normal(size=(2000, 3))
    uq, ua, ub = (v / np.linalg.norm(v, axis=1, keepdims=True) for v in (q, a, b))
    sim_a, sim_b = (uq * ua).sum(axis=1), (uq * ub).sum(axis=1)
    chord_a = np.linalg.norm(uq - ua, axis=1)
    chord_b = np.linalg.norm(uq - ub, axis=1)
    not_tied = (sim_a != sim_b) & (chord_a != chord_b)
    assert (((sim_a > sim_b) == (chord_a < chord_b))[not_tied]).all()


def test_reported_distances_within_radius():
    rng = np.random.default_rng(59)
    pts = rng.random((800, 3))
    queries = rng.random((10, 3))
    for metric in (L1, L3, LINF):
        for res in knn_search(pts, queries, metric, r=0.25, k=50):
            assert all(d <= 0.25 * (1 + 1e-12) for _, d in res.neighbors)
            ids = res.ids()
            assert len(set(ids)) == len(ids)
            assert res.neighbors == sorted(res.neighbors, key=lambda t: (t[1], t[0]))


def test_composed_embed_then_l1():
    # 2D data under Manhattan distance: lift to 3D, then run the L1 pipeline
    rng = np.random.default_rng(41)
    data2 = rng.random((800, 2))
    queries2 = rng.random((6, 2))
    data3 = transform_points([Transform.EMBED_2D], data2)
    queries3 = transform_points([Transform.EMBED_2D], queries2)
    cfg = ReductionConfig(L1, 0.4, 5)
    bvh = build_index(data3, cfg, dimension=2)
    results = batch_query(bvh, data3, queries3, cfg, dimension=2)
    for res, q in zip(results, queries2):
        l1 = np.abs(data2 - q).sum(axis=1)
        in_range = np.flatnonzero(l1 <= 0.4)
        want = in_range[np.argsort(l1[in_range], kind="stable")][:5]
        assert res.ids() == list(want)
