import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bvhknn import MetricSpec, Point3, in_lp_ball, inclusion_radius, l2_distance, linf_weight, lp_weight
from bvhknn.metrics import metric_weight, weight_threshold

ORIGIN = Point3(0, 0, 0)

coord = st.floats(min_value=-100, max_value=100, allow_nan=False, allow_infinity=False)
pt = st.builds(Point3, coord, coord, coord)
metric_st = st.sampled_from(
    [MetricSpec.lp(1), MetricSpec.lp(1.5), MetricSpec.lp(2), MetricSpec.lp(3), MetricSpec.lp(4), MetricSpec.linf()]
)


def test_lp_weight_examples():
    assert lp_weight(ORIGIN, Point3(1, 2, 2), 1) == 5.0
    assert lp_weight(ORIGIN, Point3(1, 2, 2), 2) == 9.0
    assert lp_weight(ORIGIN, Point3(0.5, 0.5, 0.5), 3) == pytest.approx(0.375, rel=1e-15)


def test_lp_weight_rejects_quasinorm():
    with pytest.raises(ValueError):
        lp_weight(ORIGIN, Point3(1, 1, 1), 0.5)
    with pytest.raises(ValueError):
        MetricSpec.lp(0.99)


def test_linf_weight_examples():
    assert linf_weight(ORIGIN, Point3(1, 2, 2)) == 2.0
    assert linf_weight(Point3(0.9, 0.9, 0.9), ORIGIN) == 0.9
    assert linf_weight(Point3(3, -1, 2), Point3(3, -1, 2)) == 0.0


def test_inclusion_radius_values():
    assert inclusion_radius(MetricSpec.linf(), 1.0, 2) == math.sqrt(2)
    assert inclusion_radius(MetricSpec.linf(), 1.0, 3) == math.sqrt(3)
    assert inclusion_radius(MetricSpec.lp(1), 5.0, 3) == 5.0
    assert inclusion_radius(MetricSpec.lp(2), 0.25, 3) == 0.25
    assert inclusion_radius(MetricSpec.lp(4), 1.0, 3) == pytest.approx(3 ** 0.25, rel=1e-12)


def test_inclusion_radius_p4_against_sampling_oracle():
    # maximize the L2 norm over a dense sample of the unit L4 sphere; the
    # analytic value 3**(1/4) must dominate and be attained on the diagonal
    rng = np.random.default_rng(7)
    dirs = rng.normal(size=(200_000, 3))
    dirs = dirs[np.abs(dirs).sum(axis=1) > 1e-9]
    l4 = (np.abs(dirs) ** 4).sum(axis=1) ** 0.25
    on_sphere = dirs / l4[:, None]
    l2 = np.sqrt((on_sphere * on_sphere).sum(axis=1))
    sampled_max = l2.max()
    analytic = inclusion_radius(MetricSpec.lp(4), 1.0, 3)
    assert sampled_max <= analytic + 1e-12
    diag = np.full(3, 3 ** (-0.25))
    assert np.sqrt((diag * diag).sum()) == pytest.approx(analytic, rel=1e-12)
    assert sampled_max == pytest.approx(analytic, rel=1e-3)  # dense sample gets close


def test_inclusion_radius_rejects_transform_metrics():
    for m in (MetricSpec.cosine(), MetricSpec.angular(), MetricSpec.euclid2d(), MetricSpec.hamming3()):
        with pytest.raises(ValueError):
            inclusion_radius(m, 1.0, 3)


def test_inclusion_radius_rejects_bad_inputs():
    with pytest.raises(ValueError):
        inclusion_radius(MetricSpec.lp(2), 0.0, 3)
    with pytest.raises(ValueError):
        inclusion_radius(MetricSpec.lp(2), 1.0, 4)


def test_in_lp_ball_examples():
    assert in_lp_ball(Point3(0.9, 0.9, 0.9), ORIGIN, MetricSpec.linf(), 1.0)
    assert l2_distance(Point3(0.9, 0.9, 0.9), ORIGIN) > 1.0  # inside cube, outside sphere
    assert not in_lp_ball(Point3(0.5, 0.5, 0.5), ORIGIN, MetricSpec.lp(1), 1.0)
    assert in_lp_ball(Point3(1, 0, 0), ORIGIN, MetricSpec.lp(1), 1.0)  # boundary inclusive


@given(pt, pt, metric_st, st.floats(min_value=0.01, max_value=50, allow_nan=False))
@settings(deadline=None)
def test_inclusion_superset(center, p, metric, r):
    if in_lp_ball(p, center, metric, r):
        assert l2_distance(p, center) <= inclusion_radius(metric, r, 3) * (1 + 1e-12)


@pytest.mark.parametrize("metric", [MetricSpec.lp(1), MetricSpec.lp(2), MetricSpec.lp(3), MetricSpec.lp(4), MetricSpec.linf()])
@pytest.mark.parametrize("r", [0.5, 1.0, 7.25])
def test_inclusion_tightness_at_extremes(metric, r):
    # some boundary point of the metric ball reaches the circumscribing radius
    if metric.kind == "linf":
        extremal = Point3(r, r, r)
    elif metric.p <= 2:
        extremal = Point3(r, 0, 0)
    else:
        t = r * 3 ** (-1.0 / metric.p)
        extremal = Point3(t, t, t)
    assert metric_weight(extremal, ORIGIN, metric) <= weight_threshold(metric, r) * (1 + 1e-12)
    assert abs(l2_distance(extremal, ORIGIN) - inclusion_radius(metric, r, 3)) < 1e-9


@given(pt, pt, pt, metric_st)
@settings(deadline=None)
def test_weight_orders_like_distance(q, a, b, metric):
    wa, wb = metric_weight(q, a, metric), metric_weight(q, b, metric)
    # true distances: take the root for Lp, identity for LInf
    if metric.kind == "lp":
        da, db = wa ** (1 / metric.p), wb ** (1 / metric.p)
    else:
        da, db = wa, wb
    if wa < wb:
        assert da <= db
    if wa == wb:
        assert da == db


@given(pt, st.floats(min_value=0.1, max_value=10, allow_nan=False))
@settings(deadline=None, max_examples=50)
def test_lp_ball_nesting(p, r):
    # the ball grows with p at fixed radius
    ps = [1, 1.5, 2, 3, 4]
    for p1, p2 in zip(ps, ps[1:]):
        if in_lp_ball(p, ORIGIN, MetricSpec.lp(p1), r):
            assert in_lp_ball(p, ORIGIN, MetricSpec.lp(p2), r)
    if in_lp_ball(p, ORIGIN, MetricSpec.lp(4), r):
        assert in_lp_ball(p, ORIGIN, MetricSpec.linf(), r)


def test_canonical_roundtrip():
    cases = ["lp:1", "lp:2", "lp:3.5", "linf", "cosine", "angular", "euclid2d", "hamming3"]
    for text in cases:
        assert MetricSpec.parse(text).canonical() == text
    assert MetricSpec.parse("LP:2") == MetricSpec.lp(2)
    with pytest.raises(ValueError):
        MetricSpec.parse("manhattan")
    with pytest.raises(ValueError):
        MetricSpec.parse("lp:abc")
