"""
Filter-refine search for Lp and Chebyshev metrics
=================================================

A k-NN query under any Lp norm (p >= 1) or the max norm runs in three
narrowing stages: box hits from the BVH, a sphere pre-filter sized by the
circumscribing L2 radius, the exact metric-ball test, then a bounded heap
keeps the best k.  The enhanced variant shrinks the scene boxes to the
metric ball's true axis extent and drops the sphere stage; it returns the
same neighbors with less filtering work.
"""

import numpy as np

from bvhknn import MetricSpec, brute_force_knn, inclusion_radius, knn_search

rng = np.random.default_rng(1)
points = rng.random((50_000, 3))
queries = rng.random((20, 3))
k = 10

# The circumscribing radius f(r): how far the L2 filter must reach so that
# no point within metric distance r can escape it.
print("circumscribing L2 radius f(r) at r = 1, d = 3:")
for metric in (MetricSpec.lp(1), MetricSpec.lp(2), MetricSpec.lp(3), MetricSpec.lp(4), MetricSpec.linf()):
    print(f"  {metric.canonical():>5}: f(1) = {inclusion_radius(metric, 1.0, 3):.6f}")

# Pick radii that comfortably cover the 10th neighbor for each metric,
# then check the indexed search against the exhaustive oracle.
print(f"\nsearch vs brute force on {len(points)} points, k={k}:")
for metric in (MetricSpec.lp(1), MetricSpec.lp(3), MetricSpec.linf()):
    truth = [brute_force_knn(points, q, metric, k) for q in queries]
    r = max(row[-1][1] for row in truth) * 1.01

    plain = knn_search(points, queries, metric, r=r, k=k, enhanced=False)
    enhanced = knn_search(points, queries, metric, r=r, k=k, enhanced=True)

    exact = all(res.ids() == [i for i, _ in row] for res, row in zip(plain, truth))
    same = all(a.neighbors == b.neighbors for a, b in zip(plain, enhanced))
    mean_hits = lambda rs: sum(r_.hit_count for r_ in rs) / len(rs)
    print(
        f"  {metric.canonical():>5}  r={r:.4f}  exact={exact}  plain==enhanced={same}  "
        f"box hits/query: plain {mean_hits(plain):6.1f}  enhanced {mean_hits(enhanced):6.1f}"
    )

# The effect is largest for the max norm: its ball IS a box, so the
# enhanced scene indexes no dead space at all, while the plain scene must
# circumscribe the sqrt(3)-times-larger sphere.
res = knn_search(points, queries[:1], MetricSpec.linf(), r=0.05, k=5)[0]
print("\nsample result (linf, r=0.05):")
for i, d in res.neighbors:
    print(f"  id {i:5d}  distance {d:.5f}")
print(f"  hits {res.hit_count}, candidates {res.candidate_count}, node visits {res.node_visits}")
