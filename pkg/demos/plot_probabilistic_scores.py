# %%
"""
=====================================
From distances to outlier probability
=====================================

Raw kNN scores are distances: their scale depends on the data. Fitting a
distribution to the distances between reference points turns each score
into the probability that a reference distance is no larger than it.
"""

import numpy as np

from probout import (Dataset, DetectorConfig, build_normalization_set, compute_scores,
                     cross_distances, fit, pairwise_distances, transform_scores)

rng = np.random.default_rng(0)
reference = Dataset(rng.normal(size=(300, 2)))
queries = Dataset(np.array([[0.0, 0.0], [1.5, 1.5], [4.0, 0.0], [8.0, 8.0]]))

# %%
# Open-world scoring
# ------------------
# Queries are scored against the reference set; the distribution is fitted
# on the reference set's own distance matrix.

ref_dist = pairwise_distances(reference)
dist = cross_distances(queries, reference)
raw = compute_scores(DetectorConfig("knnw", k=10), dist, ref_dist)
print("raw scores:", np.round(raw.scores, 3))

for strategy, m in (("full", None), ("m_neighborhood", 10)):
    nset = build_normalization_set(ref_dist, strategy, m)
    for kind in ("normal", "exponential", "empirical"):
        distribution = fit(kind, nset)
        prob = transform_scores(raw, distribution).scores
        print(f"{strategy:>15} {kind:>12}: {np.round(prob, 3)}")

# %%
# Neighbor distances are small next to the typical pairwise distance, so
# against the full matrix the second query (slightly off-center) lands near
# 0.05. The 10-neighborhood set holds small distances only; there the same
# score reads as roughly 0.8, and the third query is already near 1.

# %%
# Closed-world vs open-world
# --------------------------
# A reference point scored open-world finds itself at distance 0; in the
# closed world it is excluded from its own neighbor search.

one = reference.subset([0])
open_score = compute_scores(DetectorConfig("kthnn", 1), cross_distances(one, reference))
closed_score = compute_scores(DetectorConfig("kthnn", 1), ref_dist)
print("open-world:", open_score.scores[0], " closed-world:", closed_score.scores[0])
