# %%
"""
=================================
Neighbor weighting schemes (kNNW)
=================================

kthNN and kNN are two points on a family of weighted neighbor scores. This
script prints the weights every scheme gives to three neighbors at distances
exp(0.5), exp(1.0) and exp(1.5), and the resulting scores.
"""

import numpy as np

from probout import NeighborLists, WeightScheme, score_knnw, weights

d = np.exp([0.5, 1.0, 1.5])
print("neighbor distances:", np.round(d, 4))

# %%
# Weights and scores
# ------------------
# Every scheme is normalized to sum to one, so the score is a weighted mean
# distance and always lies between the nearest and the farthest neighbor.

nbrs = NeighborLists(d[None, :], np.arange(3)[None, :])
for kind in ("max", "mean", "distance", "exponential", "linear", "rank"):
    w = weights(WeightScheme(kind), d)
    score = score_knnw(nbrs, WeightScheme(kind)).scores[0]
    print(f"{kind:>12}: weights {np.round(w, 4)}  score {score:.4f}")

# %%
# The max scheme reproduces kthNN (score = farthest distance) and the mean
# scheme reproduces kNN (score = mean distance).
