# %%
"""
==========================
Cross-validated evaluation
==========================

Two-fold stratified cross-validation over a grid of k, weighting schemes and
distributions. The training fold is the reference set and provides the
normalization set, and the test fold is scored open-world against it.
"""

import numpy as np

from probout import Dataset, ProtocolConfig, benchmark_run, minmax_scale

rng = np.random.default_rng(7)
inliers = rng.normal(size=(190, 4))
outliers = rng.uniform(-6, 6, size=(10, 4))
data = minmax_scale(Dataset(np.vstack([inliers, outliers]), np.r_[np.zeros(190), np.ones(10)]))

report = benchmark_run(data, ProtocolConfig(
    k_grid=range(1, 31),
    schemes=("max", "mean", "rank", "linear"),
    distributions=("none", "normal", "exponential", "empirical"),
))

# %%
# The transformation is monotone, so the AUC of the probabilities matches
# the raw AUC and every entry is rank stable.

print("entries:", len(report.entries))
print("rank stable everywhere:", all(e.rank_stable for e in report.entries))
print("max |AUC raw - AUC transformed|:",
      max(abs(e.auc_raw - e.auc) for e in report.entries))
for (det, scheme, kind), (k, auc) in report.best_k().items():
    print(f"{scheme:>7} {kind:>12}: best k={k:>2}  mean AUC={auc:.4f}")
