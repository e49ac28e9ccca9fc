"""
Probabilistic transformation of distance-based outlier scores.

A normalization set is a subset of the reference distance matrix. A
distribution fitted to it turns any distance-valued score s into
``P(r <= s)``: the fraction of reference distances not larger than s. A
probability of 0.99 then reads as "this score is in the top 1% of distances
seen between reference points".

Because every CDF is non-decreasing, the transformation never inverts the
ranking of two scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .core import Dataset, DistanceMatrix, knn_from_matrix, pairwise_distances
from .detectors import DetectorConfig, ScoreVector, compute_scores
from .exceptions import FitError, InputError

STRATEGIES = ("full", "triangular", "m_neighborhood")
DISTRIBUTIONS = ("none", "normal", "exponential", "empirical")
MEASURES = ("ks", "wasserstein1")


@dataclass(frozen=True)
class NormalizationSet:
    values: np.ndarray
    strategy: str
    m: Optional[int] = None

    def __len__(self):
        return len(self.values)


def build_normalization_set(dist: DistanceMatrix, strategy: str = "full",
                            m: Optional[int] = None) -> NormalizationSet:
    """
    Extract reference distances from a closed-world matrix.

    - ``full``: every off-diagonal entry, n(n-1) values
    - ``triangular``: the strict upper triangle, n(n-1)/2 values; requires a
      symmetric matrix
    - ``m_neighborhood``: each reference point's m smallest distances,
      pooled into one set of n*m values
    """
    n_rows, n_cols = dist.shape
    if n_rows != n_cols or not dist.closed_world:
        raise InputError("normalization sets come from a closed-world square matrix")
    n = n_rows

    if strategy == "full":
        values = dist.values[~dist.self_mask]
    elif strategy == "triangular":
        v = dist.values
        if not np.allclose(v, v.T, rtol=1e-12, atol=1e-300):
            raise InputError("triangular normalization set needs a symmetric matrix")
        values = v[np.triu_indices(n, k=1)]
    elif strategy == "m_neighborhood":
        if m is None or not 1 <= m <= n - 1:
            raise InputError(f"m must be in [1, {n - 1}], got {m}")
        values = knn_from_matrix(dist, m).distances.ravel()
    else:
        raise InputError(f"unknown normalization strategy {strategy!r}")

    values = np.array(values, dtype=np.float64)
    values.setflags(write=False)
    return NormalizationSet(values, strategy, m if strategy == "m_neighborhood" else None)


# ----------------------------------------------------------------------------
# distributions
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DistanceDistribution:
    """
    A fitted distance distribution.

    ``kind`` selects which parameters are meaningful: ``mu``/``sigma`` for
    normal, ``lam`` (rate) for exponential, ``sample`` (sorted) for
    empirical. ``none`` is the identity transformation.
    """

    kind: str
    mu: float = float("nan")
    sigma: float = float("nan")
    lam: float = float("nan")
    sample: Optional[np.ndarray] = field(default=None, repr=False)

    def cdf(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        if self.kind == "normal":
            # erfc keeps full relative precision in the lower tail
            return 0.5 * special.erfc(-(v - self.mu) / (self.sigma * np.sqrt(2.0)))
        if self.kind == "exponential":
            return np.where(v >= 0, -np.expm1(-self.lam * np.maximum(v, 0.0)), 0.0)
        if self.kind == "empirical":
            return np.searchsorted(self.sample, v, side="right") / self.sample.size
        if self.kind == "none":
            return np.array(v)
        raise InputError(f"unknown distribution {self.kind!r}")

    def pdf(self, values) -> np.ndarray:
        """Distance density; defined for the parametric kinds only."""
        v = np.asarray(values, dtype=np.float64)
        if self.kind == "normal":
            z = (v - self.mu) / self.sigma
            return np.exp(-0.5 * z * z) / (self.sigma * np.sqrt(2.0 * np.pi))
        if self.kind == "exponential":
            return np.where(v >= 0, self.lam * np.exp(-self.lam * np.maximum(v, 0.0)), 0.0)
        raise InputError(f"no density for {self.kind!r} distributions")

    def describe(self) -> str:
        if self.kind == "normal":
            return f"normal mu={self.mu!r} sigma={self.sigma!r}"
        if self.kind == "exponential":
            return f"exponential lambda={self.lam!r}"
        if self.kind == "empirical":
            return (f"empirical n={self.sample.size} min={self.sample[0]!r} "
                    f"max={self.sample[-1]!r}")
        return "none"


def fit(kind: str, nset) -> DistanceDistribution:
    """
    Maximum-likelihood fit of a distance distribution.

    Parameters
    ----------
    kind : {"normal", "exponential", "empirical", "none"}
    nset : NormalizationSet or array-like
        Reference distances.
    """
    values = np.asarray(getattr(nset, "values", nset), dtype=np.float64)
    if kind not in DISTRIBUTIONS:
        raise InputError(f"unknown distribution {kind!r}")
    if kind == "none":
        return DistanceDistribution("none")
    if values.size == 0:
        raise FitError("cannot fit a distribution to an empty set")

    if kind == "normal":
        mu = float(values.mean())
        sigma = float(values.std())
        if not sigma > 0:
            raise FitError("normal fit needs at least two distinct distances")
        return DistanceDistribution("normal", mu=mu, sigma=sigma)
    if kind == "exponential":
        mean = float(values.mean())
        if not mean > 0:
            raise FitError("exponential fit needs a positive mean distance")
        return DistanceDistribution("exponential", lam=1.0 / mean)
    sample = np.sort(values)
    sample.setflags(write=False)
    return DistanceDistribution("empirical", sample=sample)


def cdf(distribution: DistanceDistribution, value):
    """``P(r <= value)`` under the fitted distribution."""
    out = distribution.cdf(value)
    return float(out) if np.ndim(out) == 0 else out


def transform_scores(scores, distribution: Optional[DistanceDistribution]) -> ScoreVector:
    """Map raw outlier scores through the distribution's CDF."""
    raw = np.asarray(scores, dtype=np.float64)
    tag = getattr(scores, "detector_id", "")
    if distribution is None or distribution.kind == "none":
        return ScoreVector(raw, tag)
    return ScoreVector(distribution.cdf(raw), f"{tag}|{distribution.kind}")


# ----------------------------------------------------------------------------
# contrast
# ----------------------------------------------------------------------------


def _ecdf_pair(a, b):
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise InputError("statistical distance needs two non-empty samples")
    grid = np.union1d(a, b)
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return grid, fa, fb


def statistical_distance(a, b, measure: str = "ks") -> float:
    """
    Distance between two score samples.

    ``ks`` is the largest gap between the empirical CDFs; ``wasserstein1``
    is the area between them.
    """
    grid, fa, fb = _ecdf_pair(a, b)
    gap = np.abs(fa - fb)
    if measure == "ks":
        return float(gap.max())
    if measure == "wasserstein1":
        # both ECDFs are flat between consecutive grid points
        return float(np.sum(gap[:-1] * np.diff(grid)))
    raise InputError(f"unknown measure {measure!r}")


@dataclass
class ContrastCurve:
    """Contrast between inlier and outlier probabilities for each m."""

    m: np.ndarray
    contrast: dict
    f1_threshold: np.ndarray
    f1: np.ndarray
    kind: str

    def best_m(self, measure: str = "ks") -> int:
        """Contrast-maximizing m; the smallest one on ties."""
        values = self.contrast[measure]
        return int(self.m[int(np.argmax(values))])


def contrast_curve(dist: DistanceMatrix, scores, labels, m_grid: Sequence[int],
                   kind: str = "empirical",
                   measures: Sequence[str] = MEASURES) -> ContrastCurve:
    """
    Contrast of transformed scores over a grid of m-neighborhood sizes.

    Parameters
    ----------
    dist : DistanceMatrix
        Closed-world reference matrix the normalization sets come from.
    scores : array-like
        Raw outlier scores of the labeled points.
    labels : array-like of {0, 1}
    m_grid : sequence of int
    kind : str
        Distribution fitted to each normalization set.
    measures : sequence of str
        Statistical distances to compute.
    """
    from .evaluation import f1_optimal_threshold

    if labels is None:
        raise InputError("contrast needs labels")
    labels = np.asarray(labels)
    raw = np.asarray(scores, dtype=np.float64)
    if labels.shape != raw.shape:
        raise InputError("scores and labels differ in length")
    if not (np.any(labels == 1) and np.any(labels == 0)):
        raise InputError("contrast needs both inlier and outlier labels")
    grid = np.array(sorted({int(m) for m in m_grid}), dtype=np.int64)
    if grid.size == 0:
        raise InputError("empty m grid")
    n = dist.shape[0]
    if grid[0] < 1 or grid[-1] > n - 1:
        raise InputError(f"m grid must lie in [1, {n - 1}]")

    # one full sort serves every m: the m-neighborhood is a prefix
    nbrs = knn_from_matrix(dist, int(grid[-1]))
    contrast = {name: np.empty(grid.size) for name in measures}
    thresholds = np.empty(grid.size)
    f1s = np.empty(grid.size)
    for i, m in enumerate(grid):
        nset = NormalizationSet(nbrs.distances[:, :m].ravel(), "m_neighborhood", int(m))
        prob = transform_scores(raw, fit(kind, nset)).scores
        for name in measures:
            contrast[name][i] = statistical_distance(
                prob[labels == 0], prob[labels == 1], name
            )
        thresholds[i], f1s[i] = f1_optimal_threshold(prob, labels)
    return ContrastCurve(grid, contrast, thresholds, f1s, kind)


def contrast_scan(data: Dataset, detector: DetectorConfig, m_grid: Sequence[int],
                  kind: str = "empirical",
                  measures: Sequence[str] = MEASURES) -> ContrastCurve:
    """Closed-world contrast scan of a labeled dataset."""
    if data.labels is None:
        raise InputError("contrast scan needs a labeled dataset")
    dist = pairwise_distances(data)
    scores = compute_scores(detector, dist)
    return contrast_curve(dist, scores, data.labels, m_grid, kind, measures)
