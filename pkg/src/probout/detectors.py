"""
Distance-based outlier scores.

Every detector maps a query point to a real score where larger means more
outlying. Global detectors (kthNN, kNN, kNNW and the sampling variants) use
the neighbor distances directly; local detectors (LOF, SLOF) compare a point's
density with the densities of its neighbors.

References
----------
Ramaswamy, Rastogi and Shim (2000) for kthNN; Angiulli and Pizzuti (2002)
for kNN; Wu and Jermaine (2006) for iterative sampling; Sugiyama and
Borgwardt (2013) for SNN; Pang et al. (2015) for RSNN; Breunig et al. (2000)
for LOF; Schubert et al. (2014) for the simplified LOF; Knorr and Ng (1997)
for DB-outliers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import DistanceMatrix, NeighborLists, knn_from_matrix
from .exceptions import InputError

SCHEMES = ("max", "mean", "distance", "exponential", "linear", "rank")
DETECTORS = ("knnw", "kthnn", "knn", "snn", "rsnn", "kthisnn", "lof", "slof", "db")

# floor applied to distances before they are inverted into densities
DENSITY_EPS = 1e-12

# stream tags keep the random draws of different detectors independent
_ISNN_STREAM = 1
_SNN_STREAM = 2


@dataclass(frozen=True)
class WeightScheme:
    """Neighbor weighting for kNNW; ``s`` is the distance exponent, ``a`` and
    ``b`` shape the exponential scheme."""

    kind: str = "mean"
    s: float = 1.0
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise InputError(f"unknown weight scheme {self.kind!r}")
        if self.s < 0:
            raise InputError("distance scheme exponent s must be >= 0")
        if self.b <= 0:
            raise InputError("exponential scheme exponent b must be > 0")


@dataclass(frozen=True)
class ScoreVector:
    """Outlier scores of m points, tagged with the detector that made them."""

    scores: np.ndarray
    detector_id: str = ""

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1:
            raise InputError("scores must be 1-D")
        if not np.all(np.isfinite(scores)):
            raise InputError(f"{self.detector_id or 'detector'} produced non-finite scores")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.scores, dtype=dtype)

    def __len__(self):
        return len(self.scores)


def _scores(values, detector_id) -> ScoreVector:
    return ScoreVector(np.asarray(values, dtype=np.float64), detector_id)


# ----------------------------------------------------------------------------
# weighting schemes
# ----------------------------------------------------------------------------


def weights(scheme: WeightScheme, d) -> np.ndarray:
    """
    Sum-normalized neighbor weights.

    The schemes are reversed relative to weighted kNN classification: the
    farthest neighbor receives the largest weight.

    Parameters
    ----------
    scheme : WeightScheme
    d : array-like of shape (k,) or (m, k)
        Ascending neighbor distances; a 2-D input is processed row-wise.

    Returns
    -------
    np.ndarray
        Weights of the same shape as ``d``; every row sums to one.
    """
    d = np.asarray(d, dtype=np.float64)
    if d.ndim not in (1, 2) or d.shape[-1] == 0:
        raise InputError("need a non-empty vector of neighbor distances")
    if np.any(d < 0):
        raise InputError("neighbor distances must be nonnegative")
    k = d.shape[-1]
    kind = scheme.kind

    if kind == "max":
        w = np.zeros_like(d)
        w[..., -1] = 1.0
    elif kind == "mean":
        w = np.ones_like(d)
    elif kind == "distance":
        w = d**scheme.s
    elif kind == "exponential":
        if scheme.a < 0:
            warnings.warn(
                "negative a makes the exponential scheme favor near neighbors",
                stacklevel=2,
            )
        e = scheme.a * d**scheme.b
        # shifting the exponent cancels in the normalization
        w = np.exp(e - e.max(axis=-1, keepdims=True))
    elif kind == "linear":
        lo = d.min(axis=-1, keepdims=True)
        span = d.max(axis=-1, keepdims=True) - lo
        w = np.where(span > 0, (d - lo) / np.where(span > 0, span, 1.0), 1.0)
    else:  # rank
        w = np.broadcast_to(np.arange(1, k + 1, dtype=np.float64), d.shape).copy()

    total = w.sum(axis=-1, keepdims=True)
    # all-zero raw weights (distance scheme on duplicates) fall back to mean
    w = np.where(total > 0, w / np.where(total > 0, total, 1.0), 1.0 / k)
    return w


# ----------------------------------------------------------------------------
# global detectors
# ----------------------------------------------------------------------------


def score_knnw(nbrs: NeighborLists, scheme: WeightScheme = WeightScheme(),
               k: Optional[int] = None) -> ScoreVector:
    """Weighted average of the k nearest neighbor distances."""
    if k is not None:
        nbrs = nbrs.head(k)
    d = nbrs.distances
    w = weights(scheme, d)
    s = np.einsum("ij,ij->i", d, w) / w.sum(axis=1)
    # rounding can leave the dot product one ulp outside the row range
    s = np.clip(s, d[:, 0], d[:, -1])
    return _scores(s, f"knnw[{scheme.kind}]")


def score_kthnn(nbrs: NeighborLists, k: int) -> ScoreVector:
    """Distance to the k-th nearest neighbor."""
    return _scores(nbrs.head(k).distances[:, -1], "kthnn")


def score_knn(nbrs: NeighborLists, k: int) -> ScoreVector:
    """Mean distance to the k nearest neighbors."""
    return _scores(nbrs.head(k).distances.mean(axis=1), "knn")


def score_db_outlier(dist: DistanceMatrix, delta: float, alpha: float) -> np.ndarray:
    """
    DB(alpha, delta) outlier labels.

    A point is an outlier when at least ``alpha * n`` other points lie
    farther than ``delta`` from it, with n the total number of points.
    """
    if not 0 <= alpha <= 1:
        raise InputError(f"alpha must be in [0, 1], got {alpha}")
    if delta <= 0:
        raise InputError(f"delta must be positive, got {delta}")
    far = dist.values > delta
    if dist.self_mask is not None:
        far &= ~dist.self_mask
    n = dist.shape[1]
    return (far.sum(axis=1) >= alpha * n).astype(np.int64)


# ----------------------------------------------------------------------------
# sampling detectors
# ----------------------------------------------------------------------------


def _rng(seed: int, stream: int, index: int) -> np.random.Generator:
    # Philox is counter-based: each (seed, stream, index) triple keys an
    # independent generator, so results never depend on evaluation order
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, index])))


def _eligible(dist: DistanceMatrix, row: int) -> np.ndarray:
    if dist.self_mask is None:
        return np.arange(dist.shape[1])
    return np.flatnonzero(~dist.self_mask[row])


def score_kth_isnn(dist: DistanceMatrix, k: int, sample_size: int,
                   seed: int = 42) -> ScoreVector:
    """
    k-th nearest neighbor distance within a fresh random subset per point.

    Each row draws ``sample_size`` eligible reference points uniformly
    without replacement from its own seeded stream.
    """
    available = int(dist.unmasked_counts().min())
    if not 1 <= k <= sample_size <= available:
        raise InputError(
            f"need 1 <= k <= sample_size <= {available}, got k={k}, "
            f"sample_size={sample_size}"
        )
    out = np.empty(dist.shape[0])
    for i in range(dist.shape[0]):
        cols = _eligible(dist, i)
        pick = _rng(seed, _ISNN_STREAM, i).choice(cols, size=sample_size, replace=False)
        out[i] = np.sort(dist.values[i, pick])[k - 1]
    return _scores(out, "kthisnn")


def draw_sample(n: int, sample_size: int, seed: int, round_index: int = 0) -> np.ndarray:
    """Sorted reference indices of one shared SNN sample."""
    if not 1 <= sample_size <= n:
        raise InputError(f"sample_size must be in [1, {n}], got {sample_size}")
    pick = _rng(seed, _SNN_STREAM, round_index).choice(n, size=sample_size, replace=False)
    return np.sort(pick)


def score_snn(dist: DistanceMatrix, sample_size: Optional[int] = None, seed: int = 42,
              sample=None, round_index: int = 0) -> ScoreVector:
    """
    Distance to the nearest member of one random reference subset.

    The subset is drawn once for all rows. Pass ``sample`` to fix the subset
    explicitly. In a closed-world matrix a row never matches itself, so a
    point whose only sampled reference is itself has no score and raises.
    """
    if sample is None:
        if sample_size is None:
            raise InputError("give either sample_size or sample")
        sample = draw_sample(dist.shape[1], sample_size, seed, round_index)
    sample = np.asarray(sample, dtype=np.int64)
    if sample.size == 0:
        raise InputError("empty sample")
    sub = dist.masked_values()[:, sample]
    out = sub.min(axis=1)
    if np.any(np.isinf(out)):
        raise InputError("a point's sample contains only itself")
    return _scores(out, "snn")


def score_rsnn(dist: DistanceMatrix, r: int, sample_size: Optional[int] = None,
               seed: int = 42, samples=None) -> ScoreVector:
    """
    Mean SNN score over ``r`` independently drawn subsets.

    Round j uses the same draw as ``score_snn(..., round_index=j)``.
    ``samples`` fixes the subsets explicitly, one index array per round.
    """
    if samples is not None:
        samples = list(samples)
        r = len(samples)
    if r < 1:
        raise InputError(f"r must be >= 1, got {r}")
    total = np.zeros(dist.shape[0])
    for j in range(r):
        if samples is None:
            total += score_snn(dist, sample_size, seed, round_index=j).scores
        else:
            total += score_snn(dist, sample=samples[j]).scores
    return _scores(total / r, "rsnn")


# ----------------------------------------------------------------------------
# local detectors
# ----------------------------------------------------------------------------


def _kth_distances(nbrs: NeighborLists, ref_nbrs: Optional[NeighborLists], k: int):
    own = nbrs.head(k)
    ref = own if ref_nbrs is None else ref_nbrs.head(k)
    if ref_nbrs is None and not nbrs.closed_world:
        raise InputError("open-world local scores need the reference neighbor lists")
    return own, ref.distances[:, -1]


def score_slof(nbrs: NeighborLists, k: int,
               ref_nbrs: Optional[NeighborLists] = None) -> ScoreVector:
    """
    Simplified LOF with the inverse k-distance as density.

    ``ref_nbrs`` are the closed-world neighbor lists of the reference set;
    they default to ``nbrs`` in the closed-world case.
    """
    own, ref_kdist = _kth_distances(nbrs, ref_nbrs, k)
    own_kdist = np.maximum(own.distances[:, -1], DENSITY_EPS)
    nbr_density = 1.0 / np.maximum(ref_kdist[own.indices], DENSITY_EPS)
    return _scores(own_kdist * nbr_density.mean(axis=1), "slof")


def _lrd(nbrs: NeighborLists, ref_kdist: np.ndarray) -> np.ndarray:
    reach = np.maximum(ref_kdist[nbrs.indices], nbrs.distances)
    return 1.0 / np.maximum(reach.mean(axis=1), DENSITY_EPS)


def score_lof(nbrs: NeighborLists, k: int,
              ref_nbrs: Optional[NeighborLists] = None) -> ScoreVector:
    """
    Local outlier factor.

    The local reachability density of a point is the inverse mean of
    ``max(kdist(o), d(p, o))`` over its neighbors o; the score is the mean
    density of the neighbors divided by the point's own density.
    """
    own, ref_kdist = _kth_distances(nbrs, ref_nbrs, k)
    ref = own if ref_nbrs is None else ref_nbrs.head(k)
    ref_lrd = _lrd(ref, ref_kdist)
    own_lrd = _lrd(own, ref_kdist)
    return _scores(ref_lrd[own.indices].mean(axis=1) / own_lrd, "lof")


# ----------------------------------------------------------------------------
# unified interface
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DetectorConfig:
    """Which detector to run and with what parameters."""

    name: str = "knnw"
    k: int = 5
    scheme: WeightScheme = field(default_factory=WeightScheme)
    sample_size: Optional[int] = None
    rounds: int = 1
    seed: int = 42
    delta: Optional[float] = None
    alpha: float = 0.5

    def __post_init__(self):
        if self.name not in DETECTORS:
            raise InputError(f"unknown detector {self.name!r}")

    @property
    def needs_reference_neighbors(self) -> bool:
        return self.name in ("lof", "slof")


def compute_scores(config: DetectorConfig, dist: DistanceMatrix,
                   ref_dist: Optional[DistanceMatrix] = None,
                   nbrs: Optional[NeighborLists] = None,
                   ref_nbrs: Optional[NeighborLists] = None) -> ScoreVector:
    """
    Score the rows of ``dist`` with the configured detector.

    Parameters
    ----------
    config : DetectorConfig
    dist : DistanceMatrix
        Query-to-reference distances; closed-world or open-world.
    ref_dist : DistanceMatrix, optional
        Closed-world reference matrix, needed by LOF and SLOF in open-world
        mode.
    nbrs, ref_nbrs : NeighborLists, optional
        Precomputed neighbor lists at least ``config.k`` wide; computed from
        the matrices when omitted.
    """
    name, k = config.name, config.k

    if name == "db":
        if config.delta is None:
            raise InputError("db detector needs delta")
        return _scores(score_db_outlier(dist, config.delta, config.alpha), "db")
    if name == "snn":
        size = config.sample_size or dist.shape[1]
        return score_snn(dist, size, config.seed)
    if name == "rsnn":
        size = config.sample_size or dist.shape[1]
        return score_rsnn(dist, config.rounds, size, config.seed)
    if name == "kthisnn":
        size = config.sample_size or int(dist.unmasked_counts().min())
        return score_kth_isnn(dist, k, size, config.seed)

    if nbrs is None:
        nbrs = knn_from_matrix(dist, k)
    if name == "knnw":
        return score_knnw(nbrs, config.scheme, k)
    if name == "kthnn":
        return score_kthnn(nbrs, k)
    if name == "knn":
        return score_knn(nbrs, k)

    if ref_nbrs is None and not nbrs.closed_world:
        if ref_dist is None:
            raise InputError(f"{name} in open-world mode needs the reference matrix")
        ref_nbrs = knn_from_matrix(ref_dist, k)
    if name == "lof":
        return score_lof(nbrs, k, ref_nbrs)
    return score_slof(nbrs, k, ref_nbrs)
