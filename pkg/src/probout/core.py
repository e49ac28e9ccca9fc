"""
Datasets, Euclidean distance matrices and nearest-neighbor extraction.

Two neighbor semantics are supported:

- closed-world (transductive): the query set *is* the reference set. The
  distance matrix is square and its diagonal is masked, so a point is never
  its own neighbor.
- open-world (inductive): queries are scored against a fixed reference set.
  Nothing is masked, so a query that duplicates a reference point finds it at
  distance 0.

Masking is structural (a boolean array next to the values) rather than a
sentinel distance, which keeps the stored values usable for fitting
distributions.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import InputError

THREADS_ENV = "PROBOUT_THREADS"

# rows per block when computing distances; bounds the (rows, n, d) temporary
_BLOCK_ELEMENTS = 2**22


# ----------------------------------------------------------------------------
# data containers
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """
    A numeric n x d point matrix with optional binary labels.

    Parameters
    ----------
    points : array-like of shape (n, d)
        Finite feature values. A 1-D input is read as n points with d = 1.
    labels : array-like of shape (n,), optional
        0 for normal points, 1 for outliers.
    """

    points: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2:
            raise InputError(f"points must be 2-D, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise InputError("points contain NaN or infinite values")
        points = points.copy()
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (points.shape[0],):
                raise InputError(
                    f"expected {points.shape[0]} labels, got shape {labels.shape}"
                )
            if not np.all((labels == 0) | (labels == 1)):
                raise InputError("labels must be 0 or 1")
            labels = labels.astype(np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def subset(self, indices) -> "Dataset":
        labels = None if self.labels is None else self.labels[indices]
        return Dataset(self.points[indices], labels)


@dataclass(frozen=True)
class DistanceMatrix:
    """
    Distances from m query points (rows) to n reference points (columns).

    ``self_mask[i, j]`` is True where row i and column j are the same point.
    Closed-world matrices mask their diagonal; open-world matrices have no
    mask.
    """

    values: np.ndarray
    self_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InputError(f"distance matrix must be 2-D, got {values.shape}")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise InputError("distances must be finite and nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.self_mask is not None:
            mask = np.asarray(self.self_mask, dtype=bool)
            if mask.shape != values.shape:
                raise InputError("self_mask must match the matrix shape")
            mask.setflags(write=False)
            object.__setattr__(self, "self_mask", mask)

    @property
    def shape(self):
        return self.values.shape

    @property
    def closed_world(self) -> bool:
        return self.self_mask is not None and bool(self.self_mask.any())

    def masked_values(self, fill=np.inf) -> np.ndarray:
        """Copy of the values with self-pairs replaced by ``fill``."""
        out = np.array(self.values)
        if self.self_mask is not None:
            out[self.self_mask] = fill
        return out

    def unmasked_counts(self) -> np.ndarray:
        """Number of eligible reference points per row."""
        if self.self_mask is None:
            return np.full(self.shape[0], self.shape[1])
        return self.shape[1] - self.self_mask.sum(axis=1)


@dataclass(frozen=True)
class NeighborLists:
    """Sorted k-nearest distances and reference indices, one row per query."""

    distances: np.ndarray
    indices: np.ndarray
    closed_world: bool = field(default=False)

    @property
    def k(self) -> int:
        return self.distances.shape[1]

    def head(self, k: int) -> "NeighborLists":
        """The first ``k`` neighbors of every row."""
        if not 1 <= k <= self.k:
            raise InputError(f"k must be in [1, {self.k}], got {k}")
        return NeighborLists(
            self.distances[:, :k], self.indices[:, :k], self.closed_world
        )


# ----------------------------------------------------------------------------
# distances
# ----------------------------------------------------------------------------


def euclidean(a, b) -> float:
    """Euclidean distance between two vectors of equal length."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def minmax_scale(data: Dataset) -> Dataset:
    """Map every feature column linearly onto [0, 1].

    Constant columns become all zeros.
    """
    x = data.points
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (x - lo) / safe, 0.0)
    return Dataset(scaled, data.labels)


def thread_count() -> int:
    """Worker threads for distance computation, from ``PROBOUT_THREADS``."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}")


def _distance_block(q, r):
    # (a - b)**2 == (b - a)**2 bit for bit, so square matrices come out
    # exactly symmetric
    diff = q[:, None, :] - r[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _distances(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    m, n = q.shape[0], r.shape[0]
    rows = max(1, _BLOCK_ELEMENTS // max(1, n * q.shape[1]))
    starts = range(0, m, rows)
    out = np.empty((m, n))

    def work(start):
        out[start : start + rows] = _distance_block(q[start : start + rows], r)

    threads = thread_count()
    if threads == 1 or len(starts) == 1:
        for start in starts:
            work(start)
    else:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, starts))
    return out


def pairwise_distances(ref: Dataset) -> DistanceMatrix:
    """Closed-world distance matrix of a dataset with itself."""
    if ref.n < 2:
        raise InputError("need at least 2 points for a closed-world matrix")
    values = _distances(ref.points, ref.points)
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix(values, np.eye(ref.n, dtype=bool))


def cross_distances(query: Dataset, ref: Dataset) -> DistanceMatrix:
    """Open-world distances from each query point to each reference point."""
    if query.d != ref.d:
        raise InputError(f"dimension mismatch: {query.d} vs {ref.d} features")
    return DistanceMatrix(_distances(query.points, ref.points))


# ----------------------------------------------------------------------------
# neighbors
# ----------------------------------------------------------------------------


def knn_from_matrix(dist: DistanceMatrix, k: int) -> NeighborLists:
    """
    The k smallest unmasked distances of every row, in ascending order.

    Ties are broken by ascending reference index.
    """
    k = int(k)
    available = int(dist.unmasked_counts().min()) if dist.shape[0] else 0
    if k < 1 or k > available:
        raise InputError(f"k must be in [1, {available}], got {k}")
    values = dist.masked_values()
    # stable sort keeps equal distances in index order
    order = np.argsort(values, axis=1, kind="stable")[:, :k]
    return NeighborLists(
        np.take_along_axis(values, order, axis=1),
        order,
        closed_world=dist.closed_world,
    )
