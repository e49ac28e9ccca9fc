"""
Detection metrics and the cross-validated benchmark protocol.

The benchmark works open-world: for each fold the training part is the
reference set and the held-out part is scored against it. Normalization
sets and distributions are fitted on the training part only, so test scores
never influence their own transformation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, cross_distances, knn_from_matrix, pairwise_distances
from .detectors import DetectorConfig, WeightScheme, compute_scores
from .exceptions import InputError
from .normalization import build_normalization_set, fit, transform_scores

log = logging.getLogger(__name__)

_FOLD_STREAM = 3


def _check_binary(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise InputError("scores and labels must be 1-D and of equal length")
    pos = labels == 1
    if not (pos.any() and (~pos).any()):
        raise InputError("need at least one outlier and one inlier label")
    return scores, pos


def roc_auc(scores, labels) -> float:
    """
    ROC AUC as the Mann-Whitney statistic.

    Equals the fraction of (outlier, inlier) pairs in which the outlier
    scores higher, with ties counted as one half.
    """
    scores, pos = _check_binary(scores, labels)
    n = scores.size
    order = np.argsort(scores, kind="stable")
    sorted_scores = scores[order]
    # midranks: every member of a tie group gets the group's mean rank
    starts = np.flatnonzero(np.r_[True, sorted_scores[1:] != sorted_scores[:-1]])
    ends = np.r_[starts[1:], n]
    group_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(n)
    ranks[order] = np.repeat(group_rank, ends - starts)

    n_pos = int(pos.sum())
    n_neg = n - n_pos
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def f1_optimal_threshold(scores, labels):
    """
    Threshold with the best outlier-class F1.

    Points with ``score > threshold`` are predicted outliers. Candidates are
    the midpoints between consecutive distinct scores plus -inf and +inf;
    ties in F1 go to the larger threshold.

    Returns
    -------
    (threshold, f1) : tuple of float
    """
    scores, pos = _check_binary(scores, labels)
    uniq = np.unique(scores)
    mids = uniq[:-1] + (uniq[1:] - uniq[:-1]) / 2.0
    candidates = np.r_[-np.inf, mids, np.inf]

    s_pos = np.sort(scores[pos])
    s_neg = np.sort(scores[~pos])
    tp = s_pos.size - np.searchsorted(s_pos, candidates, side="right")
    fp = s_neg.size - np.searchsorted(s_neg, candidates, side="right")
    fn = s_pos.size - tp
    denom = 2 * tp + fp + fn
    f1 = np.where(denom > 0, 2 * tp / np.maximum(denom, 1), 0.0)

    best = np.flatnonzero(f1 == f1.max())[-1]
    return float(candidates[best]), float(f1[best])


def stratified_kfold(labels, folds: int = 2, seed: int = 42) -> np.ndarray:
    """
    Fold assignment that keeps the class balance in every fold.

    Each class is shuffled with the seed and dealt round-robin over the
    folds; the deal continues across classes so fold sizes stay balanced.
    """
    labels = np.asarray(labels)
    if folds < 2:
        raise InputError(f"need at least 2 folds, got {folds}")
    assignment = np.empty(labels.size, dtype=np.int64)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, _FOLD_STREAM])))
    offset = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < folds:
            raise InputError(
                f"class {cls} has {members.size} members, fewer than {folds} folds"
            )
        members = rng.permutation(members)
        assignment[members] = (offset + np.arange(members.size)) % folds
        offset = (offset + members.size) % folds
    return assignment


def rank_stability_check(raw, transformed) -> bool:
    """
    True when no strictly ordered pair of raw scores is inverted.

    Raw ties impose nothing, and a transformation may merge distinct raw
    scores into a tie without failing the check.
    """
    raw = np.asarray(raw, dtype=np.float64)
    transformed = np.asarray(transformed, dtype=np.float64)
    if raw.shape != transformed.shape:
        raise InputError("raw and transformed scores differ in length")
    if raw.size < 2:
        return True
    order = np.argsort(raw, kind="stable")
    r = raw[order]
    t = transformed[order]
    starts = np.flatnonzero(np.r_[True, r[1:] != r[:-1]])
    group_min = np.minimum.reduceat(t, starts)
    group_max = np.maximum.reduceat(t, starts)
    # every group must sit at or above everything in the groups below it
    below = np.maximum.accumulate(group_max)[:-1]
    return bool(np.all(group_min[1:] >= below))


# ----------------------------------------------------------------------------
# benchmark protocol
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ProtocolConfig:
    """Grid of configurations evaluated by :func:`benchmark_run`."""

    k_grid: Sequence[int] = tuple(range(1, 101))
    schemes: Sequence[str] = ("mean",)
    distributions: Sequence[str] = ("none", "normal", "exponential", "empirical")
    detectors: Sequence[str] = ("knnw",)
    folds: int = 2
    seed: int = 42
    strategy: str = "full"
    m: Optional[int] = None
    s: float = 1.0
    a: float = 1.0
    b: float = 1.0


@dataclass(frozen=True)
class ReportEntry:
    detector: str
    k: int
    scheme: str
    distribution: str
    fold: int
    auc_raw: float
    auc: float
    rank_stable: bool
    f1_threshold: float
    f1: float

    @property
    def key(self):
        return (self.detector, self.k, self.scheme, self.distribution, self.fold)


@dataclass
class EvaluationReport:
    entries: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def sorted(self) -> "EvaluationReport":
        return EvaluationReport(sorted(self.entries, key=lambda e: e.key), list(self.warnings))

    def mean_auc(self) -> dict:
        """Mean test AUC across folds per (detector, k, scheme, distribution)."""
        groups = {}
        for e in self.entries:
            groups.setdefault(e.key[:4], []).append(e.auc)
        return {key: float(np.mean(v)) for key, v in sorted(groups.items())}

    def best_k(self) -> dict:
        """
        Best k per (detector, scheme, distribution) by mean test AUC, ties
        to the smallest k. The choice is made on test folds, as in the
        usual benchmark protocol, so it is optimistic.
        """
        best = {}
        for (det, k, scheme, kind), auc in self.mean_auc().items():
            key = (det, scheme, kind)
            if key not in best or auc > best[key][1] or (auc == best[key][1] and k < best[key][0]):
                best[key] = (k, auc)
        return best


def _scheme_label(detector: str, scheme: str) -> str:
    return scheme if detector == "knnw" else "-"


def benchmark_run(data: Dataset, protocol: ProtocolConfig = ProtocolConfig()) -> EvaluationReport:
    """
    Cross-validated, open-world evaluation of a detector grid.

    For every fold the training part is the reference set. Its closed-world
    matrix provides the normalization set and, for local detectors, the
    reference neighbor lists; the test part is scored against it. AUC is
    recorded for raw and transformed scores.
    """
    if data.labels is None:
        raise InputError("benchmark needs a labeled dataset")
    report = EvaluationReport()
    assignment = stratified_kfold(data.labels, protocol.folds, protocol.seed)
    schemes = {s: WeightScheme(s, protocol.s, protocol.a, protocol.b) for s in protocol.schemes}
    k_grid = sorted({int(k) for k in protocol.k_grid})

    for fold in range(protocol.folds):
        train = data.subset(np.flatnonzero(assignment != fold))
        test = data.subset(np.flatnonzero(assignment == fold))
        ref_dist = pairwise_distances(train)
        dist = cross_distances(test, train)

        nset = build_normalization_set(ref_dist, protocol.strategy, protocol.m)
        fitted = {kind: fit(kind, nset) for kind in protocol.distributions}

        usable = [k for k in k_grid if 1 <= k <= train.n - 1]
        for k in k_grid:
            if k not in usable:
                msg = f"fold {fold}: k={k} exceeds training size {train.n} - 1, skipped"
                log.warning(msg)
                report.warnings.append(msg)
        if not usable:
            continue
        kmax = usable[-1]
        nbrs = knn_from_matrix(dist, kmax)
        ref_nbrs = knn_from_matrix(ref_dist, kmax)

        for det in protocol.detectors:
            det_schemes = protocol.schemes if det == "knnw" else protocol.schemes[:1]
            for k in usable:
                for scheme_name in det_schemes:
                    config = DetectorConfig(det, k, schemes[scheme_name], seed=protocol.seed)
                    raw = compute_scores(config, dist, ref_dist, nbrs, ref_nbrs)
                    auc_raw = roc_auc(raw, test.labels)
                    for kind, distribution in fitted.items():
                        prob = transform_scores(raw, distribution)
                        thr, f1 = f1_optimal_threshold(prob, test.labels)
                        report.entries.append(ReportEntry(
                            det, k, _scheme_label(det, scheme_name), kind, fold,
                            auc_raw, roc_auc(prob, test.labels),
                            rank_stability_check(raw, prob), thr, f1,
                        ))
    return report.sorted()
