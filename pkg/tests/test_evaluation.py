import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probout import (Dataset, InputError, ProtocolConfig, benchmark_run, f1_optimal_threshold,
                     rank_stability_check, roc_auc, stratified_kfold)
from probout.ingest import read_report, write_report

from conftest import planted_dataset


def pair_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


def exhaustive_f1(scores, labels):
    """Best F1 over every threshold that splits the sorted scores."""
    best = 0.0
    cuts = sorted(set(scores))
    for t in [-np.inf] + cuts:
        pred = [s > t for s in scores]
        tp = sum(p and l == 1 for p, l in zip(pred, labels))
        fp = sum(p and l == 0 for p, l in zip(pred, labels))
        fn = sum((not p) and l == 1 for p, l in zip(pred, labels))
        f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
        best = max(best, f1)
    return best


def pair_stable(raw, t):
    n = len(raw)
    return all(not (raw[i] < raw[j] and t[i] > t[j]) for i in range(n) for j in range(n))


class TestRocAuc:
    def test_perfect(self):
        assert roc_auc([1, 2, 3], [0, 0, 1]) == 1.0

    def test_inverted(self):
        assert roc_auc([3, 2, 1], [0, 0, 1]) == 0.0

    def test_all_ties(self):
        assert roc_auc([4, 4, 4, 4], [0, 1, 0, 1]) == 0.5

    def test_pair_counting(self, rng):
        scores = rng.integers(0, 5, size=12).astype(float)
        labels = np.r_[np.zeros(6, int), np.ones(6, int)]
        assert roc_auc(scores, labels) == pair_auc(scores, labels)

    def test_single_class(self):
        with pytest.raises(InputError):
            roc_auc([1, 2], [0, 0])


labeled = st.integers(2, 30).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda l: 0 < sum(l) < len(l)),
    )
)


@settings(max_examples=200, deadline=None)
@given(labeled)
def test_auc_complement(case):
    scores, labels = case
    if len(set(scores)) < len(scores):
        return
    s = np.array(scores)
    assert roc_auc(s, labels) + roc_auc(-s, labels) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(labeled, st.sampled_from([np.exp, np.arctan, lambda x: x**3 + 2 * x, lambda x: 7 * x - 1]))
def test_auc_monotone_invariance(case, fn):
    scores, labels = case
    s = np.array(scores)
    t = fn(s)
    # the map must stay strictly increasing in floating point to keep ties
    order = np.argsort(s)
    if np.any(np.diff(t[order])[np.diff(s[order]) > 0] <= 0):
        return
    assert roc_auc(t, labels) == roc_auc(s, labels)


class TestF1:
    def test_separable(self):
        thr, f1 = f1_optimal_threshold([0.1, 0.2, 0.9], [0, 0, 1])
        assert f1 == 1.0
        assert thr == pytest.approx(0.55)

    def test_inseparable(self):
        thr, f1 = f1_optimal_threshold([1.0, 2.0], [1, 0])
        assert f1 == pytest.approx(exhaustive_f1([1.0, 2.0], [1, 0]))
        assert thr == -np.inf

    def test_duplicates_across_classes(self):
        scores = [0.1, 0.5, 0.5, 0.5, 0.9, 0.9]
        labels = [0, 0, 1, 1, 1, 0]
        thr, f1 = f1_optimal_threshold(scores, labels)
        assert f1 == pytest.approx(exhaustive_f1(scores, labels))
        assert thr not in scores

    def test_random_against_exhaustive(self, rng):
        for _ in range(50):
            n = rng.integers(2, 20)
            scores = rng.integers(0, 6, size=n).astype(float).tolist()
            labels = rng.permutation(np.r_[0, 1, rng.integers(0, 2, size=n - 2)]).tolist()
            thr, f1 = f1_optimal_threshold(scores, labels)
            assert f1 == pytest.approx(exhaustive_f1(scores, labels), abs=1e-12)
            # the reported threshold reproduces the reported F1
            pred = np.array(scores) > thr
            tp = np.sum(pred & (np.array(labels) == 1))
            denom = pred.sum() + sum(labels)
            assert (2 * tp / denom if tp else 0.0) == pytest.approx(f1)

    def test_single_class(self):
        with pytest.raises(InputError):
            f1_optimal_threshold([1, 2], [1, 1])


class TestStratifiedKFold:
    def test_exact_split(self):
        labels = np.r_[np.zeros(8, int), np.ones(2, int)]
        folds = stratified_kfold(labels, 2, seed=0)
        for f in (0, 1):
            assert np.sum((folds == f) & (labels == 1)) == 1
            assert np.sum((folds == f) & (labels == 0)) == 4

    def test_leave_one_out(self):
        labels = np.array([0, 0, 0, 1, 1, 1])
        folds = stratified_kfold(labels, 3, seed=5)
        for cls in (0, 1):
            assert sorted(folds[labels == cls]) == [0, 1, 2]

    def test_reproducible(self):
        labels = np.r_[np.zeros(30, int), np.ones(7, int)]
        np.testing.assert_array_equal(stratified_kfold(labels, 2, 42), stratified_kfold(labels, 2, 42))

    def test_small_class(self):
        with pytest.raises(InputError):
            stratified_kfold([0, 0, 0, 1], 2)

    @pytest.mark.parametrize("folds", [2, 3, 5])
    def test_partition_and_balance(self, rng, folds):
        labels = rng.integers(0, 2, size=57)
        labels[:folds] = 0
        labels[folds : 2 * folds] = 1
        a = stratified_kfold(labels, folds, seed=3)
        assert set(a) == set(range(folds))
        for cls in (0, 1):
            counts = np.bincount(a[labels == cls], minlength=folds)
            expected = np.sum(labels == cls) / folds
            assert np.all(np.abs(counts - expected) <= 1)


class TestRankStability:
    def test_identity(self, rng):
        x = rng.normal(size=20)
        assert rank_stability_check(x, x)

    def test_swap_detected(self):
        raw = np.array([1.0, 2.0, 3.0, 4.0])
        assert not rank_stability_check(raw, np.array([1.0, 3.0, 2.0, 4.0]))

    def test_new_ties_allowed(self):
        assert rank_stability_check([1.0, 2.0, 3.0], [0.0, 0.0, 1.0])

    def test_raw_ties_free(self):
        assert rank_stability_check([1.0, 1.0, 2.0], [0.5, 0.2, 0.9])

    def test_length_mismatch(self):
        with pytest.raises(InputError):
            rank_stability_check([1.0], [1.0, 2.0])

    def test_pairwise_oracle(self, rng):
        for _ in range(100):
            raw = rng.integers(0, 6, size=12).astype(float)
            t = rng.integers(0, 6, size=12).astype(float)
            assert rank_stability_check(raw, t) == pair_stable(raw, t)


class TestBenchmark:
    def test_planted_auc(self, planted):
        report = benchmark_run(planted, ProtocolConfig(
            k_grid=[5], schemes=["mean"], distributions=["empirical"], seed=42))
        ((_, (k, auc)),) = report.best_k().items()
        assert auc >= 0.99
        for e in report.entries:
            assert abs(e.auc_raw - e.auc) <= 1e-12
            assert e.rank_stable

    def test_entry_count(self, planted):
        protocol = ProtocolConfig(k_grid=[1], schemes=["mean", "rank", "max"],
                                  distributions=["none", "normal", "exponential", "empirical"])
        report = benchmark_run(planted, protocol)
        assert len(report.entries) == 3 * 4 * 2
        assert len({e.key for e in report.entries}) == len(report.entries)

    def test_rerun_identical(self, planted, tmp_path):
        protocol = ProtocolConfig(k_grid=[1, 3, 8], schemes=["mean", "linear"])
        write_report(tmp_path / "a.csv", benchmark_run(planted, protocol))
        write_report(tmp_path / "b.csv", benchmark_run(planted, protocol))
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_report_round_trip(self, planted, tmp_path):
        report = benchmark_run(planted, ProtocolConfig(k_grid=[2, 4]))
        write_report(tmp_path / "r.csv", report)
        assert read_report(tmp_path / "r.csv").entries == report.entries

    def test_large_k_skipped(self):
        data = planted_dataset(n_inliers=16, n_outliers=4)
        report = benchmark_run(data, ProtocolConfig(k_grid=[2, 50], distributions=["none"]))
        assert {e.k for e in report.entries} == {2}
        assert len(report.warnings) == 2

    def test_local_detectors(self, planted):
        report = benchmark_run(planted, ProtocolConfig(
            k_grid=[5], detectors=["lof", "slof"], distributions=["exponential"]))
        assert len(report.entries) == 4
        assert all(e.scheme == "-" for e in report.entries)
        assert all(e.rank_stable for e in report.entries)

    def test_best_k_ties_to_smallest(self):
        from probout.evaluation import EvaluationReport, ReportEntry

        entries = [ReportEntry("knnw", k, "mean", "none", 0, 0.9, 0.9, True, 0.0, 1.0)
                   for k in (4, 2, 7)]
        assert EvaluationReport(entries).best_k() == {("knnw", "mean", "none"): (2, 0.9)}

    def test_needs_labels(self):
        with pytest.raises(InputError):
            benchmark_run(Dataset(np.eye(5)))
