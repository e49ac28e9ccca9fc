"""Probabilistic transformation of distance-based outlier scores."""

from .core import (Dataset, DistanceMatrix, NeighborLists, cross_distances, euclidean,
                   knn_from_matrix, minmax_scale, pairwise_distances)
from .detectors import (DetectorConfig, ScoreVector, WeightScheme, compute_scores,
                        score_db_outlier, score_kth_isnn, score_kthnn, score_knn,
                        score_knnw, score_lof, score_rsnn, score_slof, score_snn, weights)
from .evaluation import (EvaluationReport, ProtocolConfig, benchmark_run,
                         f1_optimal_threshold, rank_stability_check, roc_auc,
                         stratified_kfold)
from .exceptions import DataError, FitError, InputError, ProboutError
from .normalization import (ContrastCurve, DistanceDistribution, NormalizationSet,
                            build_normalization_set, cdf, contrast_curve, contrast_scan,
                            fit, statistical_distance, transform_scores)

__version__ = "0.1.0"
