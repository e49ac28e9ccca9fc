"""
Command-line interface.

    probout score      raw outlier scores
    probout normalize  raw scores plus probabilities
    probout evaluate   cross-validated AUC report
    probout contrast-scan  contrast over m-neighborhood sizes

Exit codes: 0 success, 2 usage error, 3 data error, 4 fit error. Thread
count for distance computation comes from ``PROBOUT_THREADS``.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .core import Dataset, cross_distances, minmax_scale, pairwise_distances
from .detectors import DETECTORS, SCHEMES, DetectorConfig, WeightScheme, compute_scores
from .evaluation import ProtocolConfig, benchmark_run
from .exceptions import DataError, FitError, InputError
from .ingest import TabularFileSpec, read_dataset, write_curve, write_report, write_scores
from .normalization import (DISTRIBUTIONS, MEASURES, STRATEGIES, build_normalization_set,
                            contrast_curve, fit, transform_scores)

EXIT_USAGE, EXIT_DATA, EXIT_FIT = 2, 3, 4


def parse_grid(text: str) -> list:
    """Parse ``"1-100"``, ``"1,2,5"`` or a mix such as ``"1-5,10,20-22"``."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = part.split("-")
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer grid {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty grid")
    return sorted(set(out))


def _label_column(text):
    try:
        return int(text)
    except ValueError:
        return text


def _add_input(p):
    p.add_argument("input", help="delimited data file")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", dest="header", action="store_false")
    p.add_argument("--label-column", type=_label_column, default=None,
                   help="header name or 0-based index of the label column")
    p.add_argument("--scale", action="store_true",
                   help="min-max scale features before computing distances")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=42)


def _add_detector(p, single_k=True):
    p.add_argument("--detector", choices=DETECTORS, default="knnw")
    if single_k:
        p.add_argument("--k", type=int, default=5)
    p.add_argument("--scheme", choices=SCHEMES, default="mean")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--sample-size", type=int, default=None)
    p.add_argument("--rounds", type=int, default=1, help="RSNN repetitions")
    p.add_argument("--delta", type=float, default=None, help="DB-outlier radius")
    p.add_argument("--alpha", type=float, default=0.5, help="DB-outlier fraction")


def _add_mode(p):
    p.add_argument("--mode", choices=("closed", "open"), default="closed")
    p.add_argument("--reference", default=None, help="reference data file (open mode)")


def _add_normalization(p, strategy=True):
    p.add_argument("--distribution", choices=DISTRIBUTIONS, default="empirical")
    if strategy:
        p.add_argument("--strategy", choices=STRATEGIES, default="full")
        p.add_argument("--m", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probout",
        description="Distance-based outlier scores and their probabilistic transformation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="write raw outlier scores")
    _add_input(p)
    _add_detector(p)
    _add_mode(p)

    p = sub.add_parser("normalize", help="write raw scores and probabilities")
    _add_input(p)
    _add_detector(p)
    _add_mode(p)
    _add_normalization(p)

    p = sub.add_parser("evaluate", help="cross-validated AUC report")
    _add_input(p)
    _add_detector(p, single_k=False)
    p.add_argument("--k-grid", type=parse_grid, default=parse_grid("1-100"))
    p.add_argument("--schemes", default=None,
                   help="comma-separated schemes; defaults to --scheme")
    p.add_argument("--distributions", default=",".join(DISTRIBUTIONS))
    p.add_argument("--strategy", choices=STRATEGIES, default="full")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--folds", type=int, default=2)

    p = sub.add_parser("contrast-scan", help="contrast over m-neighborhood sizes")
    _add_input(p)
    _add_detector(p)
    _add_normalization(p, strategy=False)
    p.add_argument("--m-grid", type=parse_grid, default=parse_grid("1-200"))
    return parser


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------


def _load(args, path) -> Dataset:
    data = read_dataset(TabularFileSpec(path, args.delimiter, args.header, args.label_column))
    return minmax_scale(data) if args.scale else data


def _detector(args, k=None) -> DetectorConfig:
    return DetectorConfig(
        name=args.detector,
        k=args.k if k is None else k,
        scheme=WeightScheme(args.scheme, args.s, args.a, args.b),
        sample_size=args.sample_size,
        rounds=args.rounds,
        seed=args.seed,
        delta=args.delta,
        alpha=args.alpha,
    )


def _scored(args):
    """Scores of the input plus the closed-world reference matrix."""
    data = _load(args, args.input)
    config = _detector(args)
    if args.mode == "open":
        if args.reference is None:
            raise InputError("--mode open needs --reference")
        ref = _load(args, args.reference)
        ref_dist = pairwise_distances(ref)
        dist = cross_distances(data, ref)
        return compute_scores(config, dist, ref_dist), ref_dist
    dist = pairwise_distances(data)
    return compute_scores(config, dist), dist


def cmd_score(args) -> int:
    scores, _ = _scored(args)
    write_scores(args.output, range(len(scores)), scores)
    return 0


def cmd_normalize(args) -> int:
    scores, ref_dist = _scored(args)
    nset = build_normalization_set(ref_dist, args.strategy, args.m)
    distribution = fit(args.distribution, nset)
    print(f"normalization set: {nset.strategy} ({len(nset)} distances)", file=sys.stderr)
    print(f"distribution: {distribution.describe()}", file=sys.stderr)
    prob = transform_scores(scores, distribution)
    write_scores(args.output, range(len(scores)), scores, prob)
    return 0


def cmd_evaluate(args) -> int:
    data = _load(args, args.input)
    if data.labels is None:
        raise DataError("evaluate needs a labeled input (--label-column)")
    schemes = tuple(args.schemes.split(",")) if args.schemes else (args.scheme,)
    for s in schemes:
        WeightScheme(s)
    kinds = tuple(args.distributions.split(","))
    for kind in kinds:
        if kind not in DISTRIBUTIONS:
            raise InputError(f"unknown distribution {kind!r}")
    protocol = ProtocolConfig(
        k_grid=args.k_grid, schemes=schemes, distributions=kinds,
        detectors=(args.detector,), folds=args.folds, seed=args.seed,
        strategy=args.strategy, m=args.m, s=args.s, a=args.a, b=args.b,
    )
    report = benchmark_run(data, protocol)
    write_report(args.output, report)
    for msg in report.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    for (det, scheme, kind), (k, auc) in report.best_k().items():
        print(f"{det} scheme={scheme} distribution={kind}: best k={k} mean AUC={auc!r}")
    return 0


def cmd_contrast_scan(args) -> int:
    data = _load(args, args.input)
    if data.labels is None:
        raise DataError("contrast-scan needs a labeled input (--label-column)")
    dist = pairwise_distances(data)
    scores = compute_scores(_detector(args), dist)
    grid = [m for m in args.m_grid if m <= data.n - 1]
    if not grid:
        raise InputError(f"m grid has no value <= {data.n - 1}")
    curve = contrast_curve(dist, scores, data.labels, grid, args.distribution)
    write_curve(args.output, curve)
    for measure in MEASURES:
        best = curve.best_m(measure)
        value = curve.contrast[measure][np.searchsorted(curve.m, best)]
        print(f"{measure}: best m={best} contrast={value!r}")
    return 0


COMMANDS = {
    "score": cmd_score,
    "normalize": cmd_normalize,
    "evaluate": cmd_evaluate,
    "contrast-scan": cmd_contrast_scan,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DataError as exc:
        print(f"probout: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FitError as exc:
        print(f"probout: fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except InputError as exc:
        parser.print_usage(sys.stderr)
        print(f"probout: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
