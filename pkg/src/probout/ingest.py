"""
Delimited-text input and output.

Numbers are written with ``repr``, the shortest decimal string that reads
back to the same double, so every write/read round trip is bit-exact.
Files are written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import Dataset
from .exceptions import DataError, InputError

LABEL_VALUES = {
    "0": 0, "no": 0, "normal": 0,
    "1": 1, "yes": 1, "outlier": 1, "anomaly": 1,
}

REPORT_FIELDS = (
    "detector", "k", "scheme", "distribution", "fold",
    "auc_raw", "auc", "rank_stable", "f1_threshold", "f1",
)


@dataclass(frozen=True)
class TabularFileSpec:
    """Where a dataset lives and how to parse it.

    ``label_column`` is a header name or a 0-based column index.
    """

    path: Union[str, os.PathLike]
    delimiter: str = ","
    header: bool = True
    label_column: Optional[Union[str, int]] = None


def _fmt(x) -> str:
    return repr(float(x))


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_float(cell: str, line: int, col: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"row {line}, column {col}: cannot parse {cell!r} as a number")
    if not math.isfinite(value):
        raise DataError(f"row {line}, column {col}: non-finite value {cell!r}")
    return value


def read_dataset(spec: TabularFileSpec) -> Dataset:
    """
    Read a delimited numeric table.

    Rows are points in file order. Error messages give 1-based file line
    and column numbers.
    """
    try:
        with open(spec.path, newline="") as f:
            rows = [(i + 1, row) for i, row in enumerate(csv.reader(f, delimiter=spec.delimiter))]
    except OSError as exc:
        raise DataError(f"cannot read {spec.path}: {exc}")
    rows = [(line, row) for line, row in rows if row and any(c.strip() for c in row)]
    if not rows:
        raise DataError(f"{spec.path} is empty")

    names = None
    if spec.header:
        names = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
        if not rows:
            raise DataError(f"{spec.path} has a header but no data rows")
    width = len(names) if names is not None else len(rows[0][1])

    label_idx = None
    if spec.label_column is not None:
        if isinstance(spec.label_column, int):
            label_idx = spec.label_column
        elif names is not None and spec.label_column in names:
            label_idx = names.index(spec.label_column)
        else:
            try:
                label_idx = int(spec.label_column)
            except ValueError:
                raise DataError(f"no column named {spec.label_column!r}")
        if label_idx < 0:
            label_idx += width
        if not 0 <= label_idx < width:
            raise DataError(f"label column {spec.label_column!r} out of range")

    points, labels = [], []
    for line, row in rows:
        if len(row) != width:
            raise DataError(f"row {line}: expected {width} columns, found {len(row)}")
        values = []
        for col, cell in enumerate(row):
            if col == label_idx:
                key = cell.strip().lower()
                if key not in LABEL_VALUES:
                    raise DataError(f"row {line}, column {col + 1}: bad label {cell!r}")
                labels.append(LABEL_VALUES[key])
            else:
                values.append(_parse_float(cell.strip(), line, col + 1))
        points.append(values)

    if width - (label_idx is not None) == 0:
        raise DataError(f"{spec.path} has no feature columns")
    return Dataset(np.array(points, dtype=np.float64),
                   None if label_idx is None else np.array(labels))


def write_scores(path, ids, raw, probabilities=None) -> None:
    """Write ``id,raw_score[,probability]`` rows."""
    raw = np.asarray(raw, dtype=np.float64)
    ids = list(ids)
    if len(ids) != raw.size:
        raise InputError("ids and scores differ in length")
    header = ["id", "raw_score"]
    columns = [raw]
    if probabilities is not None:
        prob = np.asarray(probabilities, dtype=np.float64)
        if prob.shape != raw.shape:
            raise InputError("raw scores and probabilities differ in length")
        header.append("probability")
        columns.append(prob)
    lines = [",".join(header)]
    for i, ident in enumerate(ids):
        lines.append(",".join([str(ident)] + [_fmt(c[i]) for c in columns]))
    try:
        atomic_write(path, "\n".join(lines) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}")


def read_scores(path):
    """Read a score file back.

    Returns
    -------
    ids : list of str
    raw : np.ndarray
    probabilities : np.ndarray or None
    """
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        rows = list(reader)
    ids = [r[0] for r in rows]
    raw = np.array([float(r[1]) for r in rows])
    prob = np.array([float(r[2]) for r in rows]) if "probability" in header else None
    return ids, raw, prob


def write_report(path, report) -> None:
    """One CSV row per (detector, k, scheme, distribution, fold)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_FIELDS)
    for e in report.entries:
        writer.writerow([
            e.detector, e.k, e.scheme, e.distribution, e.fold,
            _fmt(e.auc_raw), _fmt(e.auc), int(e.rank_stable),
            _fmt(e.f1_threshold), _fmt(e.f1),
        ])
    atomic_write(path, buf.getvalue())


def read_report(path):
    from .evaluation import EvaluationReport, ReportEntry

    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    entries = [
        ReportEntry(
            r["detector"], int(r["k"]), r["scheme"], r["distribution"], int(r["fold"]),
            float(r["auc_raw"]), float(r["auc"]), r["rank_stable"] == "1",
            float(r["f1_threshold"]), float(r["f1"]),
        )
        for r in rows
    ]
    return EvaluationReport(entries)


def write_curve(path, curve) -> None:
    """Contrast curve as ``m,<measures...>,f1_optimal_threshold,f1`` rows."""
    measures = list(curve.contrast)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["m", *measures, "f1_optimal_threshold", "f1"])
    for i, m in enumerate(curve.m):
        writer.writerow([int(m), *(_fmt(curve.contrast[k][i]) for k in measures),
                         _fmt(curve.f1_threshold[i]), _fmt(curve.f1[i])])
    atomic_write(path, buf.getvalue())
