"""Subject records, the fixed 13-feature schema, and CSV ingest / export.

Schema order is the contract: it fixes the CSV column layout, the feature
matrix columns and the node ordering used by the Bayes net. The features are
smell identification total (UPSIT), REM sleep questionnaire total (RBDSQ),
four CSF concentrations, three CSF ratios derived from them, and four striatal
binding ratios from DaT imaging.

CSV layout: UTF-8, header row, exactly 15 columns, subject_id first, the 13
features in schema order, then label (0 healthy, 1 PD). Floats are written
with 9 significant digits, which round-trips exactly for any file this
package itself writes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .errors import (
    DivisionByZeroDenominator,
    EmptyDataset,
    MissingColumn,
    NonNumericCell,
    RangeViolation,
)

HEALTHY = 0
PD = 1
LABEL_NAMES = {HEALTHY: "Healthy", PD: "PD"}

FEATURE_NAMES = (
    "upsit_total",
    "rbdsq_total",
    "csf_abeta42",
    "csf_alpha_syn",
    "csf_ptau181",
    "csf_ttau",
    "ratio_ttau_abeta",
    "ratio_ptau_abeta",
    "ratio_ptau_ttau",
    "sbr_caudate_left",
    "sbr_caudate_right",
    "sbr_putamen_left",
    "sbr_putamen_right",
)
N_FEATURES = len(FEATURE_NAMES)
CSV_COLUMNS = ("subject_id",) + FEATURE_NAMES + ("label",)

# integer-scored questionnaires: name -> inclusive range
INTEGER_FEATURES = {"upsit_total": (0, 40), "rbdsq_total": (0, 12)}
# CSF concentrations must be strictly positive (pg/mL)
POSITIVE_FEATURES = ("csf_abeta42", "csf_alpha_syn", "csf_ptau181", "csf_ttau")
# ratios and binding ratios are non-negative
NONNEGATIVE_FEATURES = (
    "ratio_ttau_abeta",
    "ratio_ptau_abeta",
    "ratio_ptau_ttau",
    "sbr_caudate_left",
    "sbr_caudate_right",
    "sbr_putamen_left",
    "sbr_putamen_right",
)
# Stored ratios are rounded to 9 significant digits, whose worst-case
# relative rounding error is 5e-9 (half an ulp in the ninth digit), so the
# consistency check must sit above that.
RATIO_REL_TOL = 1e-8

_IDX = {name: i for i, name in enumerate(FEATURE_NAMES)}


def compute_ratios(abeta42: float, ttau: float, ptau181: float):
    """(ttau/abeta42, ptau181/abeta42, ptau181/ttau) for positive inputs."""
    if abeta42 == 0 or ttau == 0:
        raise DivisionByZeroDenominator(
            "ratio denominators csf_abeta42 and csf_ttau must be nonzero")
    return ttau / abeta42, ptau181 / abeta42, ptau181 / ttau


@dataclass(frozen=True)
class SubjectRecord:
    subject_id: str
    upsit_total: int
    rbdsq_total: int
    csf_abeta42: float
    csf_alpha_syn: float
    csf_ptau181: float
    csf_ttau: float
    ratio_ttau_abeta: float
    ratio_ptau_abeta: float
    ratio_ptau_ttau: float
    sbr_caudate_left: float
    sbr_caudate_right: float
    sbr_putamen_left: float
    sbr_putamen_right: float
    label: int

    def feature_vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=np.float64)

    def validate(self) -> None:
        """Raise RangeViolation on the first schema invariant this record breaks."""
        problems = record_violations(self.feature_vector(), self.label)
        if problems:
            column, message = problems[0]
            raise RangeViolation(message, column=column)


def record_violations(vector, label) -> list:
    """All (column, message) invariant violations for one feature vector.

    Checks run in schema order so the first entry is the leftmost problem.
    """
    out = []
    vals = {name: float(vector[i]) for i, name in enumerate(FEATURE_NAMES)}
    for name, (lo, hi) in INTEGER_FEATURES.items():
        v = vals[name]
        if not np.isfinite(v) or v != int(v):
            out.append((name, f"{name} must be an integer score, got {v}"))
        elif not lo <= v <= hi:
            out.append((name, f"{name} must lie in [{lo}, {hi}], got {v}"))
    for name in POSITIVE_FEATURES:
        if not vals[name] > 0:
            out.append((name, f"{name} must be > 0 pg/mL, got {vals[name]}"))
    for name in NONNEGATIVE_FEATURES:
        if not vals[name] >= 0:
            out.append((name, f"{name} must be >= 0, got {vals[name]}"))
    # ratio consistency only when the denominators are usable
    if vals["csf_abeta42"] > 0 and vals["csf_ttau"] > 0:
        expected = compute_ratios(vals["csf_abeta42"], vals["csf_ttau"], vals["csf_ptau181"])
        for name, want in zip(("ratio_ttau_abeta", "ratio_ptau_abeta", "ratio_ptau_ttau"), expected):
            got = vals[name]
            if want == 0:
                ok = got == 0
            else:
                ok = abs(got - want) <= RATIO_REL_TOL * abs(want)
            if not ok:
                out.append((name, f"{name}={got} disagrees with recomputed {want}"))
    if label not in (HEALTHY, PD):
        out.append(("label", f"label must be 0 or 1, got {label}"))
    order = {name: i for i, name in enumerate(FEATURE_NAMES + ("label",))}
    out.sort(key=lambda item: order[item[0]])
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable column store: ids, (n, 13) float features, int labels.

    ``normalization`` is None for raw data; after min-max scaling it holds the
    per-feature (min, max) pairs the values were scaled with, and every stored
    feature value lies in [0, 1].
    """

    subject_ids: tuple
    features: np.ndarray
    labels: np.ndarray
    schema: tuple = FEATURE_NAMES
    normalization: tuple | None = None

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        labs = np.ascontiguousarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[1] != len(self.schema):
            raise ValueError("feature matrix width must match the schema")
        if feats.shape[0] != labs.shape[0] or feats.shape[0] != len(self.subject_ids):
            raise ValueError("ids, features and labels must have equal length")
        feats.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))

    def __len__(self) -> int:
        return self.features.shape[0]

    def class_counts(self) -> tuple:
        """(healthy count, pd count)."""
        pd_count = int(np.count_nonzero(self.labels == PD))
        return len(self) - pd_count, pd_count

    def subset(self, indices) -> "Dataset":
        idx = list(indices)
        return replace(
            self,
            subject_ids=tuple(self.subject_ids[i] for i in idx),
            features=self.features[idx] if idx else np.empty((0, len(self.schema))),
            labels=self.labels[idx] if idx else np.empty((0,), dtype=np.int64),
        )

    def concat(self, other: "Dataset") -> "Dataset":
        if self.schema != other.schema or self.normalization != other.normalization:
            raise ValueError("can only concatenate datasets with identical schema and scaling")
        return replace(
            self,
            subject_ids=self.subject_ids + other.subject_ids,
            features=np.vstack([self.features, other.features]),
            labels=np.concatenate([self.labels, other.labels]),
        )

    def to_records(self) -> list:
        """Materialize SubjectRecords. Intended for raw (unnormalized) data."""
        out = []
        for sid, row, label in zip(self.subject_ids, self.features, self.labels):
            out.append(SubjectRecord(sid, int(row[0]), int(row[1]), *map(float, row[2:]),
                                     label=int(label)))
        return out

    def equals(self, other: "Dataset") -> bool:
        return (
            self.schema == other.schema
            and self.subject_ids == other.subject_ids
            and self.normalization == other.normalization
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


def dataset_from_records(records: Iterable[SubjectRecord]) -> Dataset:
    records = list(records)
    if records:
        feats = np.array([r.feature_vector() for r in records])
        labels = np.array([r.label for r in records], dtype=np.int64)
    else:
        feats = np.empty((0, N_FEATURES))
        labels = np.empty((0,), dtype=np.int64)
    return Dataset(tuple(r.subject_id for r in records), feats, labels)


def class_counts(ds: Dataset) -> tuple:
    return ds.class_counts()


def _parse_number(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise NonNumericCell(f"row {row}, column {column}: {cell!r} is not a number",
                             row=row, column=column) from None
    if not np.isfinite(value):
        raise NonNumericCell(f"row {row}, column {column}: {cell!r} is not finite",
                             row=row, column=column)
    return value


def _check_header(header) -> None:
    if header is None:
        raise MissingColumn("file is empty, expected a header row")
    got = tuple(h.strip() for h in header)
    if got != CSV_COLUMNS:
        missing = [c for c in CSV_COLUMNS if c not in got]
        extra = [c for c in got if c not in CSV_COLUMNS]
        detail = []
        if missing:
            detail.append("missing " + ", ".join(missing))
        if extra:
            detail.append("unexpected " + ", ".join(extra))
        if not detail:
            detail.append("columns out of order")
        raise MissingColumn("header mismatch: " + "; ".join(detail))


def _parse_row(cells, row_number):
    """(subject_id, vector, label) for one data row; raises on bad cells.

    Row numbers are 1-based over data rows (the header is row 0).
    """
    if len(cells) != len(CSV_COLUMNS):
        raise NonNumericCell(
            f"row {row_number}: expected {len(CSV_COLUMNS)} cells, got {len(cells)}",
            row=row_number)
    sid = cells[0]
    vector = np.empty(N_FEATURES)
    for i, name in enumerate(FEATURE_NAMES):
        vector[i] = _parse_number(cells[i + 1], row_number, name)
    raw_label = _parse_number(cells[-1], row_number, "label")
    label = int(raw_label) if raw_label == int(raw_label) else -1
    return sid, vector, label


def ingest_csv(path, strict: bool = True):
    """Read a cohort CSV.

    strict=True returns a Dataset and raises on the first bad row.
    strict=False returns (Dataset, skipped_row_count), silently dropping rows
    with non-numeric cells or invariant violations. Header problems are fatal
    in both modes.
    """
    ids, vectors, labels = [], [], []
    skipped = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None))
        for row_number, cells in enumerate(reader, start=1):
            if not cells:
                continue
            try:
                sid, vector, label = _parse_row(cells, row_number)
                problems = record_violations(vector, label)
                if problems:
                    column, message = problems[0]
                    raise RangeViolation(f"row {row_number}: {message}",
                                         row=row_number, column=column)
            except (NonNumericCell, RangeViolation):
                if strict:
                    raise
                skipped += 1
                continue
            ids.append(sid)
            vectors.append(vector)
            labels.append(label)
    feats = np.array(vectors) if vectors else np.empty((0, N_FEATURES))
    ds = Dataset(tuple(ids), feats, np.array(labels, dtype=np.int64))
    if strict:
        return ds
    return ds, skipped


def format_value(x: float) -> str:
    """Decimal rendering with 9 significant digits; integral values lose the dot."""
    return f"{float(x):.9g}"


def nine_digit(x: float) -> float:
    """The closest double to the 9-significant-digit decimal rendering of x."""
    return float(format_value(x))


def export_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for sid, row, label in zip(ds.subject_ids, ds.features, ds.labels):
            writer.writerow([sid, *(format_value(v) for v in row), int(label)])


def validate_file(path) -> list:
    """Every invariant violation in a CSV as (row, column, kind, message) tuples.

    Unlike lenient ingest this does not stop at a row's first problem.
    """
    findings = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None))
        for row_number, cells in enumerate(reader, start=1):
            if not cells:
                continue
            try:
                _, vector, label = _parse_row(cells, row_number)
            except NonNumericCell as err:
                findings.append((row_number, err.column or "", "NonNumericCell", str(err)))
                continue
            for column, message in record_violations(vector, label):
                findings.append((row_number, column, "RangeViolation", message))
    return findings
