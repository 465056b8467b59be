"""Dataset representation, CSV ingestion and min-max scaling."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

CLASSIFICATION = "classification"
REGRESSION = "regression"
KINDS = (CLASSIFICATION, REGRESSION)

CATALOG_VERSION = "hm-catalog/1"

CLASSIFICATION_MEASURES = (
    "kDN", "DCP", "TD", "CLD", "CB", "F1", "N1", "N2", "LSC", "LSR", "U", "De",
)
REGRESSION_MEASURES = ("CFE", "LE", "S1", "S2", "S3", "HB", "TD", "De")
UNBOUNDED_MEASURES = ("LE", "S3")


class HardnessError(ValueError):
    """Base class for input problems raised by this package."""


class SchemaError(HardnessError):
    pass


class IngestionError(HardnessError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class ValidationError(HardnessError):
    pass


class ParameterError(HardnessError):
    pass


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """A numeric feature matrix with a categorical or continuous target.

    For classification, ``target`` holds integer class codes assigned in order
    of first appearance and ``classes`` the original label strings.
    """

    features: np.ndarray
    target: np.ndarray
    kind: str
    name: str = ""
    classes: tuple = ()
    target_name: str = "target"
    feature_names: tuple = ()

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim != 2:
            raise ValidationError(f"features must be 2-D, got shape {X.shape}")
        y = np.asarray(self.target)
        if y.shape != (X.shape[0],):
            raise ValidationError("target length does not match the number of rows")
        if self.kind not in KINDS:
            raise ValidationError(f"unknown kind {self.kind!r}")
        if not np.all(np.isfinite(X)):
            raise ValidationError("features contain NaN or infinite values")
        if self.kind == REGRESSION:
            y = y.astype(float)
            if not np.all(np.isfinite(y)):
                raise ValidationError("target contains NaN or infinite values")
        else:
            y = y.astype(np.intp)
            classes = self.classes or tuple(str(c) for c in range(int(y.max()) + 1))
            object.__setattr__(self, "classes", tuple(classes))
            if len(np.unique(y)) < 2:
                raise ValidationError("classification target needs at least 2 classes")
        object.__setattr__(self, "features", _readonly(X))
        object.__setattr__(self, "target", _readonly(y))
        if not self.feature_names:
            names = tuple(f"f{j}" for j in range(X.shape[1]))
            object.__setattr__(self, "feature_names", names)

    @classmethod
    def from_labels(cls, features, labels: Sequence, name="", **kwargs) -> "Dataset":
        """Build a classification dataset, coding labels by first appearance."""
        codes, classes = encode_labels(labels)
        return cls(features, codes, CLASSIFICATION, name=name, classes=classes, **kwargs)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.n)

    @property
    def is_classification(self) -> bool:
        return self.kind == CLASSIFICATION

    def class_counts(self) -> dict:
        if not self.is_classification:
            return {}
        counts = np.bincount(self.target, minlength=len(self.classes))
        return {c: int(k) for c, k in zip(self.classes, counts)}

    def take(self, rows) -> "Dataset":
        """Row subset (or permutation) keeping the class coding."""
        rows = np.asarray(rows)
        return Dataset(self.features[rows], self.target[rows], self.kind, name=self.name,
                       classes=self.classes, target_name=self.target_name,
                       feature_names=self.feature_names)

    def sidecar(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "m": self.m,
            "kind": self.kind,
            "target": self.target_name,
            "class_counts": self.class_counts(),
        }

    def to_csv(self, path) -> None:
        rows = []
        for i in range(self.n):
            row = [repr(float(v)) for v in self.features[i]]
            if self.is_classification:
                row.append(self.classes[self.target[i]])
            else:
                row.append(repr(float(self.target[i])))
            rows.append(row)
        header = list(self.feature_names) + [self.target_name]
        with atomic_open(path) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)

    def write_sidecar(self, path) -> None:
        with atomic_open(path) as fh:
            json.dump(self.sidecar(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def encode_labels(labels) -> tuple[np.ndarray, tuple]:
    """Map opaque labels to integer codes ordered by first appearance."""
    index = {}
    codes = np.empty(len(labels), dtype=np.intp)
    for i, lab in enumerate(labels):
        key = str(lab)
        if key not in index:
            index[key] = len(index)
        codes[i] = index[key]
    return codes, tuple(index)


def _parse_real(cell: str) -> float:
    value = float(cell)
    if not math.isfinite(value):
        raise ValueError("not finite")
    return value


def load_csv(path, target, kind: str, name: str | None = None) -> Dataset:
    """Read a headered CSV file into a :class:`Dataset`.

    Parameters
    ----------
    path : path-like
        UTF-8 CSV file with a mandatory header row.
    target : str or int
        Target column, by header name or 0-based position.
    kind : {"classification", "regression"}
        Classification targets are kept verbatim as class names.

    Raises
    ------
    SchemaError
        Unknown target column, empty file or ragged rows.
    IngestionError
        A feature (or regression target) cell that is not a finite real. The
        reported row is 1-based and counts data rows only.
    ValidationError
        A classification target with a single class.
    """
    if kind not in KINDS:
        raise ParameterError(f"kind must be one of {KINDS}, got {kind!r}")
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row expected") from None
        body = [row for row in reader if row]

    if isinstance(target, int) or (isinstance(target, str) and target.isdigit()
                                   and target not in header):
        t = int(target)
        if not 0 <= t < len(header):
            raise SchemaError(f"{path}: target column index {t} out of range")
    else:
        if target not in header:
            raise SchemaError(f"{path}: no column named {target!r}")
        t = header.index(target)
    feat_cols = [j for j in range(len(header)) if j != t]
    if not feat_cols:
        raise SchemaError(f"{path}: no feature columns")

    X = np.empty((len(body), len(feat_cols)))
    raw_target = []
    for r, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise SchemaError(f"{path}: row {r} has {len(row)} fields, expected {len(header)}")
        for k, j in enumerate(feat_cols):
            try:
                X[r - 1, k] = _parse_real(row[j])
            except ValueError:
                raise IngestionError(
                    f"{path}: row {r}, column {header[j]!r}: cannot use {row[j]!r} as a finite real",
                    row=r, column=header[j]) from None
        raw_target.append(row[t].strip())

    name = name if name is not None else path.stem
    feature_names = tuple(header[j] for j in feat_cols)
    if kind == CLASSIFICATION:
        codes, classes = encode_labels(raw_target)
        if len(classes) < 2:
            raise ValidationError(f"{path}: target {header[t]!r} has a single class")
        return Dataset(X, codes, kind, name=name, classes=classes,
                       target_name=header[t], feature_names=feature_names)
    y = np.empty(len(raw_target))
    for r, cell in enumerate(raw_target, start=1):
        try:
            y[r - 1] = _parse_real(cell)
        except ValueError:
            raise IngestionError(f"{path}: row {r}, column {header[t]!r}: cannot use {cell!r} as a finite real",
                                 row=r, column=header[t]) from None
    return Dataset(X, y, kind, name=name, target_name=header[t], feature_names=feature_names)


def _minmax(a):
    lo = a.min(axis=0)
    hi = a.max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (a - lo) / safe, 0.0)
    return out, lo, hi


@dataclass(frozen=True)
class ScaledView:
    """Min-max scaled copy of a dataset; constant columns map to zero."""

    features: np.ndarray
    target: np.ndarray
    feature_min: np.ndarray
    feature_max: np.ndarray
    target_min: float | None = None
    target_max: float | None = None
    dataset: Dataset | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]


def scale(ds) -> ScaledView:
    """Scale features (and a continuous target) to [0, 1] column by column.

    Accepts a :class:`Dataset` or an existing :class:`ScaledView`; scaling is
    idempotent.
    """
    base = ds.dataset if isinstance(ds, ScaledView) else ds
    X, lo, hi = _minmax(np.asarray(ds.features, dtype=float))
    if base is not None:
        continuous = base.kind == REGRESSION
    else:
        continuous = ds.target.dtype.kind == "f"
    if continuous:
        y, tlo, thi = _minmax(np.asarray(ds.target, dtype=float))
        tlo, thi = float(tlo), float(thi)
    else:
        y, tlo, thi = np.asarray(ds.target), None, None
    return ScaledView(_readonly(X), _readonly(y), _readonly(lo), _readonly(hi), tlo, thi, base)


@dataclass
class HardnessProfile:
    """Per-instance hardness values, one named column per measure.

    Every column is oriented so that larger values mean harder instances.
    """

    names: tuple
    values: np.ndarray
    ids: np.ndarray = None
    catalog: str = CATALOG_VERSION
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.names = tuple(self.names)
        self.values = np.asarray(self.values, dtype=float).reshape(-1, len(self.names))
        if self.ids is None:
            self.ids = np.arange(self.values.shape[0])

    def __getitem__(self, name) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def __len__(self):
        return self.values.shape[0]

    def as_dict(self) -> dict:
        return {name: self.values[:, k].copy() for k, name in enumerate(self.names)}

    def select(self, names) -> "HardnessProfile":
        cols = [self.names.index(nm) for nm in names]
        return HardnessProfile(tuple(names), self.values[:, cols], self.ids, self.catalog, dict(self.meta))

    def to_csv(self, path) -> None:
        with atomic_open(path) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("instance_id",) + self.names)
            for i, row in zip(self.ids, self.values):
                writer.writerow([int(i)] + [format_value(v) for v in row])


def format_value(v: float) -> str:
    return f"{float(v):.9g}"


def read_table(path) -> tuple[list, np.ndarray]:
    """Read a numeric CSV written by this package (header + float rows)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(c) for c in row] for row in reader if row]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


class atomic_open:
    """Write to a temporary sibling file and rename it into place on success."""

    def __init__(self, path):
        self.path = Path(path)
        self.tmp = self.path.with_name(f".{self.path.name}.tmp{os.getpid()}")

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.fh = open(self.tmp, "w", newline="", encoding="utf-8")
        return self.fh

    def __exit__(self, exc_type, exc, tb):
        self.fh.close()
        if exc_type is None:
            os.replace(self.tmp, self.path)
        else:
            self.tmp.unlink(missing_ok=True)
        return False
