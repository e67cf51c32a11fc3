"""Tabular ingestion: CSV loading, validation, z-score normalization and splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class DataError(ValueError):
    """Raised when input data violates the dataset contract."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Rows of real feature vectors with a numeric target and optional labels.

    Arrays are copied and made read-only on construction.
    """

    rows: np.ndarray
    targets: np.ndarray
    feature_names: tuple[str, ...]
    labels: np.ndarray | None = None
    target_name: str = "target"

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        if rows.ndim != 2:
            raise DataError(f"rows must be 2-D, got shape {rows.shape}")
        if rows.shape[1] < 1:
            raise DataError("dataset needs at least one feature")
        if targets.shape != (rows.shape[0],):
            raise DataError(
                f"targets length {targets.shape} does not match {rows.shape[0]} rows"
            )
        if not np.all(np.isfinite(rows)):
            bad = np.argwhere(~np.isfinite(rows))[0]
            raise DataError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
        if not np.all(np.isfinite(targets)):
            bad = int(np.argwhere(~np.isfinite(targets))[0][0])
            raise DataError(f"non-finite target at row {bad}")
        names = tuple(self.feature_names)
        if len(names) != rows.shape[1]:
            raise DataError(f"{len(names)} feature names for {rows.shape[1]} columns")
        object.__setattr__(self, "rows", _frozen(rows))
        object.__setattr__(self, "targets", _frozen(targets))
        object.__setattr__(self, "feature_names", names)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (rows.shape[0],):
                raise DataError("labels length does not match rows")
            object.__setattr__(self, "labels", _frozen(labels))

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def take(self, index: Sequence[int] | np.ndarray) -> "Dataset":
        index = np.asarray(index, dtype=int)
        return Dataset(
            rows=self.rows[index],
            targets=self.targets[index],
            feature_names=self.feature_names,
            labels=None if self.labels is None else self.labels[index],
            target_name=self.target_name,
        )

    def with_rows(self, rows: np.ndarray) -> "Dataset":
        return Dataset(rows, self.targets, self.feature_names, self.labels, self.target_name)


@dataclass(frozen=True)
class NormParams:
    """Per-column mean and population standard deviation.

    Columns with ``delta == 0`` are flagged constant and pass through
    :meth:`apply` unchanged, so column indices stay stable.
    """

    mean: np.ndarray
    delta: np.ndarray
    constant: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        delta = np.atleast_1d(np.asarray(self.delta, dtype=float))
        if mean.shape != delta.shape:
            raise DataError("mean and delta shapes differ")
        if np.any(delta < 0):
            raise DataError("delta must be non-negative")
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "delta", _frozen(delta))
        object.__setattr__(self, "constant", _frozen(delta == 0))

    @classmethod
    def fit(cls, values: np.ndarray) -> "NormParams":
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.shape[0] == 0:
            raise DataError("cannot fit normalization on empty data")
        return cls(values.mean(axis=0), values.std(axis=0))

    def apply(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        scale = np.where(self.constant, 1.0, self.delta)
        shift = np.where(self.constant, 0.0, self.mean)
        return (values - shift) / scale

    def invert(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        scale = np.where(self.constant, 1.0, self.delta)
        shift = np.where(self.constant, 0.0, self.mean)
        return values * scale + shift

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "delta": self.delta.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NormParams":
        return cls(np.asarray(d["mean"], dtype=float), np.asarray(d["delta"], dtype=float))


def _parse_float(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"non-numeric value {cell!r} at row {row}, column {column!r}") from None
    if not math.isfinite(value):
        raise DataError(f"non-finite value {cell!r} at row {row}, column {column!r}")
    return value


def load_csv(
    path: str | Path,
    target: str,
    label: str | None = None,
    features: Sequence[str] | None = None,
) -> Dataset:
    """Load a header-first, comma-delimited UTF-8 CSV into a :class:`Dataset`.

    ``features`` defaults to every column that is neither the target nor the
    label. Row numbers in error messages are 1-based data rows.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such data file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"empty file: {path}")
        header = [h.strip() for h in header]
        if target not in header:
            raise DataError(f"target column {target!r} not in header of {path}")
        if label is not None and label not in header:
            raise DataError(f"label column {label!r} not in header of {path}")
        if features is None:
            features = [h for h in header if h not in (target, label)]
        missing = [f for f in features if f not in header]
        if missing:
            raise DataError(f"feature columns {missing} not in header of {path}")
        fidx = [header.index(f) for f in features]
        tidx = header.index(target)
        lidx = header.index(label) if label is not None else None

        rows, targets, labels = [], [], []
        for lineno, rec in enumerate(reader, start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(
                    f"ragged row {lineno}: {len(rec)} cells, header has {len(header)}"
                )
            rows.append([_parse_float(rec[i], lineno, header[i]) for i in fidx])
            targets.append(_parse_float(rec[tidx], lineno, target))
            if lidx is not None:
                labels.append(rec[lidx].strip())
    if not rows:
        raise DataError(f"empty dataset: {path} has no data rows")
    return Dataset(
        rows=np.array(rows, dtype=float),
        targets=np.array(targets, dtype=float),
        feature_names=tuple(features),
        labels=np.array(labels) if lidx is not None else None,
        target_name=target,
    )


def load_features(path: str | Path, feature_names: Sequence[str]) -> np.ndarray:
    """Read only the named feature columns from a CSV (other columns ignored)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such data file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"empty file: {path}")
        header = [h.strip() for h in header]
        missing = [f for f in feature_names if f not in header]
        if missing:
            raise DataError(
                f"dimension mismatch: columns {missing} missing from {path}"
            )
        idx = [header.index(f) for f in feature_names]
        out = []
        for lineno, rec in enumerate(reader, start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"ragged row {lineno}")
            out.append([_parse_float(rec[i], lineno, header[i]) for i in idx])
    if not out:
        raise DataError(f"empty dataset: {path} has no data rows")
    return np.array(out, dtype=float)


def write_csv(path: str | Path, data: Dataset, label_name: str = "label") -> None:
    path = Path(path)
    header = list(data.feature_names) + [data.target_name]
    if data.labels is not None:
        header.append(label_name)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(data)):
            rec = [repr(float(v)) for v in data.rows[i]] + [repr(float(data.targets[i]))]
            if data.labels is not None:
                rec.append(str(data.labels[i]))
            w.writerow(rec)


def zscore_normalize(data: Dataset) -> tuple[Dataset, NormParams]:
    """Z-score every non-constant feature with population statistics."""
    if len(data) == 0:
        raise DataError("cannot normalize an empty dataset")
    params = NormParams.fit(data.rows)
    return data.with_rows(params.apply(data.rows)), params


def denormalize(data: Dataset, params: NormParams) -> Dataset:
    return data.with_rows(params.invert(data.rows))


def split_indices(n: int, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n_test = int(round(n * test_fraction))
    if n_test == 0 or n_test == n:
        raise DataError(
            f"test_fraction {test_fraction} leaves an empty partition for {n} rows"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def split(data: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded train/test partition; both sides keep the original row order."""
    train_idx, test_idx = split_indices(len(data), test_fraction, seed)
    return data.take(train_idx), data.take(test_idx)
