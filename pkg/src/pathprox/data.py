"""Label-first CSV datasets with per-column min-max scaling, and the
synthetic two-class blob generator.

The scaling of ``data.csv`` lives in ``data.csv.scale.json`` so a test file
can be scaled with the training file's ranges.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import InputValidationError, make_rng


@dataclass(frozen=True)
class ColumnScale:
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def fit(cls, raw) -> "ColumnScale":
        raw = np.asarray(raw, dtype=np.float64)
        return cls(raw.min(axis=0), raw.max(axis=0))

    def apply(self, raw) -> np.ndarray:
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        out = (np.asarray(raw, dtype=np.float64) - self.lo) / safe
        return np.clip(np.where(span > 0, out, 0.0), 0.0, 1.0)

    def invert(self, scaled) -> np.ndarray:
        return self.lo + np.asarray(scaled, dtype=np.float64) * (self.hi - self.lo)

    def to_json(self) -> dict:
        return {"min": self.lo.tolist(), "max": self.hi.tolist()}

    @classmethod
    def from_json(cls, d) -> "ColumnScale":
        return cls(np.asarray(d["min"], dtype=np.float64),
                   np.asarray(d["max"], dtype=np.float64))


@dataclass
class Dataset:
    features: np.ndarray  # (N, m), scaled into [0, 1]
    labels: np.ndarray  # (N,) int64
    split: str = "train"
    scale: ColumnScale | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
            raise InputValidationError(
                f"features {self.features.shape} and labels {self.labels.shape} disagree")
        if not np.isfinite(self.features).all():
            raise InputValidationError("features contain NaN or Inf")
        if self.labels.size and self.labels.min() < 0:
            raise InputValidationError("labels must be non-negative")

    def __len__(self):
        return self.features.shape[0]


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".scale.json")


def read_raw_csv(path):
    """Parse a label-first CSV into ``(labels, raw_features)``.

    Errors name the offending line. A header row is not allowed.
    """
    labels, rows = [], []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise InputValidationError(f"{path}:{lineno}: need a label and at least one feature")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InputValidationError(
                    f"{path}:{lineno}: expected {width} columns, got {len(row)}")
            try:
                lab = float(row[0])
            except ValueError:
                raise InputValidationError(f"{path}:{lineno}: bad label {row[0]!r}") from None
            if not lab.is_integer() or lab < 0:
                raise InputValidationError(
                    f"{path}:{lineno}: label must be a non-negative integer, got {row[0]!r}")
            try:
                vals = [float(c) for c in row[1:]]
            except ValueError as exc:
                raise InputValidationError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in vals):
                raise InputValidationError(f"{path}:{lineno}: NaN or Inf feature")
            labels.append(int(lab))
            rows.append(vals)
    if not rows:
        raise InputValidationError(f"{path}: no data rows")
    return np.asarray(labels, dtype=np.int64), np.asarray(rows, dtype=np.float64)


def load_csv(path, scale: ColumnScale | None = None, split: str = "train") -> Dataset:
    """Load a dataset and scale its features into [0, 1].

    The scale comes from ``scale`` if given, else from the sidecar next to
    the file, else it is fitted on the file itself.
    """
    labels, raw = read_raw_csv(path)
    if scale is None:
        side = sidecar_path(path)
        if side.exists():
            with open(side) as fh:
                scale = ColumnScale.from_json(json.load(fh))
        else:
            scale = ColumnScale.fit(raw)
    if scale.lo.shape != (raw.shape[1],):
        raise InputValidationError(
            f"{path}: scale has {scale.lo.shape[0]} columns, data has {raw.shape[1]}")
    return Dataset(scale.apply(raw), labels, split, scale)


def write_csv(path, labels, raw_features, scale: ColumnScale | None = None) -> ColumnScale:
    """Write label-first rows and the scale sidecar; returns the scale."""
    raw = np.asarray(raw_features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scale is None:
        scale = ColumnScale.fit(raw)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for lab, row in zip(labels, raw):
            w.writerow([int(lab)] + [repr(float(v)) for v in row])
    with open(sidecar_path(path), "w") as fh:
        json.dump(scale.to_json(), fh)
    return scale


def make_blobs(n_samples: int = 2000, m: int = 20, seed: int = 0,
               separation: float = 4.0):
    """Two Gaussian classes with unit covariance whose means are ``separation`` apart.

    Returns ``(labels, raw_features)``; classes alternate so they are balanced.
    """
    rng = make_rng(seed)
    direction = rng.normal(size=m)
    direction /= np.linalg.norm(direction)
    labels = np.arange(n_samples, dtype=np.int64) % 2
    centers = (labels[:, None] - 0.5) * separation * direction[None, :]
    return labels, centers + rng.normal(size=(n_samples, m))


def train_test_split(labels, raw, test_fraction: float, seed: int):
    """Shuffle with ``seed`` and split; the scale is fitted on the training part."""
    if not 0 <= test_fraction < 1:
        raise ValueError("test_fraction must be in [0, 1)")
    order = make_rng(seed).permutation(len(labels))
    n_test = int(round(test_fraction * len(labels)))
    te, tr = order[:n_test], order[n_test:]
    scale = ColumnScale.fit(raw[tr])
    return (Dataset(scale.apply(raw[tr]), labels[tr], "train", scale),
            Dataset(scale.apply(raw[te]), labels[te], "test", scale))


def split_dataset(ds: Dataset, test_fraction: float, seed: int):
    """Shuffle an already scaled dataset with ``seed`` and split it."""
    if not 0 <= test_fraction < 1:
        raise ValueError("test_fraction must be in [0, 1)")
    order = make_rng(seed).permutation(len(ds))
    n_test = int(round(test_fraction * len(ds)))
    te, tr = order[:n_test], order[n_test:]
    return (Dataset(ds.features[tr], ds.labels[tr], "train", ds.scale),
            Dataset(ds.features[te], ds.labels[te], "test", ds.scale))


def blob_datasets(seed: int = 0, n_samples: int = 2000, m: int = 20,
                  separation: float = 4.0, test_fraction: float = 0.2):
    """Seeded synthetic train/test pair used by the examples and the acceptance suite."""
    labels, raw = make_blobs(n_samples, m, seed, separation)
    return train_test_split(labels, raw, test_fraction, seed)
