"""Small dense-array helpers shared by the prox, model and training code.

Weight matrices and data batches are plain ``numpy.ndarray`` objects of dtype
float64 stored in C (row-major) order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ShapeError(ValueError):
    """Raised when array shapes are inconsistent."""


class InputValidationError(ValueError):
    """Raised on NaN/Inf or otherwise malformed external input."""


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Return `data` as a finite, C-contiguous 2-D float64 array."""
    a = np.ascontiguousarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputValidationError(f"{name} contains NaN or Inf")
    return a


def as_vector(data, name: str = "vector") -> np.ndarray:
    a = np.ascontiguousarray(data, dtype=np.float64)
    if a.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputValidationError(f"{name} contains NaN or Inf")
    return a


@dataclass(frozen=True)
class MagnitudeOrder:
    """Descending-magnitude view of a vector.

    Attributes
    ----------
    perm : int array
        ``sorted_abs[k] == abs(original[perm[k]])``; ties keep original order.
    sorted_abs : float array
        Absolute values, non-increasing.
    prefix : float array
        ``prefix[k] = sorted_abs[:k].sum()``, length ``len + 1``.
    """

    perm: np.ndarray
    sorted_abs: np.ndarray
    prefix: np.ndarray

    def __len__(self) -> int:
        return self.perm.shape[0]


def magnitude_order(v) -> MagnitudeOrder:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {v.shape}")
    if np.isnan(v).any():
        raise InputValidationError("vector contains NaN")
    a = np.abs(v)
    # stable sort on the negated magnitudes keeps equal entries in index order
    perm = np.argsort(-a, kind="stable")
    sorted_abs = a[perm]
    prefix = np.zeros(a.shape[0] + 1)
    np.cumsum(sorted_abs, out=prefix[1:])
    return MagnitudeOrder(perm, sorted_abs, prefix)


def matmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("matmul expects two 2-D arrays")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def sign_plus(v) -> np.ndarray:
    """Elementwise sign with sign(0) = +1 (also for -0.0)."""
    return np.where(np.asarray(v) < 0, -1.0, 1.0)


def apply_signs(magnitudes, signs_of) -> np.ndarray:
    """Return ``sign(signs_of) * magnitudes`` using the sign(0) = +1 convention."""
    magnitudes = np.asarray(magnitudes, dtype=np.float64)
    signs_of = np.asarray(signs_of, dtype=np.float64)
    if magnitudes.shape != signs_of.shape:
        raise ShapeError(
            f"length mismatch: {magnitudes.shape} vs {signs_of.shape}")
    if (magnitudes < 0).any():
        raise InputValidationError("magnitudes must be non-negative")
    return sign_plus(signs_of) * magnitudes


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 generator; the stream is identical on every platform."""
    return np.random.Generator(np.random.PCG64(seed))
