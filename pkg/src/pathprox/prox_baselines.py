"""Baseline regularizer operators: l1 soft-thresholding and per-row l1-ball
projection (a hard bound on the l_inf operator norm)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import ShapeError


@dataclass(frozen=True)
class ParsevalConstraint:
    """``||M||_inf <= radius``, i.e. every row of ``M`` has l1-norm at most ``radius``."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0 or not np.isfinite(self.radius):
            raise ValueError(f"radius must be positive and finite, got {self.radius}")


def soft_threshold(z, tau: float) -> np.ndarray:
    """Prox of ``tau * ||.||_1``: ``sign(z) * max(|z| - tau, 0)``."""
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    z = np.asarray(z, dtype=np.float64)
    if tau == 0:
        return z.copy()
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


def project_l1_ball(v, r: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{u : ||u||_1 <= r}``.

    Sorts the magnitudes and finds the shrinkage threshold ``theta`` with
    ``sum(max(|v| - theta, 0)) == r``. Points already in the ball, boundary
    included, are returned unchanged.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {v.shape}")
    a = np.abs(v)
    if a.sum() <= r:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.shape[0] + 1)
    # last index where the running threshold stays below the sorted value
    rho = np.flatnonzero(u * k > css - r)[-1]
    theta = (css[rho] - r) / (rho + 1)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def project_linf_opnorm(M, c: ParsevalConstraint) -> np.ndarray:
    """Project every row of ``M`` onto the l1-ball of radius ``c.radius``."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {M.shape}")
    r = c.radius
    out = M.copy()
    norms = np.abs(M).sum(axis=1)
    for i in np.flatnonzero(norms > r):
        out[i] = project_l1_ball(M[i], r)
    return out
