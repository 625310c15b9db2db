"""1-path-norm of a shallow network and the Lipschitz bounds it competes with.

For ``h(x) = V.T @ act(W @ x)`` with ``V`` of shape (n, p) and ``W`` of shape
(n, m), the (l_inf -> l_1) Lipschitz constant satisfies

    L <= sum_ijk |W_ij V_ik| <= (sum of l1 norms of V's columns) * max_i ||W_i||_1
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import ActivationKind
from .numerics import ShapeError, as_matrix


@dataclass
class ShallowParams:
    """Weights of one shallow block: ``V`` is (n, p), ``W`` is (n, m)."""

    V: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        self.V = as_matrix(self.V, "V")
        self.W = as_matrix(self.W, "W")
        if self.V.shape[0] != self.W.shape[0]:
            raise ShapeError(
                f"hidden dimension mismatch: V has {self.V.shape[0]} rows, "
                f"W has {self.W.shape[0]}")

    @property
    def hidden(self) -> int:
        return self.W.shape[0]

    @property
    def inputs(self) -> int:
        return self.W.shape[1]

    @property
    def outputs(self) -> int:
        return self.V.shape[1]

    def copy(self) -> "ShallowParams":
        return ShallowParams(self.V.copy(), self.W.copy())


@dataclass(frozen=True)
class LipschitzReport:
    path_norm: float
    product_bound: float
    empirical_ratio_max: float
    samples: int


def path_norm_1(params: ShallowParams) -> float:
    """Sum over all input-hidden-output paths of |W_ij V_ik|, via row sums."""
    return float(np.abs(params.W).sum(axis=1) @ np.abs(params.V).sum(axis=1))


def product_bound(params: ShallowParams) -> float:
    v_norm = np.abs(params.V).sum()  # sum of l1 norms of the columns of V
    w_norm = np.abs(params.W).sum(axis=1).max(initial=0.0)
    return float(v_norm * w_norm)


def empirical_lipschitz_ratio(params: ShallowParams, activation: ActivationKind,
                              rng: np.random.Generator, samples: int = 10_000,
                              low: float = -1.0, high: float = 1.0,
                              chunk: int = 4096) -> float:
    """Largest sampled ``||h(x) - h(u)||_1 / ||x - u||_inf`` over random pairs.

    Pairs are drawn uniformly from the box ``[low, high]^m``. Coincident
    pairs are skipped. This is a lower estimate of the Lipschitz constant.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    m = params.inputs
    best = 0.0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        x = rng.uniform(low, high, size=(k, m))
        u = rng.uniform(low, high, size=(k, m))
        hx = activation(x @ params.W.T) @ params.V
        hu = activation(u @ params.W.T) @ params.V
        num = np.abs(hx - hu).sum(axis=1)
        den = np.abs(x - u).max(axis=1, initial=0.0)
        keep = den > 0
        if keep.any():
            best = max(best, float((num[keep] / den[keep]).max()))
        done += k
    return best


def lipschitz_report(params: ShallowParams, activation: ActivationKind,
                     rng: np.random.Generator,
                     samples: int = 10_000) -> LipschitzReport:
    return LipschitzReport(
        path_norm=path_norm_1(params),
        product_bound=product_bound(params),
        empirical_ratio_max=empirical_lipschitz_ratio(
            params, activation, rng, samples),
        samples=samples,
    )
