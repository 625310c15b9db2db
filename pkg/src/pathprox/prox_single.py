"""Exact prox of ``lam * |v| * ||w||_1`` for single-output shallow blocks.

Per hidden neuron we solve

    min_{v, w}  0.5 (v - x)^2 + 0.5 ||w - y||^2 + lam |v| ||w||_1

The signs of the minimizer follow the signs of ``(x, y)``, so the work happens
on magnitudes. Every stationary point with ``s`` active entries in ``w`` has a
closed form; the active entries are the ``s`` largest ``|y_j|``. Candidate
objective values decrease with ``s`` and feasibility is monotone in ``s``, so
the best non-trivial stationary point is found by binary search and compared
against the trivial point ``(0, |y|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import MagnitudeOrder, ShapeError, apply_signs, magnitude_order

FEAS_TOL = 1e-12
TIE_TOL = 1e-12


class SingularCandidateError(ArithmeticError):
    """The closed form for this sparsity level divides by ``1 - s*lam**2 <= 0``."""


class OracleError(AssertionError):
    """Projected-gradient refinement improved on the oracle's global minimizer."""


@dataclass(frozen=True)
class ProxCandidateSingle:
    s: int
    v: float
    w: np.ndarray  # sorted (descending |y|) order
    h: float


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not lam >= 0.0 or math.isinf(lam):
        raise ValueError(f"lam must be a finite non-negative number, got {lam}")
    return lam


def _clamp(a, tol):
    """Snap values in (-tol, 0] to exactly 0."""
    a = np.asarray(a, dtype=np.float64)
    return np.where((a > -tol) & (a <= 0.0), 0.0, a)


def _feas_tol(x_abs, y_abs) -> float:
    scale = max(1.0, float(np.max(x_abs, initial=0.0)),
                float(np.max(y_abs, initial=0.0)))
    return FEAS_TOL * scale


def is_tie(h_new: float, h_best: float) -> bool:
    # relative, so instances at any scale keep their genuine winner
    return abs(h_new - h_best) <= TIE_TOL * max(abs(h_new), abs(h_best))


def sparsity_cap(lam: float, m: int) -> int:
    """Largest ``s <= m`` with ``1 - s*lam**2 > 0`` (that is ``floor(lam**-2)``
    unless ``lam**-2`` is an integer)."""
    if lam == 0.0:
        return m
    s = min(m, int(math.floor(1.0 / (lam * lam))))
    while s > 0 and 1.0 - s * lam * lam <= 0.0:
        s -= 1
    return s


def h_single(v: float, w, x_abs: float, y_abs, lam: float) -> float:
    """``0.5 (v - |x|)^2 + 0.5 sum (w_j - |y_j|)^2 + lam v sum w_j``."""
    w = np.asarray(w, dtype=np.float64)
    y_abs = np.asarray(y_abs, dtype=np.float64)
    d = w - y_abs
    return float(0.5 * (v - x_abs) ** 2 + 0.5 * (d @ d) + lam * v * w.sum())


def prox_objective_single(v, w, x, y, lam) -> float:
    """Objective of the signed problem; used to compare solutions directly."""
    w = np.asarray(w, dtype=np.float64)
    d = w - np.asarray(y, dtype=np.float64)
    return float(0.5 * (v - x) ** 2 + 0.5 * (d @ d)
                 + lam * abs(v) * np.abs(w).sum())


def candidate(s: int, order: MagnitudeOrder, x_abs: float,
              lam: float) -> ProxCandidateSingle:
    """Stationary point with the ``s`` largest-magnitude entries of ``w`` active."""
    m = len(order)
    if not 0 <= s <= m:
        raise ValueError(f"sparsity {s} outside [0, {m}]")
    denom = 1.0 - s * lam * lam
    if denom <= 0.0:
        raise SingularCandidateError(f"1 - s*lam^2 = {denom} <= 0 for s={s}")
    v = (x_abs - lam * order.prefix[s]) / denom
    w = np.zeros(m)
    w[:s] = order.sorted_abs[:s] - lam * v
    return ProxCandidateSingle(s, v, w, h_single(v, w, x_abs, order.sorted_abs, lam))


def _feasible(s: int, order: MagnitudeOrder, x_abs: float, lam: float,
              tol: float) -> bool:
    v = (x_abs - lam * order.prefix[s]) / (1.0 - s * lam * lam)
    if not _clamp(v, tol) > 0.0:
        return False
    return s == 0 or _clamp(order.sorted_abs[s - 1] - lam * v, tol) > 0.0


def best_sparsity(order: MagnitudeOrder, x_abs: float, lam: float) -> int | None:
    """Largest feasible sparsity level in ``[0, sparsity_cap]``, or None.

    Feasible means ``v > 0`` and ``w_s > 0``; since feasibility at ``k``
    implies feasibility at every ``i < k``, a binary search suffices.
    """
    tol = _feas_tol(x_abs, order.sorted_abs)
    if not _feasible(0, order, x_abs, lam, tol):
        return None
    lo, hi = 0, sparsity_cap(lam, len(order))
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _feasible(mid, order, x_abs, lam, tol):
            lo = mid
        else:
            hi = mid - 1
    return lo


def prox_single(x: float, y, lam: float,
                tie_break: str = "sparse") -> tuple[float, np.ndarray]:
    """Global minimizer of ``0.5(v-x)^2 + 0.5||w-y||^2 + lam|v| ||w||_1``.

    Parameters
    ----------
    x : float
        Output weight of the neuron.
    y : (m,) array
        Input weights of the neuron.
    lam : float
        Effective coefficient (step size times regularization strength).
        ``lam == 0`` returns the input unchanged.
    tie_break : {"sparse", "dense"}
        When the trivial point and the best stationary point have equal
        objective, "sparse" keeps the one with fewer nonzeros in ``w``.
        "dense" flips the rule and only exists for fault-injection checks.

    Returns
    -------
    v : float
    w : (m,) array
    """
    lam = _check_lam(lam)
    x = float(x)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ShapeError("y must be a 1-D vector")
    if lam == 0.0:
        return x, y.copy()
    if tie_break not in ("sparse", "dense"):
        raise ValueError(f"unknown tie_break {tie_break!r}")

    order = magnitude_order(y)
    x_abs = abs(x)
    v_best, w_best = 0.0, order.sorted_abs.copy()
    h_best = h_single(0.0, w_best, x_abs, order.sorted_abs, lam)
    support_best = int(np.count_nonzero(w_best))

    s = best_sparsity(order, x_abs, lam)
    if s is not None:
        cand = candidate(s, order, x_abs, lam)
        if cand.h < h_best and not is_tie(cand.h, h_best):
            take = True
        elif is_tie(cand.h, h_best):
            take = s < support_best if tie_break == "sparse" else s > support_best
        else:
            take = False
        if take:
            v_best, w_best = cand.v, cand.w

    w_out = np.empty_like(w_best)
    w_out[order.perm] = w_best
    v_out = float(apply_signs(np.array([v_best]), np.array([x]))[0])
    return v_out, apply_signs(w_out, y)


def projected_gradient_refine(v, w, x_abs, y_abs, lam, steps: int = 1000,
                              step: float = 1e-3):
    """Run projected gradient descent on the magnitude problem for a batch.

    ``v`` is (B, p), ``w`` is (B, m), ``lam`` is a scalar or (B,) array. The
    objective is ``0.5||v-|x|||^2 + 0.5||w-|y|||^2 + lam sum(v) sum(w)`` over
    the non-negative orthant. Zero padding of ``x_abs``/``y_abs`` is inert.
    Returns the refined ``(v, w)``.
    """
    v = np.array(v, dtype=np.float64)
    w = np.array(w, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64).reshape(-1, 1)
    for _ in range(steps):
        sv = v.sum(axis=1, keepdims=True)
        sw = w.sum(axis=1, keepdims=True)
        gv = v - x_abs + lam * sw
        gw = w - y_abs + lam * sv
        np.maximum(v - step * gv, 0.0, out=v)
        np.maximum(w - step * gw, 0.0, out=w)
    return v, w


def h_batch(v, w, x_abs, y_abs, lam) -> np.ndarray:
    """Row-wise magnitude objective for (B, p)/(B, m) arrays."""
    lam = np.asarray(lam, dtype=np.float64).reshape(-1)
    dv = v - x_abs
    dw = w - y_abs
    return (0.5 * (dv * dv).sum(axis=1) + 0.5 * (dw * dw).sum(axis=1)
            + lam * v.sum(axis=1) * w.sum(axis=1))


def prox_single_oracle(x: float, y, lam: float, refine: bool = True,
                       max_m: int = 20) -> tuple[float, np.ndarray]:
    """Exhaustive reference for :func:`prox_single`.

    Scores the trivial point and every sparsity level ``s = 0..m`` whose
    closed form exists and is non-negative, and returns the global argmin
    (ties go to the sparser ``w``, as in :func:`prox_single`). With
    ``refine`` it also runs 1000 projected-gradient steps from the winner and
    raises :class:`OracleError` if they improve the objective by
    more than 1e-9 (relative to ``max(1, h)``).
    """
    lam = _check_lam(lam)
    y = np.asarray(y, dtype=np.float64)
    m = y.shape[0]
    if m > max_m:
        raise ValueError(f"oracle limited to m <= {max_m}, got {m}")
    if lam == 0.0:
        return float(x), y.copy()
    x_abs = abs(float(x))
    y_abs = np.abs(y)
    tol = _feas_tol(x_abs, y_abs)
    order = magnitude_order(y)

    best_v, best_w = 0.0, order.sorted_abs.copy()
    best_h = h_single(best_v, best_w, x_abs, order.sorted_abs, lam)
    for s in range(m + 1):
        if 1.0 - s * lam * lam <= 0.0:
            continue
        cand = candidate(s, order, x_abs, lam)
        v = float(_clamp(cand.v, tol))
        w = _clamp(cand.w, tol)
        if v < 0.0 or (w < 0.0).any():
            continue
        h = h_single(v, w, x_abs, order.sorted_abs, lam)
        if is_tie(h, best_h):
            better = np.count_nonzero(w) < np.count_nonzero(best_w)
        else:
            better = h < best_h
        if better:
            best_v, best_w, best_h = v, w, h

    if refine:
        rv, rw = projected_gradient_refine(
            [[best_v]], best_w[None, :], x_abs, order.sorted_abs[None, :], lam)
        h_ref = float(h_batch(rv, rw, x_abs, order.sorted_abs[None, :], lam)[0])
        if h_ref < best_h - 1e-9 * max(1.0, abs(best_h)):
            raise OracleError(
                f"refinement improved h from {best_h} to {h_ref}")

    w_out = np.empty(m)
    w_out[order.perm] = best_w
    return float(apply_signs(np.array([best_v]), np.array([x]))[0]), apply_signs(w_out, y)


def prox_block_single(v_in, W_in, lam: float,
                      tie_break: str = "sparse") -> tuple[np.ndarray, np.ndarray]:
    """Apply :func:`prox_single` to every hidden neuron ``(v_in[i], W_in[i])``.

    Rows are processed together with array operations; the result matches a
    per-row loop.
    """
    lam = _check_lam(lam)
    v_in = np.asarray(v_in, dtype=np.float64)
    W_in = np.asarray(W_in, dtype=np.float64)
    if v_in.ndim != 1 or W_in.ndim != 2 or v_in.shape[0] != W_in.shape[0]:
        raise ShapeError(
            f"need v of shape (n,) and W of shape (n, m); got {v_in.shape}, "
            f"{W_in.shape}")
    if lam == 0.0:
        return v_in.copy(), W_in.copy()
    if tie_break not in ("sparse", "dense"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    n, m = W_in.shape
    rows = np.arange(n)

    A = np.abs(W_in)
    perm = np.argsort(-A, axis=1, kind="stable")
    S = np.take_along_axis(A, perm, axis=1)
    P = np.zeros((n, m + 1))
    np.cumsum(S, axis=1, out=P[:, 1:])
    xa = np.abs(v_in)
    tol = FEAS_TOL * np.maximum(1.0, np.maximum(xa, A.max(axis=1, initial=0.0)))
    lam2 = lam * lam

    def v_of(s):
        return (xa - lam * P[rows, s]) / (1.0 - s * lam2)

    def feasible(s):
        v = v_of(s)
        ok = _clamp(v, tol) > 0.0
        ws = S[rows, np.maximum(s - 1, 0)] - lam * v
        return ok & ((s == 0) | (_clamp(ws, tol) > 0.0))

    zero = np.zeros(n, dtype=np.int64)
    has = feasible(zero)
    lo = zero.copy()
    hi = np.where(has, sparsity_cap(lam, m), 0)
    while (lo < hi).any():
        active = lo < hi
        mid = (lo + hi + 1) // 2
        f = feasible(mid)
        lo = np.where(active & f, mid, lo)
        hi = np.where(active & ~f, mid - 1, hi)

    s = lo
    v_c = v_of(s)
    cols = np.arange(m)
    W_c = np.where(cols[None, :] < s[:, None], S - lam * v_c[:, None], 0.0)
    h_c = h_batch(v_c[:, None], W_c, xa[:, None], S, lam)
    h_t = h_batch(np.zeros((n, 1)), S, xa[:, None], S, lam)
    support_t = np.count_nonzero(S, axis=1)

    tie = np.abs(h_c - h_t) <= TIE_TOL * np.maximum(np.abs(h_c), np.abs(h_t))
    if tie_break == "sparse":
        tie_pick = s < support_t
    else:
        tie_pick = s > support_t
    take = has & np.where(tie, tie_pick, h_c < h_t)

    v_best = np.where(take, v_c, 0.0)
    W_best = np.where(take[:, None], W_c, S)
    W_out = np.empty_like(W_best)
    np.put_along_axis(W_out, perm, W_best, axis=1)
    return apply_signs(v_best, v_in), apply_signs(W_out, W_in)
