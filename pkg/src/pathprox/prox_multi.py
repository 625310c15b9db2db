"""Exact prox of the 1-path-norm for multi-output shallow blocks.

For hidden neuron ``i`` with outgoing weights ``x = V[i]`` (length p) and
incoming weights ``y = W[i]`` (length m) we solve

    min_{v, w}  0.5||v - x||^2 + 0.5||w - y||^2 + lam ||v||_1 ||w||_1

As in the single-output case the signs follow ``(x, y)``. A stationary point
with ``s_v`` active entries in ``v`` and ``s_w`` in ``w`` is given in closed
form with ``mu = 1 / (1 - s_v s_w lam^2)``. Its objective decreases when either
sparsity level grows, and feasibility is monotone in both levels, so only the
pairs on the maximal feasibility boundary (MFB) need scoring. A staircase walk
finds them in ``O(m + p)`` steps using prefix sums.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .numerics import MagnitudeOrder, ShapeError, apply_signs, magnitude_order
from .prox_single import (
    FEAS_TOL,
    TIE_TOL,
    OracleError,
    SingularCandidateError,
    _check_lam,
    _clamp,
    _feas_tol,
    h_batch,
    is_tie,
    projected_gradient_refine,
)

# pairs with s_v * s_w * lam^2 >= 1 - BOUND_MARGIN are treated as infeasible
BOUND_MARGIN = 1e-15


class SparsityPair(NamedTuple):
    s_v: int
    s_w: int


@dataclass(frozen=True)
class ProxCandidateMulti:
    pair: SparsityPair
    v: np.ndarray  # sorted order
    w: np.ndarray  # sorted order
    h: float


@dataclass
class MfbSet:
    pairs: list[SparsityPair] = field(default_factory=list)
    evaluations: int = 0  # feasibility tests performed by the walk

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def h_multi(v, w, x_abs, y_abs, lam: float) -> float:
    """``0.5||v-|x|||^2 + 0.5||w-|y|||^2 + lam * sum(v) * sum(w)``."""
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    dv = v - x_abs
    dw = w - y_abs
    return float(0.5 * (dv @ dv) + 0.5 * (dw @ dw) + lam * v.sum() * w.sum())


def prox_objective_multi(v, w, x, y, lam: float) -> float:
    """Objective of the signed problem ``0.5||v-x||^2 + 0.5||w-y||^2 + lam|v|_1|w|_1``."""
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    dv = v - np.asarray(x, dtype=np.float64)
    dw = w - np.asarray(y, dtype=np.float64)
    return float(0.5 * (dv @ dv) + 0.5 * (dw @ dw)
                 + lam * np.abs(v).sum() * np.abs(w).sum())


def _shifts(s_v: int, s_w: int, X: float, Y: float, lam: float):
    """Common offsets added to the active |x| and |y| entries."""
    mu = 1.0 / (1.0 - s_v * s_w * lam * lam)
    dv = mu * (lam * lam * s_w * X - lam * Y)
    dw = mu * (lam * lam * s_v * Y - lam * X)
    return dv, dw


def candidate_multi(pair, ox: MagnitudeOrder, oy: MagnitudeOrder,
                    lam: float) -> ProxCandidateMulti:
    """Stationary point for sparsity pair ``(s_v, s_w)`` in sorted order."""
    s_v, s_w = pair
    p, m = len(ox), len(oy)
    if not (0 <= s_v <= p and 0 <= s_w <= m):
        raise ValueError(f"pair {pair} outside [0, {p}] x [0, {m}]")
    if 1.0 - s_v * s_w * lam * lam <= 0.0:
        raise SingularCandidateError(
            f"1 - s_v*s_w*lam^2 <= 0 for pair ({s_v}, {s_w})")
    dv, dw = _shifts(s_v, s_w, ox.prefix[s_v], oy.prefix[s_w], lam)
    v = np.zeros(p)
    w = np.zeros(m)
    v[:s_v] = ox.sorted_abs[:s_v] + dv
    w[:s_w] = oy.sorted_abs[:s_w] + dw
    return ProxCandidateMulti(SparsityPair(s_v, s_w), v, w,
                              h_multi(v, w, ox.sorted_abs, oy.sorted_abs, lam))


def _pair_feasible(s_v, s_w, ox, oy, lam, tol) -> bool:
    if s_v * s_w * lam * lam >= 1.0 - BOUND_MARGIN:
        return False
    dv, dw = _shifts(s_v, s_w, ox.prefix[s_v], oy.prefix[s_w], lam)
    if s_v > 0 and _clamp(ox.sorted_abs[s_v - 1] + dv, tol) < 0.0:
        return False
    if s_w > 0 and _clamp(oy.sorted_abs[s_w - 1] + dw, tol) < 0.0:
        return False
    return True


def mfb(ox: MagnitudeOrder, oy: MagnitudeOrder, lam: float) -> MfbSet:
    """Sparsity pairs on the maximal feasibility boundary.

    Walks ``s_v`` up from 0 and ``s_w`` down from m. A feasible pair bumps
    ``s_v``; an infeasible one records the last feasible ``(s_v - 1, s_w)``
    (once per run of increments) and lowers ``s_w``. Tests on an empty side
    (``s_v == 0`` or ``s_w == 0``) pass vacuously.
    """
    p, m = len(ox), len(oy)
    tol = _feas_tol(ox.sorted_abs, oy.sorted_abs)
    out = MfbSet()
    s_v, s_w = 0, m
    maximal = True
    while s_v <= p and s_w >= 0:
        out.evaluations += 1
        if _pair_feasible(s_v, s_w, ox, oy, lam, tol):
            s_v += 1
            maximal = True
        else:
            if maximal:
                out.pairs.append(SparsityPair(s_v - 1, s_w))
                maximal = False
            s_w -= 1
    if s_v == p + 1:
        out.pairs.append(SparsityPair(p, s_w))
    return out


def _max_feasible_partner(k, fixed, other, lam, tol):
    """Largest ``j`` such that the pair with ``k`` on the fixed side and ``j``
    on the other side is feasible, or -1.

    All ``j`` are tested at once; feasibility is downward closed in ``j``.
    """
    n_other = len(other)
    j = np.arange(n_other + 1)
    prod = k * j * lam * lam
    ok = prod < 1.0 - BOUND_MARGIN
    mu = 1.0 / np.where(ok, 1.0 - prod, 1.0)
    K = fixed.prefix[k]
    J = other.prefix
    # shift on the fixed side's last active entry, and on the other side's
    d_fixed = mu * (lam * lam * j * K - lam * J)
    d_other = mu * (lam * lam * k * J - lam * K)
    if k > 0:
        ok &= _clamp(fixed.sorted_abs[k - 1] + d_fixed, tol) >= 0.0
    last = np.concatenate(([0.0], other.sorted_abs)) + d_other
    ok &= (j == 0) | (_clamp(last, tol) >= 0.0)
    idx = np.flatnonzero(ok)
    return int(idx[-1]) if idx.size else -1


def boundary_pairs(ox: MagnitudeOrder, oy: MagnitudeOrder, lam: float,
                   max_rows: int = 64) -> list[SparsityPair]:
    """Same set as :func:`mfb`, in the same order, computed row-wise.

    For each count on the shorter side the largest feasible count on the
    longer side is found with one array pass; a pair is on the boundary when
    the next row's maximum drops below it. When both sides are longer than
    ``max_rows`` this falls back to the staircase walk.
    """
    p, m = len(ox), len(oy)
    if min(p, m) > max_rows:
        return mfb(ox, oy, lam).pairs
    tol = _feas_tol(ox.sorted_abs, oy.sorted_abs)
    if p <= m:
        best = [_max_feasible_partner(a, ox, oy, lam, tol) for a in range(p + 1)]
        return [SparsityPair(a, best[a]) for a in range(p + 1)
                if best[a] >= 0 and (a == p or best[a + 1] < best[a])]
    best = [_max_feasible_partner(b, oy, ox, lam, tol) for b in range(m + 1)]
    pairs = [SparsityPair(best[b], b) for b in range(m + 1)
             if best[b] >= 0 and (b == m or best[b + 1] < best[b])]
    return sorted(pairs)


def _select(cands, tie_break):
    """Pick the lowest-h candidate; near-equal h falls back to support size.

    ``cands`` yields ``(h, key, payload)``; "sparse" prefers the smaller key
    ``(nnz_v + nnz_w, nnz_v)``.
    """
    best = None
    for h, key, payload in cands:
        if best is None:
            best = (h, key, payload)
            continue
        if is_tie(h, best[0]):
            better = key < best[1] if tie_break == "sparse" else key > best[1]
        else:
            better = h < best[0]
        if better:
            best = (h, key, payload)
    return best


def _key(v, w):
    nv, nw = int(np.count_nonzero(v)), int(np.count_nonzero(w))
    return (nv + nw, nv)


def _validate(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise ShapeError("x and y must be 1-D vectors")
    return x, y


def _unsort(order: MagnitudeOrder, sorted_vals):
    out = np.empty_like(sorted_vals)
    out[order.perm] = sorted_vals
    return out


def prox_multi(x, y, lam: float, tie_break: str = "sparse",
               return_info: bool = False):
    """Global minimizer of ``0.5||v-x||^2 + 0.5||w-y||^2 + lam ||v||_1 ||w||_1``.

    Scores the two trivial points ``(0, |y|)`` and ``(|x|, 0)`` and every
    pair on the maximal feasibility boundary, keeps the smallest objective
    (near-ties go to the lexicographically smaller ``(s_v + s_w, s_v)``), then
    restores original order and signs. ``lam == 0`` is the identity.

    With ``return_info`` a third value is returned: the list of boundary
    pairs that were scored (None on the ``lam == 0`` path).
    """
    lam = _check_lam(lam)
    x, y = _validate(x, y)
    if lam == 0.0:
        return (x.copy(), y.copy(), None) if return_info else (x.copy(), y.copy())
    if tie_break not in ("sparse", "dense"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    ox, oy = magnitude_order(x), magnitude_order(y)
    xa, ya = ox.sorted_abs, oy.sorted_abs
    boundary = boundary_pairs(ox, oy, lam)

    def gen():
        for v, w in ((np.zeros_like(xa), ya.copy()), (xa.copy(), np.zeros_like(ya))):
            yield h_multi(v, w, xa, ya, lam), _key(v, w), (v, w)
        tol = _feas_tol(xa, ya)
        for pair in boundary:
            c = candidate_multi(pair, ox, oy, lam)
            v = np.maximum(_clamp(c.v, tol), 0.0)
            w = np.maximum(_clamp(c.w, tol), 0.0)
            yield h_multi(v, w, xa, ya, lam), _key(v, w), (v, w)

    _, _, (v_best, w_best) = _select(gen(), tie_break)
    v_out = apply_signs(_unsort(ox, v_best), x)
    w_out = apply_signs(_unsort(oy, w_best), y)
    if return_info:
        return v_out, w_out, boundary
    return v_out, w_out


def prox_multi_oracle(x, y, lam: float, refine: bool = True,
                      max_p: int = 6, max_m: int = 6):
    """Exhaustive reference for :func:`prox_multi`.

    Every pair ``(s_v, s_w)`` in ``{0..p} x {0..m}`` with ``mu > 0`` and a
    non-negative closed form is scored together with the trivial points.
    With ``refine`` a projected-gradient run from the winner must not
    improve it by more than 1e-9 (relative), else :class:`OracleError`.
    """
    lam = _check_lam(lam)
    x, y = _validate(x, y)
    p, m = x.shape[0], y.shape[0]
    if p > max_p or m > max_m:
        raise ValueError(f"oracle limited to p <= {max_p}, m <= {max_m}")
    if lam == 0.0:
        return x.copy(), y.copy()
    ox, oy = magnitude_order(x), magnitude_order(y)
    xa, ya = ox.sorted_abs, oy.sorted_abs
    tol = _feas_tol(xa, ya)

    def gen():
        for v, w in ((np.zeros(p), ya.copy()), (xa.copy(), np.zeros(m))):
            yield h_multi(v, w, xa, ya, lam), _key(v, w), (v, w)
        for s_v in range(p + 1):
            for s_w in range(m + 1):
                if 1.0 - s_v * s_w * lam * lam <= 0.0:
                    continue
                c = candidate_multi((s_v, s_w), ox, oy, lam)
                v = _clamp(c.v, tol)
                w = _clamp(c.w, tol)
                if (v < 0.0).any() or (w < 0.0).any():
                    continue
                yield h_multi(v, w, xa, ya, lam), _key(v, w), (v, w)

    h_best, _, (v_best, w_best) = _select(gen(), "sparse")
    if refine:
        rv, rw = projected_gradient_refine(
            v_best[None, :], w_best[None, :], xa[None, :], ya[None, :], lam)
        h_ref = float(h_batch(rv, rw, xa[None, :], ya[None, :], lam)[0])
        if h_ref < h_best - 1e-9 * max(1.0, abs(h_best)):
            raise OracleError(f"refinement improved h from {h_best} to {h_ref}")
    return apply_signs(_unsort(ox, v_best), x), apply_signs(_unsort(oy, w_best), y)


def _sorted_rows(M):
    A = np.abs(M)
    perm = np.argsort(-A, axis=1, kind="stable")
    S = np.take_along_axis(A, perm, axis=1)
    P = np.zeros((M.shape[0], M.shape[1] + 1))
    np.cumsum(S, axis=1, out=P[:, 1:])
    return perm, S, P


def prox_full(V, W, lam: float, tie_break: str = "sparse"):
    """Prox of ``lam * path_norm`` for a whole block, row by hidden neuron.

    ``V`` is (n, p), ``W`` is (n, m). Every row pair ``(V[i], W[i])`` goes
    through the same steps as :func:`prox_multi`, run in lockstep across
    rows.
    """
    lam = _check_lam(lam)
    V = np.asarray(V, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if V.ndim != 2 or W.ndim != 2 or V.shape[0] != W.shape[0]:
        raise ShapeError(f"V {V.shape} and W {W.shape} must share their row count")
    if lam == 0.0:
        return V.copy(), W.copy()
    if tie_break not in ("sparse", "dense"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    n, p = V.shape
    m = W.shape[1]
    rows = np.arange(n)
    lam2 = lam * lam

    perm_x, XS, PX = _sorted_rows(V)
    perm_y, YS, PY = _sorted_rows(W)
    tol = FEAS_TOL * np.maximum(1.0, np.maximum(XS[:, 0] if p else 0.0,
                                                YS[:, 0] if m else 0.0))

    def shifts(sv, sw):
        prod = sv * sw * lam2
        ok = prod < 1.0 - BOUND_MARGIN
        mu = np.where(ok, 1.0 / np.where(ok, 1.0 - prod, 1.0), 0.0)
        X = PX[rows, sv]
        Y = PY[rows, sw]
        return ok, mu * (lam2 * sw * X - lam * Y), mu * (lam2 * sv * Y - lam * X)

    # staircase walk, all rows at once
    slots = min(m, p) + 1
    rec_v = np.zeros((n, slots), dtype=np.int64)
    rec_w = np.zeros((n, slots), dtype=np.int64)
    count = np.zeros(n, dtype=np.int64)
    sv = np.zeros(n, dtype=np.int64)
    sw = np.full(n, m, dtype=np.int64)
    maximal = np.ones(n, dtype=bool)
    active = np.ones(n, dtype=bool)
    while active.any():
        # finished rows are evaluated on clipped indices and masked out below
        cv = np.minimum(sv, p)
        cw = np.maximum(sw, 0)
        ok, dv, dw = shifts(cv, cw)
        v_last = XS[rows, np.maximum(cv - 1, 0)] + dv if p else dv
        w_last = YS[rows, np.maximum(cw - 1, 0)] + dw if m else dw
        feas = (ok & ((cv == 0) | (_clamp(v_last, tol) >= 0.0))
                & ((cw == 0) | (_clamp(w_last, tol) >= 0.0)))
        step_up = active & feas
        step_down = active & ~feas
        record = step_down & maximal
        idx = np.flatnonzero(record)
        rec_v[idx, count[idx]] = sv[idx] - 1
        rec_w[idx, count[idx]] = sw[idx]
        count[idx] += 1
        maximal = np.where(record, False, np.where(step_up, True, maximal))
        sv = sv + step_up
        sw = sw - step_down
        active = (sv <= p) & (sw >= 0)
    idx = np.flatnonzero(sv == p + 1)
    rec_v[idx, count[idx]] = p
    rec_w[idx, count[idx]] = sw[idx]
    count[idx] += 1

    cols_p = np.arange(p)
    cols_m = np.arange(m)

    def key_of(Vc, Wc):
        nv = np.count_nonzero(Vc, axis=1)
        nw = np.count_nonzero(Wc, axis=1)
        return (nv + nw) * (p + 2) + nv

    # trivial points first, in the same order as prox_multi
    best_V = np.zeros((n, p))
    best_W = YS.copy()
    best_h = h_batch(best_V, best_W, XS, YS, lam)
    best_key = key_of(best_V, best_W)

    def consider(mask, Vc, Wc):
        nonlocal best_V, best_W, best_h, best_key
        h = h_batch(Vc, Wc, XS, YS, lam)
        key = key_of(Vc, Wc)
        tie = np.abs(h - best_h) <= TIE_TOL * np.maximum(np.abs(h), np.abs(best_h))
        pref = key < best_key if tie_break == "sparse" else key > best_key
        take = mask & np.where(tie, pref, h < best_h)
        best_V = np.where(take[:, None], Vc, best_V)
        best_W = np.where(take[:, None], Wc, best_W)
        best_h = np.where(take, h, best_h)
        best_key = np.where(take, key, best_key)

    consider(np.ones(n, dtype=bool), XS.copy(), np.zeros((n, m)))
    for t in range(slots):
        mask = count > t
        if not mask.any():
            break
        a, b = rec_v[:, t], rec_w[:, t]
        _, dv, dw = shifts(np.where(mask, a, 0), np.where(mask, b, 0))
        Vc = np.where(cols_p[None, :] < a[:, None], XS + dv[:, None], 0.0)
        Wc = np.where(cols_m[None, :] < b[:, None], YS + dw[:, None], 0.0)
        Vc = np.maximum(_clamp(Vc, tol[:, None]), 0.0)
        Wc = np.maximum(_clamp(Wc, tol[:, None]), 0.0)
        consider(mask, Vc, Wc)

    V_out = np.empty_like(best_V)
    W_out = np.empty_like(best_W)
    np.put_along_axis(V_out, perm_x, best_V, axis=1)
    np.put_along_axis(W_out, perm_y, best_W, axis=1)
    return apply_signs(V_out, V), apply_signs(W_out, W)
