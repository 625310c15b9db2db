"""Randomized verification suites for the prox operators.

Each suite draws random instances, compares the fast operators against the
exhaustive oracles or checks a structural property, and returns a
:class:`CheckResult`. Passing ``tie_break="dense"`` to a suite runs the fast
operators with the flipped tie rule, which the agreement and tie suites must
report as violations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import magnitude_order, make_rng
from .prox_multi import (
    BOUND_MARGIN,
    _pair_feasible,
    boundary_pairs,
    candidate_multi,
    mfb,
    prox_full,
    prox_multi,
    prox_multi_oracle,
    prox_objective_multi,
)
from .prox_single import (
    OracleError,
    _feas_tol,
    _feasible,
    candidate,
    h_batch,
    prox_objective_single,
    prox_single,
    prox_single_oracle,
    projected_gradient_refine,
)

LAMBDAS = (0.05, 0.3, 0.9, 1.0, 2.0)
H_TOL = 1e-9
STATIONARITY_TOL = 1e-10
MONO_TOL = 1e-12
ORACLE_MAX_P = 6
ORACLE_MAX_M = 6


@dataclass
class CheckResult:
    name: str
    trials: int
    violations: int = 0
    worst: float = 0.0
    example: str = ""

    @property
    def passed(self) -> bool:
        return self.trials > 0 and self.violations == 0

    def fail(self, detail: str, amount: float = 0.0):
        self.violations += 1
        self.worst = max(self.worst, amount)
        if not self.example:
            self.example = detail

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        s = (f"{status} {self.name}: {self.trials - self.violations}/{self.trials}"
             f" (worst {self.worst:.3g})")
        if self.example and not self.passed:
            s += f" first violation: {self.example}"
        return s


def _vec(rng, k):
    """Random vector mixing smooth draws, coarse grids (ties) and scale changes."""
    kind = rng.integers(4)
    if kind == 0:
        return rng.normal(size=k)
    if kind == 1:
        return np.round(rng.normal(size=k), 1)
    if kind == 2:
        return rng.normal(size=k) * 10.0 ** rng.uniform(-2, 1)
    return rng.choice([-1.0, -0.5, 0.5, 1.0], size=k)


def random_single(rng, max_m: int, lams=LAMBDAS):
    m = int(rng.integers(1, max_m + 1))
    y = _vec(rng, m)
    x = float(_vec(rng, 1)[0])
    return x, y, float(rng.choice(lams))


def random_multi(rng, max_p: int, max_m: int, lams=LAMBDAS):
    p = int(rng.integers(1, max_p + 1))
    m = int(rng.integers(1, max_m + 1))
    return _vec(rng, p), _vec(rng, m), float(rng.choice(lams))


def _refine_failures(winners):
    """Batched projected-gradient refinement of oracle winners.

    ``winners`` is a list of ``(|v|, |w|, |x|, |y|, lam, h)``. Returns the
    indices where refinement beat ``h`` by more than the oracle tolerance.
    """
    if not winners:
        return []
    P = max(len(t[0]) for t in winners)
    M = max(len(t[1]) for t in winners)
    B = len(winners)
    V, W, X, Y = (np.zeros((B, P)), np.zeros((B, M)), np.zeros((B, P)), np.zeros((B, M)))
    lam = np.empty(B)
    h = np.empty(B)
    for i, (v, w, xa, ya, la, hh) in enumerate(winners):
        V[i, :len(v)], W[i, :len(w)] = v, w
        X[i, :len(xa)], Y[i, :len(ya)] = xa, ya
        lam[i], h[i] = la, hh
    rv, rw = projected_gradient_refine(V, W, X, Y, lam)
    h_ref = h_batch(rv, rw, X, Y, lam)
    return list(np.flatnonzero(h_ref < h - 1e-9 * np.maximum(1.0, np.abs(h))))


def single_oracle_suite(trials: int, max_m: int = 8, seed: int = 0,
                        lams=LAMBDAS, tie_break: str = "sparse"):
    """Objective agreement and solution agreement against the exhaustive oracle."""
    rng = make_rng(seed)
    h_res = CheckResult("single_oracle_objective", trials)
    sol_res = CheckResult("single_oracle_solution", trials)
    ref_res = CheckResult("single_oracle_refinement", trials)
    winners = []
    for _ in range(trials):
        x, y, lam = random_single(rng, max_m, lams)
        v, w = prox_single(x, y, lam, tie_break=tie_break)
        vo, wo = prox_single_oracle(x, y, lam, refine=False, max_m=max_m)
        hf = prox_objective_single(v, w, x, y, lam)
        ho = prox_objective_single(vo, wo, x, y, lam)
        if abs(hf - ho) > H_TOL:
            h_res.fail(f"x={x!r} y={y.tolist()} lam={lam}", abs(hf - ho))
        gap = max(abs(v - vo), float(np.max(np.abs(w - wo))))
        if gap > 1e-8:
            sol_res.fail(f"x={x!r} y={y.tolist()} lam={lam}", gap)
        winners.append((np.array([abs(vo)]), np.abs(wo), np.array([abs(x)]), np.abs(y), lam, ho))
    for i in _refine_failures(winners):
        ref_res.fail(f"instance {i}")
    return [h_res, sol_res, ref_res]


def multi_oracle_suite(trials: int, max_p: int = 6, max_m: int = 6, seed: int = 1,
                       lams=LAMBDAS, tie_break: str = "sparse"):
    rng = make_rng(seed)
    h_res = CheckResult("multi_oracle_objective", trials)
    sol_res = CheckResult("multi_oracle_solution", trials)
    ref_res = CheckResult("multi_oracle_refinement", trials)
    winners = []
    for _ in range(trials):
        x, y, lam = random_multi(rng, max_p, max_m, lams)
        v, w = prox_multi(x, y, lam, tie_break=tie_break)
        vo, wo = prox_multi_oracle(x, y, lam, refine=False)
        hf = prox_objective_multi(v, w, x, y, lam)
        ho = prox_objective_multi(vo, wo, x, y, lam)
        if abs(hf - ho) > H_TOL:
            h_res.fail(f"x={x.tolist()} y={y.tolist()} lam={lam}", abs(hf - ho))
        gap = max(float(np.max(np.abs(v - vo))), float(np.max(np.abs(w - wo))))
        if gap > 1e-8:
            sol_res.fail(f"x={x.tolist()} y={y.tolist()} lam={lam}", gap)
        winners.append((np.abs(vo), np.abs(wo), np.abs(x), np.abs(y), lam, ho))
    for i in _refine_failures(winners):
        ref_res.fail(f"instance {i}")
    return [h_res, sol_res, ref_res]


def reduction_suite(trials: int, max_m: int = 8, seed: int = 2, lams=LAMBDAS,
                    tie_break: str = "sparse"):
    """With one output the multi-output prox must match the single-output prox.

    Inputs are continuous draws. On exact ties between ``(0, |y|)`` and
    ``(|x|, 0)`` with ``m == 1`` the two tie rules pick different (equally
    optimal) points, so coarse-grid inputs are left to the other suites.
    """
    rng = make_rng(seed)
    res = CheckResult("single_output_reduction", trials)
    for _ in range(trials):
        m = int(rng.integers(1, max_m + 1))
        x, y = float(rng.normal()), rng.normal(size=m) * 10.0 ** rng.uniform(-1, 1)
        lam = float(rng.choice(lams))
        v, w = prox_multi([x], y, lam, tie_break=tie_break)
        vs, ws = prox_single(x, y, lam)
        gap = max(abs(v[0] - vs), float(np.max(np.abs(w - ws))))
        if gap > 1e-10:
            res.fail(f"x={x!r} y={y.tolist()} lam={lam}", gap)
    return [res]


def tie_suite(trials: int, max_m: int = 8, seed: int = 3, tie_break: str = "sparse"):
    """Instances where the two trivial points tie exactly; the sparser must win.

    With ``lam = 2`` no stationary point with both parts active exists, and
    ``||x||_2 == ||y||_2`` makes ``(0, |y|)`` and ``(|x|, 0)`` score the same.
    """
    rng = make_rng(seed)
    single = CheckResult("tie_rule_single", trials)
    multi = CheckResult("tie_rule_multi", trials)
    for _ in range(trials):
        m = int(rng.integers(1, max_m + 1))
        y = rng.choice([-1.0, 1.0], size=m) * rng.integers(1, 4, size=m)
        x = float(np.sqrt((y * y).sum()) * rng.choice([-1.0, 1.0]))
        v, w = prox_single(x, y, 2.0, tie_break=tie_break)
        if v != x or np.any(w != 0):
            single.fail(f"x={x!r} y={y.tolist()}")
        p = int(rng.integers(1, ORACLE_MAX_P + 1))
        mm = int(rng.integers(1, ORACLE_MAX_M + 1))
        xv = rng.choice([-1.0, 1.0], size=p) * 2.0
        yv = rng.choice([-1.0, 1.0], size=mm) * 2.0 * np.sqrt(p / mm)
        v, w = prox_multi(xv, yv, 2.0, tie_break=tie_break)
        vo, wo = prox_multi_oracle(xv, yv, 2.0, refine=False)
        if not (np.array_equal(v, vo) and np.array_equal(w, wo)):
            multi.fail(f"x={xv.tolist()} y={yv.tolist()}")
    return [single, multi]


def _single_table(x, y, lam):
    """Feasibility and objective of every non-singular sparsity level."""
    order = magnitude_order(y)
    xa = abs(x)
    tol = _feas_tol(xa, order.sorted_abs)
    rows = []
    for s in range(len(order) + 1):
        if 1.0 - s * lam * lam <= 0.0:
            break
        c = candidate(s, order, xa, lam)
        rows.append((s, _feasible(s, order, xa, lam, tol), c.h))
    return rows


def _multi_table(x, y, lam):
    ox, oy = magnitude_order(x), magnitude_order(y)
    tol = _feas_tol(ox.sorted_abs, oy.sorted_abs)
    feas, h = {}, {}
    for a in range(len(ox) + 1):
        for b in range(len(oy) + 1):
            feas[a, b] = _pair_feasible(a, b, ox, oy, lam, tol)
            if a * b * lam * lam < 1.0 - BOUND_MARGIN:
                h[a, b] = candidate_multi((a, b), ox, oy, lam).h
    return ox, oy, feas, h


def property_suite(trials: int, max_m: int = 8, max_p: int = 6, seed: int = 4,
                lams=LAMBDAS, tie_break: str = "sparse"):
    """Structural properties of the exact prox solutions and candidates."""
    rng = make_rng(seed)
    names = ["stationarity_single", "stationarity_multi", "sparsity_bound_single",
             "sparsity_bound_multi", "h_monotone_single", "h_monotone_multi",
             "feasibility_monotone_single", "feasibility_monotone_multi",
             "mfb_members", "mfb_cardinality", "sign_equivariance_single",
             "sign_equivariance_multi"]
    res = {n: CheckResult(n, trials) for n in names}
    mp = min(max_p, ORACLE_MAX_P)
    mm = min(max_m, ORACLE_MAX_M)
    for _ in range(trials):
        # single output
        x, y, lam = random_single(rng, max_m, lams)
        v, w = prox_single(x, y, lam, tie_break=tie_break)
        r = max(abs(abs(v) - max(0.0, abs(x) - lam * np.abs(w).sum())),
                float(np.max(np.abs(np.abs(w) - np.maximum(0.0, np.abs(y) - lam * abs(v))))))
        if r > STATIONARITY_TOL:
            res["stationarity_single"].fail(f"x={x!r} y={y.tolist()} lam={lam}", r)
        if v != 0 and np.count_nonzero(w) * lam * lam > 1.0 + 1e-12:
            res["sparsity_bound_single"].fail(f"x={x!r} y={y.tolist()} lam={lam}")
        table = _single_table(x, y, lam)
        for (s0, f0, h0), (s1, f1, h1) in zip(table, table[1:]):
            if f1 and h1 > h0 + MONO_TOL * max(1.0, abs(h0)):
                res["h_monotone_single"].fail(f"s={s1} x={x!r} y={y.tolist()} lam={lam}",
                                              h1 - h0)
                break
        flags = [f for _, f, _ in table]
        if any(flags[i + 1] and not flags[i] for i in range(len(flags) - 1)):
            res["feasibility_monotone_single"].fail(f"x={x!r} y={y.tolist()} lam={lam}")
        D = rng.choice([-1.0, 1.0])
        E = rng.choice([-1.0, 1.0], size=y.shape)
        v2, w2 = prox_single(D * x, E * y, lam, tie_break=tie_break)
        gap = max(abs(v2 - D * v), float(np.max(np.abs(w2 - E * w))))
        if x != 0 and np.all(y != 0) and gap > 1e-12:
            res["sign_equivariance_single"].fail(f"x={x!r} y={y.tolist()} lam={lam}", gap)

        # multiple outputs
        xv, yv, lam = random_multi(rng, mp, mm, lams)
        v, w = prox_multi(xv, yv, lam, tie_break=tie_break)
        r = max(float(np.max(np.abs(np.abs(v) - np.maximum(0.0, np.abs(xv) - lam * np.abs(w).sum())))),
                float(np.max(np.abs(np.abs(w) - np.maximum(0.0, np.abs(yv) - lam * np.abs(v).sum())))))
        if r > STATIONARITY_TOL:
            res["stationarity_multi"].fail(f"x={xv.tolist()} y={yv.tolist()} lam={lam}", r)
        sv, sw = np.count_nonzero(v), np.count_nonzero(w)
        if sv and sw and sv * sw * lam * lam > 1.0 + 1e-12:
            res["sparsity_bound_multi"].fail(f"x={xv.tolist()} y={yv.tolist()} lam={lam}")
        ox, oy, feas, h = _multi_table(xv, yv, lam)
        p, m = len(ox), len(oy)
        bad_h = bad_f = False
        for (a, b), ok in feas.items():
            if not ok:
                continue
            for a2, b2 in ((a - 1, b), (a, b - 1)):
                if a2 < 0 or b2 < 0:
                    continue
                if not feas[a2, b2]:
                    bad_f = True
                elif h[a, b] > h[a2, b2] + MONO_TOL * max(1.0, abs(h[a2, b2])):
                    bad_h = True
        if bad_h:
            res["h_monotone_multi"].fail(f"x={xv.tolist()} y={yv.tolist()} lam={lam}")
        if bad_f:
            res["feasibility_monotone_multi"].fail(f"x={xv.tolist()} y={yv.tolist()} lam={lam}")
        boundary = mfb(ox, oy, lam)
        expected = {(a, b) for (a, b), ok in feas.items()
                    if ok and (a == p or not feas[a + 1, b]) and (b == m or not feas[a, b + 1])}
        fast = boundary_pairs(ox, oy, lam)
        if (set(boundary.pairs) != expected or len(set(boundary.pairs)) != len(boundary)
                or fast != boundary.pairs):
            res["mfb_members"].fail(f"x={xv.tolist()} y={yv.tolist()} lam={lam}")
        if len(boundary) > min(m, p) + 1 or boundary.evaluations > m + p + 1:
            res["mfb_cardinality"].fail(f"x={xv.tolist()} y={yv.tolist()} lam={lam}",
                                        float(boundary.evaluations))
        D = rng.choice([-1.0, 1.0], size=xv.shape)
        E = rng.choice([-1.0, 1.0], size=yv.shape)
        v2, w2 = prox_multi(D * xv, E * yv, lam, tie_break=tie_break)
        gap = max(float(np.max(np.abs(v2 - D * v))), float(np.max(np.abs(w2 - E * w))))
        if np.all(xv != 0) and np.all(yv != 0) and gap > 1e-12:
            res["sign_equivariance_multi"].fail(f"x={xv.tolist()} y={yv.tolist()} lam={lam}", gap)
    return [res[n] for n in names]


def block_suite(trials: int, seed: int = 5, lams=LAMBDAS):
    """The row-vectorized block prox matches the per-neuron prox."""
    rng = make_rng(seed)
    res = CheckResult("block_matches_rows", trials)
    for _ in range(trials):
        n = int(rng.integers(1, 6))
        p = int(rng.integers(1, 5))
        m = int(rng.integers(1, 9))
        lam = float(rng.choice(lams))
        V = np.stack([_vec(rng, p) for _ in range(n)])
        W = np.stack([_vec(rng, m) for _ in range(n)])
        Vo, Wo = prox_full(V, W, lam)
        for i in range(n):
            v, w = prox_multi(V[i], W[i], lam)
            gap = max(float(np.max(np.abs(v - Vo[i]))), float(np.max(np.abs(w - Wo[i]))))
            if gap > 1e-12:
                res.fail(f"lam={lam} row {i}", gap)
                break
    return [res]


def run_all(trials: int = 10_000, max_m: int = 8, max_p: int = 6, seed: int = 0,
            tie_break: str = "sparse") -> list[CheckResult]:
    """Every suite; the multi-output oracle sizes are capped at 6 x 6."""
    mp, mm = min(max_p, ORACLE_MAX_P), min(max_m, ORACLE_MAX_M)
    out = []
    try:
        out += single_oracle_suite(trials, max_m, seed, tie_break=tie_break)
        out += multi_oracle_suite(trials, mp, mm, seed + 1, tie_break=tie_break)
        out += reduction_suite(min(trials, 1000), max_m, seed + 2, tie_break=tie_break)
        out += tie_suite(min(trials, 1000), max_m, seed + 3, tie_break=tie_break)
        out += property_suite(trials, max_m, max_p, seed + 4, tie_break=tie_break)
        out += block_suite(min(trials, 1000), seed + 5)
    except OracleError as exc:
        r = CheckResult("oracle_refinement", 1)
        r.fail(str(exc))
        out.append(r)
    return out
