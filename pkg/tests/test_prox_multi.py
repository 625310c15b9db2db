import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pathprox.numerics import magnitude_order, make_rng
from pathprox.prox_multi import (
    SingularCandidateError,
    SparsityPair,
    _pair_feasible,
    boundary_pairs,
    candidate_multi,
    h_multi,
    mfb,
    prox_full,
    prox_multi,
    prox_multi_oracle,
    prox_objective_multi,
)
from pathprox.prox_single import _feas_tol, prox_single

LAMS = [0.05, 0.3, 0.9, 1.0, 2.0]
vals = st.floats(-10, 10, allow_nan=False)
vec = arrays(np.float64, st.integers(1, 6), elements=vals)
lam_st = st.sampled_from(LAMS)


def orders(x, y):
    return magnitude_order(x), magnitude_order(y)


def brute_mfb(x, y, lam):
    ox, oy = orders(x, y)
    p, m = len(ox), len(oy)
    tol = _feas_tol(ox.sorted_abs, oy.sorted_abs)
    f = {(a, b): _pair_feasible(a, b, ox, oy, lam, tol)
         for a in range(p + 1) for b in range(m + 1)}
    return {(a, b) for (a, b), ok in f.items()
            if ok and (a == p or not f[a + 1, b]) and (b == m or not f[a, b + 1])}


def test_candidate_examples():
    ox, oy = orders([1.0], [1.0])
    c = candidate_multi((1, 1), ox, oy, 0.5)
    assert np.allclose(c.v, [2 / 3]) and np.allclose(c.w, [2 / 3]) and np.isclose(c.h, 1 / 3)
    x, y = np.array([1.0, -2.0]), np.array([3.0, 0.5, -1.0])
    ox, oy = orders(x, y)
    c = candidate_multi((0, 3), ox, oy, 0.4)
    assert not c.v.any() and np.array_equal(c.w, oy.sorted_abs)
    c = candidate_multi((2, 0), ox, oy, 0.4)
    assert not c.w.any() and np.array_equal(c.v, ox.sorted_abs)
    c = candidate_multi((1, 0), ox, oy, 0.4)
    assert c.v.tolist() == [2.0, 0.0]


def test_candidate_singular():
    ox, oy = orders([1.0, 1.0], [1.0, 1.0])
    with pytest.raises(SingularCandidateError):
        candidate_multi((2, 2), ox, oy, 0.5)
    with pytest.raises(ValueError):
        candidate_multi((3, 0), ox, oy, 0.5)


def test_h_multi_examples():
    x, y = np.array([1.0, -2.0]), np.array([3.0, 0.5])
    assert h_multi(np.zeros(2), np.abs(y), np.abs(x), np.abs(y), 0.7) == 0.5 * (x @ x)
    assert h_multi(np.abs(x), np.zeros(2), np.abs(x), np.abs(y), 0.7) == 0.5 * (y @ y)
    assert np.isclose(h_multi([2 / 3], [2 / 3], [1.0], [1.0], 0.5), 1 / 3)


def test_mfb_examples():
    ox, oy = orders([1.0], [1.0])
    assert mfb(ox, oy, 0.5).pairs == [SparsityPair(1, 1)]
    # y = 0: the boundary holds (p, 0); with the non-strict test the all-zero
    # w also keeps (0, m), whose candidate is the trivial point (0, 0)
    x0, y0 = np.array([1.0, -2.0, 0.5]), np.zeros(4)
    pairs = set(mfb(*orders(x0, y0), 0.3).pairs)
    assert (3, 0) in pairs and pairs <= {(3, 0), (0, 4)}
    assert pairs == brute_mfb(x0, y0, 0.3)
    v, w = prox_multi(x0, y0, 0.3)
    assert np.array_equal(v, x0) and not w.any()
    # lam > 1: only pairs with an empty side are admissible
    x, y = np.array([1.0, 2.0]), np.array([3.0, 1.0, 1.0])
    pairs = mfb(*orders(x, y), 2.0).pairs
    assert all(a * b == 0 for a, b in pairs)


@settings(max_examples=300, deadline=None)
@given(vec, vec, lam_st)
def test_mfb_equals_definition(x, y, lam):
    ox, oy = orders(x, y)
    walk = mfb(ox, oy, lam)
    assert set(walk.pairs) == brute_mfb(x, y, lam)
    assert len(walk) <= min(len(x), len(y)) + 1
    assert walk.evaluations <= len(x) + len(y) + 1
    assert boundary_pairs(ox, oy, lam) == walk.pairs
    assert boundary_pairs(ox, oy, lam, max_rows=0) == walk.pairs


def test_prox_examples():
    v, w = prox_multi([1.0], [1.0], 0.5)
    assert np.allclose(v, [2 / 3]) and np.allclose(w, [2 / 3])
    x, y = np.array([1.0, -2.0]), np.array([0.3, 4.0, -1.0])
    v, w = prox_multi(x, y, 0.0)
    assert np.array_equal(v, x) and np.array_equal(w, y)
    v, w, info = prox_multi(x, y, 0.0, return_info=True)
    assert info is None
    with pytest.raises(ValueError):
        prox_multi(x, y, -1.0)


def test_p1_reduction_1000():
    rng = make_rng(7)
    for _ in range(1000):
        m = int(rng.integers(1, 9))
        x, y = float(rng.normal()), rng.normal(size=m)
        lam = float(rng.choice(LAMS))
        v, w = prox_multi([x], y, lam)
        vs, ws = prox_single(x, y, lam)
        assert abs(v[0] - vs) <= 1e-10 and np.max(np.abs(w - ws)) <= 1e-10


def test_m1_tie_rules_differ_but_both_optimal():
    # p = m = 1 exact tie: the single-output rule keeps (x, 0), the
    # multi-output key (s_v + s_w, s_v) keeps (0, y); same objective
    x, y, lam = -0.5, np.array([-0.5]), 1.0
    v, w = prox_multi([x], y, lam)
    vs, ws = prox_single(x, y, lam)
    assert (v.tolist(), w.tolist()) == ([0.0], [-0.5])
    assert (vs, ws.tolist()) == (-0.5, [0.0])
    assert prox_objective_multi(v, w, [x], y, lam) == prox_objective_multi([vs], ws, [x], y, lam)


@settings(max_examples=300, deadline=None)
@given(vec, vec, lam_st)
def test_matches_oracle(x, y, lam):
    v, w = prox_multi(x, y, lam)
    vo, wo = prox_multi_oracle(x, y, lam, refine=False)
    assert abs(prox_objective_multi(v, w, x, y, lam)
               - prox_objective_multi(vo, wo, x, y, lam)) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(vec, vec, lam_st)
def test_stationarity_sparsity_signs(x, y, lam):
    v, w = prox_multi(x, y, lam)
    av, aw = np.abs(v), np.abs(w)
    assert np.all(np.abs(av - np.maximum(0, np.abs(x) - lam * aw.sum())) <= 1e-10)
    assert np.all(np.abs(aw - np.maximum(0, np.abs(y) - lam * av.sum())) <= 1e-10)
    sv, sw = np.count_nonzero(v), np.count_nonzero(w)
    if sv and sw:
        assert sv * sw * lam * lam <= 1 + 1e-12
    assert np.all(v * x >= 0) and np.all(w * y >= 0)


@settings(max_examples=200, deadline=None)
@given(vec, vec, lam_st)
def test_h_monotone_and_feasibility_monotone(x, y, lam):
    ox, oy = orders(x, y)
    tol = _feas_tol(ox.sorted_abs, oy.sorted_abs)
    p, m = len(x), len(y)
    for a in range(p + 1):
        for b in range(m + 1):
            if not _pair_feasible(a, b, ox, oy, lam, tol):
                continue
            h = candidate_multi((a, b), ox, oy, lam).h
            for a2, b2 in ((a - 1, b), (a, b - 1)):
                if a2 < 0 or b2 < 0:
                    continue
                assert _pair_feasible(a2, b2, ox, oy, lam, tol)
                h2 = candidate_multi((a2, b2), ox, oy, lam).h
                assert h <= h2 + 1e-12 * max(1, abs(h2))


def test_oracle_guard():
    with pytest.raises(ValueError):
        prox_multi_oracle(np.ones(7), np.ones(2), 0.1)


def test_prox_full_examples():
    rng = make_rng(3)
    V, W = rng.normal(size=(3, 2)), rng.normal(size=(3, 4))
    Vo, Wo = prox_full(V, W, 0.3)
    for i in range(3):
        a, b = prox_multi_oracle(V[i], W[i], 0.3)
        assert np.allclose(Vo[i], a, atol=1e-12) and np.allclose(Wo[i], b, atol=1e-12)
    V0, W0 = prox_full(V, W, 0.0)
    assert np.array_equal(V0, V) and np.array_equal(W0, W)
    a, b = prox_full(V[:1], W[:1], 0.3)
    c, d = prox_multi(V[0], W[0], 0.3)
    assert np.allclose(a[0], c, atol=1e-12) and np.allclose(b[0], d, atol=1e-12)


def test_prox_full_rows_random():
    rng = make_rng(4)
    for lam in LAMS:
        V = np.round(rng.normal(size=(60, 3)), 1)
        W = np.round(rng.normal(size=(60, 5)), 1)
        Vo, Wo = prox_full(V, W, lam)
        for i in range(60):
            a, b = prox_multi(V[i], W[i], lam)
            assert np.allclose(Vo[i], a, atol=1e-12) and np.allclose(Wo[i], b, atol=1e-12)


def test_prox_full_shape_error():
    with pytest.raises(ValueError):
        prox_full(np.ones((2, 1)), np.ones((3, 1)), 0.1)
