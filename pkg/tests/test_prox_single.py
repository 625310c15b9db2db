import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pathprox.numerics import magnitude_order, make_rng
from pathprox.prox_single import (
    OracleError,
    SingularCandidateError,
    candidate,
    h_single,
    prox_block_single,
    prox_objective_single,
    prox_single,
    prox_single_oracle,
    sparsity_cap,
)

LAMS = [0.05, 0.3, 0.9, 1.0, 2.0]
vals = st.floats(-10, 10, allow_nan=False)
lam_st = st.sampled_from(LAMS)
y_st = arrays(np.float64, st.integers(1, 8), elements=vals)


def test_candidate_examples():
    o = magnitude_order([1.0])
    c0 = candidate(0, o, 1.0, 0.5)
    assert (c0.v, c0.w.tolist(), c0.h) == (1.0, [0.0], 0.5)
    c1 = candidate(1, o, 1.0, 0.5)
    assert np.isclose(c1.v, 2 / 3) and np.allclose(c1.w, [2 / 3]) and np.isclose(c1.h, 1 / 3)
    y = np.array([3.0, -4.0])
    cz = candidate(0, magnitude_order(y), 0.0, 0.7)
    assert cz.v == 0.0 and not cz.w.any() and np.isclose(cz.h, 0.5 * (y @ y))


def test_candidate_singular():
    with pytest.raises(SingularCandidateError):
        candidate(1, magnitude_order([1.0]), 1.0, 1.0)
    with pytest.raises(ValueError):
        candidate(3, magnitude_order([1.0]), 1.0, 0.1)


def test_h_single_examples():
    y = np.array([1.0, 2.0])
    assert h_single(0.0, y, 3.0, y, 0.4) == 4.5
    assert h_single(3.0, np.zeros(2), 3.0, y, 0.4) == 2.5
    assert np.isclose(h_single(2 / 3, [2 / 3], 1.0, [1.0], 0.5), 1 / 3)


def test_sparsity_cap():
    assert sparsity_cap(0.5, 10) == 3  # 1/lam^2 = 4 is singular
    assert sparsity_cap(0.3, 10) == 10
    assert sparsity_cap(2.0, 10) == 0
    assert sparsity_cap(1.0, 10) == 0


def test_prox_examples():
    v, w = prox_single(1.0, [1.0], 0.5)
    assert np.isclose(v, 2 / 3) and np.allclose(w, [2 / 3])
    v, w = prox_single(-1.0, [-1.0], 0.5)
    assert np.isclose(v, -2 / 3) and np.allclose(w, [-2 / 3])


def test_prox_tie_example():
    # (0, [1]) and (1, [0]) both score 0.5; the sparser w wins
    assert prox_objective_single(0.0, [1.0], 1.0, [1.0], 2.0) == 0.5
    assert prox_objective_single(1.0, [0.0], 1.0, [1.0], 2.0) == 0.5
    v, w = prox_single(1.0, [1.0], 2.0)
    assert v == 1.0 and w.tolist() == [0.0]
    assert prox_single_oracle(1.0, [1.0], 2.0) == (1.0, pytest.approx([0.0]))
    v, w = prox_single(1.0, [1.0], 2.0, tie_break="dense")
    assert v == 0.0 and w.tolist() == [1.0]


def test_lambda_zero_identity_and_errors():
    y = np.array([1.0, -2.0])
    v, w = prox_single(-3.0, y, 0.0)
    assert v == -3.0 and np.array_equal(w, y) and w is not y
    with pytest.raises(ValueError):
        prox_single(1.0, y, -0.1)
    with pytest.raises(ValueError):
        prox_single(1.0, y, float("inf"))
    with pytest.raises(ValueError):
        prox_single(1.0, y, 0.1, tie_break="other")


def test_oracle_examples_and_guard():
    for x, y, lam in [(1.0, [1.0], 0.5), (-1.0, [-1.0], 0.5), (1.0, [1.0], 2.0)]:
        v, w = prox_single(x, y, lam)
        vo, wo = prox_single_oracle(x, y, lam)
        assert np.isclose(v, vo) and np.allclose(w, wo)
    with pytest.raises(ValueError):
        prox_single_oracle(1.0, np.ones(21), 0.1)


def test_oracle_error_type_is_assertion():
    assert issubclass(OracleError, AssertionError)


@settings(max_examples=300, deadline=None)
@given(vals, y_st, lam_st)
def test_matches_oracle(x, y, lam):
    v, w = prox_single(x, y, lam)
    vo, wo = prox_single_oracle(x, y, lam, refine=False)
    assert abs(prox_objective_single(v, w, x, y, lam)
               - prox_objective_single(vo, wo, x, y, lam)) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(vals, y_st, lam_st)
def test_stationarity_and_sparsity(x, y, lam):
    v, w = prox_single(x, y, lam)
    av, aw = abs(v), np.abs(w)
    assert abs(av - max(0.0, abs(x) - lam * aw.sum())) <= 1e-10
    assert np.all(np.abs(aw - np.maximum(0.0, np.abs(y) - lam * av)) <= 1e-10)
    if v != 0:
        assert np.count_nonzero(w) * lam * lam <= 1 + 1e-12


@settings(max_examples=300, deadline=None)
@given(vals, y_st, lam_st)
def test_order_consistency(x, y, lam):
    _, w = prox_single(x, y, lam)
    aw, ay = np.abs(w), np.abs(y)
    for j in range(len(y)):
        for l in range(len(y)):
            if aw[j] > aw[l]:
                assert ay[j] >= ay[l] - 1e-12


@settings(max_examples=300, deadline=None)
@given(vals, y_st, lam_st)
def test_sign_equivariance(x, y, lam):
    v, w = prox_single(x, y, lam)
    v2, w2 = prox_single(-x, -y, lam)
    if x != 0 and np.all(y != 0):
        assert v2 == -v and np.array_equal(w2, -w)


@settings(max_examples=200, deadline=None)
@given(vals, y_st, st.floats(0.01, 1.0), st.floats(0.01, 3.0))
def test_scaling_law(x, y, eta, lam):
    # the coefficient only enters through the product eta * lam
    a = prox_single(x, y, eta * lam)
    b = prox_single(x, y, lam * eta)
    assert a[0] == b[0] and np.array_equal(a[1], b[1])


def _feasible(c):
    return c.v > 0 and (c.s == 0 or c.w[c.s - 1] > 0)


@settings(max_examples=300, deadline=None)
@given(vals, y_st, lam_st)
def test_h_and_feasibility_monotone(x, y, lam):
    o = magnitude_order(y)
    cands = []
    for s in range(len(y) + 1):
        if 1 - s * lam * lam <= 0:
            break
        cands.append(candidate(s, o, abs(x), lam))
    feas = [_feasible(c) for c in cands]
    for k, f in enumerate(feas):
        if f:
            assert all(feas[1:k])
    for k in range(2, len(cands)):
        if feas[k]:
            assert cands[k].h <= cands[k - 1].h + 1e-12 * max(1, abs(cands[k - 1].h))


def test_block_examples():
    rng = make_rng(0)
    v, W = rng.normal(size=3), rng.normal(size=(3, 4))
    vo, Wo = prox_block_single(v, W, 0.3)
    for i in range(3):
        xs, ys = prox_single_oracle(v[i], W[i], 0.3)
        assert np.isclose(vo[i], xs, atol=1e-12) and np.allclose(Wo[i], ys, atol=1e-12)
    v1, W1 = prox_block_single(v[:1], W[:1], 0.3)
    a, b = prox_single(v[0], W[0], 0.3)
    assert v1[0] == a and np.array_equal(W1[0], b)
    v0, W0 = prox_block_single(v, W, 0.0)
    assert np.array_equal(v0, v) and np.array_equal(W0, W)


def test_block_matches_rows_random():
    rng = make_rng(1)
    for lam in LAMS:
        v = np.round(rng.normal(size=40), 1)
        W = np.round(rng.normal(size=(40, 7)), 1)
        vo, Wo = prox_block_single(v, W, lam)
        for i in range(40):
            a, b = prox_single(v[i], W[i], lam)
            assert abs(vo[i] - a) <= 1e-12 and np.allclose(Wo[i], b, atol=1e-12)
