import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pathprox.numerics import (
    InputValidationError,
    ShapeError,
    apply_signs,
    as_matrix,
    magnitude_order,
    make_rng,
    matmul,
    sign_plus,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_magnitude_order_basic():
    o = magnitude_order([3.0, -5.0, 1.0])
    assert o.perm.tolist() == [1, 0, 2]
    assert o.sorted_abs.tolist() == [5.0, 3.0, 1.0]
    assert o.prefix.tolist() == [0.0, 5.0, 8.0, 9.0]


def test_magnitude_order_empty():
    o = magnitude_order([])
    assert len(o) == 0
    assert o.sorted_abs.size == 0
    assert o.prefix.tolist() == [0.0]


def test_magnitude_order_ties_keep_index_order():
    o = magnitude_order([2.0, -2.0])
    assert o.perm.tolist() == [0, 1]
    assert o.sorted_abs.tolist() == [2.0, 2.0]


def test_magnitude_order_rejects_nan():
    with pytest.raises(InputValidationError):
        magnitude_order([1.0, np.nan])


@given(arrays(np.float64, st.integers(0, 40), elements=finite))
def test_magnitude_order_invariants(v):
    o = magnitude_order(v)
    assert np.all(np.diff(o.sorted_abs) <= 0)
    assert sorted(o.perm.tolist()) == list(range(len(v)))
    assert np.array_equal(o.sorted_abs, np.abs(v)[o.perm])
    assert sorted(np.abs(v).tolist()) == sorted(o.sorted_abs.tolist())
    assert o.prefix[0] == 0.0 and o.prefix.shape == (len(v) + 1,)
    l1 = np.abs(v).sum()
    assert abs(o.prefix[-1] - l1) <= 1e-12 * max(1, len(v)) * max(1.0, l1)


def test_matmul_identity_and_scalar():
    M = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(matmul(np.eye(2), M), M)
    assert matmul([[3.0]], [[4.0]])[0, 0] == 12.0


def test_matmul_matches_triple_loop():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    naive = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                naive[i, j] += a[i, k] * b[k, j]
    assert np.allclose(matmul(a, b), naive, atol=1e-14)


def test_matmul_shape_error():
    with pytest.raises(ShapeError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_apply_signs_examples():
    assert apply_signs([2 / 3], [-1.0]).tolist() == [-2 / 3]
    assert apply_signs([0.0, 1.0], [5.0, -5.0]).tolist() == [0.0, -1.0]
    assert apply_signs([1.0, 2.0, 3.0], [0.0, -0.1, 0.1]).tolist() == [1.0, -2.0, 3.0]


def test_apply_signs_errors():
    with pytest.raises(ShapeError):
        apply_signs([1.0], [1.0, 2.0])
    with pytest.raises(InputValidationError):
        apply_signs([-1.0], [1.0])


def test_sign_plus_zero_is_positive():
    assert sign_plus([0.0, -0.0, -3.0]).tolist() == [1.0, 1.0, -1.0]


def test_as_matrix_rejects_inf_and_wrong_rank():
    with pytest.raises(InputValidationError):
        as_matrix([[1.0, np.inf]])
    with pytest.raises(ShapeError):
        as_matrix([1.0, 2.0])


def test_rng_streams_reproducible():
    a = make_rng(12345).random(10_000)
    b = make_rng(12345).random(10_000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, make_rng(12346).random(10_000))


@settings(max_examples=50)
@given(st.integers(0, 2**63 - 1))
def test_rng_any_seed(seed):
    assert np.array_equal(make_rng(seed).normal(size=5), make_rng(seed).normal(size=5))
