import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctspline import DimensionError, DomainError, StateSpaceModel, check_minimal, kernel_g, matrix_exponential
from ctspline.sysmodel import impulse_response
from oracles import expm_eig

SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_zero_time_gives_identity():
    M = np.random.default_rng(0).normal(size=(4, 4))
    assert np.array_equal(matrix_exponential(M, 0.0), np.eye(4))


def test_swap_matrix_at_one():
    E = matrix_exponential(SWAP, 1.0)
    expected = np.array([[1.5430806348, 1.1752011936], [1.1752011936, 1.5430806348]])
    assert np.allclose(E, expected, atol=1e-10)
    exact = np.array([[np.cosh(1), np.sinh(1)], [np.sinh(1), np.cosh(1)]])
    assert np.abs(E - exact).max() <= 1e-12
    assert np.abs(E - expm_eig(SWAP)).max() <= 1e-12


def test_diagonal():
    E = matrix_exponential(np.diag([-1.0, 2.0]), 0.5)
    assert np.allclose(np.diag(E), [0.6065306597, 2.7182818285], atol=1e-10)
    assert E[0, 1] == 0.0 and E[1, 0] == 0.0


@pytest.mark.parametrize("t", [0.3, 2.0, 7.5, 20.0])
def test_relative_accuracy_against_eigen_oracle(t):
    # symmetric, so the eigen route is itself well conditioned
    rng = np.random.default_rng(int(t * 10))
    B = rng.normal(size=(3, 3))
    M = (B + B.T) / np.linalg.norm(B + B.T, 1)
    w, V = np.linalg.eigh(M * t)
    ref = V @ np.diag(np.exp(w)) @ V.T
    E = matrix_exponential(M, t)
    assert np.abs(E - ref).max() <= 1e-12 * np.abs(ref).max() * 10


def test_batched_times_match_scalar_calls():
    M = np.array([[0.1, 2.0, 0.0], [-1.0, 0.0, 0.3], [0.0, 0.5, -0.2]])
    ts = np.array([0.0, 0.01, 1.0, 4.0, 9.0])
    batch = matrix_exponential(M, ts)
    assert batch.shape == (5, 3, 3)
    for k, t in enumerate(ts):
        assert np.array_equal(batch[k], matrix_exponential(M, t))


def test_rejects_non_square_and_non_finite():
    with pytest.raises(DimensionError):
        matrix_exponential(np.ones((2, 3)))
    with pytest.raises(DomainError):
        matrix_exponential(np.array([[np.nan]]))
    with pytest.raises(DomainError):
        matrix_exponential(np.eye(2), np.inf)


small_matrix = st.lists(st.floats(-1, 1), min_size=9, max_size=9).map(lambda v: np.array(v).reshape(3, 3))


@settings(max_examples=60, deadline=None)
@given(small_matrix, st.floats(0, 3), st.floats(0, 3))
def test_group_property(B, t1, t2):
    n = np.abs(B).sum(axis=0).max()
    M = B if n <= 2 else B * (2 / n)
    lhs = matrix_exponential(M, t1) @ matrix_exponential(M, t2)
    assert np.abs(lhs - matrix_exponential(M, t1 + t2)).max() <= 1e-10


@settings(max_examples=30, deadline=None)
@given(small_matrix, st.floats(0, 2))
def test_derivative_property(M, t):
    h = 1e-6
    fd = (matrix_exponential(M, t + h) - matrix_exponential(M, t)) / h
    assert np.abs(fd - M @ matrix_exponential(M, t)).max() <= 1e-4


def test_model_validation():
    with pytest.raises(ValueError):
        StateSpaceModel([[1.0, 0.0]], [1.0], [1.0])
    with pytest.raises(ValueError):
        StateSpaceModel(np.eye(2), [1.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        StateSpaceModel(np.eye(2), [1.0, np.inf], [1.0, 0.0])
    m = StateSpaceModel(SWAP, [1, 0], [0, 1])
    assert m.order == 2
    with pytest.raises(ValueError):
        m.A[0, 0] = 5.0


@pytest.mark.parametrize("A, b, c, expected", [
    (SWAP, [1, 0], [0, 1], (True, True)),
    (np.eye(2), [1, 0], [1, 0], (False, False)),
    ([[0.0]], [1.0], [1.0], (True, True)),
    (np.diag([1.0, 2.0]), [1, 1], [1, 0], (True, False)),
])
def test_check_minimal(A, b, c, expected):
    flags = check_minimal(StateSpaceModel(A, b, c))
    assert (flags.controllable, flags.observable) == expected


def test_kernel_examples(model):
    assert kernel_g(model, 1.6, 0.6) == pytest.approx(1.1752011936, abs=1e-10)
    assert kernel_g(model, 1.0, 1.0) == 0.0
    assert kernel_g(model, 1.0, 2.0) == 0.0


def test_kernel_vectorized_is_sinh(model):
    t = np.linspace(0, 3, 301)
    g = kernel_g(model, 2.0, t)
    assert np.allclose(g, np.where(t < 2.0, np.sinh(2.0 - t), 0.0), rtol=1e-13, atol=1e-15)


def test_kernel_rejects_bad_times(model):
    with pytest.raises(DomainError):
        kernel_g(model, 1.0, -0.1)
    with pytest.raises(DomainError):
        kernel_g(model, 0.0, 0.0)


def test_kernel_left_limit_is_cb_while_value_is_zero():
    m = StateSpaceModel([[-1.0]], [2.0], [3.0])
    assert kernel_g(m, 1.0, 1.0 - 1e-9) == pytest.approx(6.0, rel=1e-8)
    assert kernel_g(m, 1.0, 1.0) == 0.0


def test_impulse_response_batch(model):
    tau = np.array([0.0, 0.5, 1.0])
    assert np.allclose(impulse_response(model, tau), np.sinh(tau), atol=1e-15)
