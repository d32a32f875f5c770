import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streampca import linalg
from streampca.errors import InvalidMatrix, NoConvergence, ZeroVector
from streampca.linalg import operator_norm, rayleigh_quotient, sym_eigen, trace


def closed_form_2x2(a, b, c):
    """Eigenvalues of [[a, b], [b, c]] in ascending order."""
    root = math.sqrt((a - c) ** 2 + 4 * b * b)
    return ((a + c) - root) / 2, ((a + c) + root) / 2


def random_symmetric(rng, d):
    A = rng.uniform(-1, 1, (d, d))
    return np.triu(A) + np.triu(A, 1).T


def check_spectrum(M, spec):
    lam, Q = spec.eigenvalues, spec.eigenvectors
    d = M.shape[0]
    assert np.all(np.diff(lam) >= 0)
    assert np.max(np.abs(np.linalg.norm(Q, axis=0) - 1)) <= 1e-12
    off = Q.T @ Q - np.eye(d)
    assert np.max(np.abs(off)) <= 1e-10
    for j in range(d):
        assert np.linalg.norm(M @ Q[:, j] - lam[j] * Q[:, j]) <= 1e-10 * (1 + abs(lam[j]))
    assert np.linalg.norm(Q @ np.diag(lam) @ Q.T - M) <= 1e-9 * np.linalg.norm(M) + 1e-300


def test_diagonal_matrix_gives_sorted_axes():
    spec = sym_eigen(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(spec.eigenvalues, [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(spec.eigenvectors, np.eye(3)[:, [1, 2, 0]])


def test_two_by_two_closed_form():
    spec = sym_eigen([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(spec.eigenvalues, closed_form_2x2(2, 1, 2), atol=1e-14)
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(spec.eigenvectors[:, 0], [s, -s], atol=1e-14)
    np.testing.assert_allclose(spec.eigenvectors[:, 1], [s, s], atol=1e-14)


def test_identity_any_basis_passes():
    M = np.eye(5)
    spec = sym_eigen(M)
    np.testing.assert_array_equal(spec.eigenvalues, np.ones(5))
    check_spectrum(M, spec)


def test_zero_matrix():
    spec = sym_eigen(np.zeros((4, 4)))
    np.testing.assert_array_equal(spec.eigenvalues, np.zeros(4))
    check_spectrum(np.zeros((4, 4)), spec)


def test_sign_convention_largest_entry_positive(rng):
    spec = sym_eigen(random_symmetric(rng, 7))
    Q = spec.eigenvectors
    idx = np.argmax(np.abs(Q), axis=0)
    assert np.all(Q[idx, np.arange(7)] > 0)


def test_only_upper_triangle_is_read():
    M = np.array([[1.0, 2.0], [99.0, 1.0]])
    np.testing.assert_allclose(sym_eigen(M).eigenvalues, [-1.0, 3.0], atol=1e-14)


@pytest.mark.parametrize("bad", [[[np.nan, 0], [0, 1]], [[np.inf, 0], [0, 1]], [1.0, 2.0]])
def test_invalid_matrix(bad):
    with pytest.raises(InvalidMatrix):
        sym_eigen(bad)


def test_no_convergence(monkeypatch):
    monkeypatch.setattr(linalg, "MAX_SWEEPS", 0)
    with pytest.raises(NoConvergence):
        sym_eigen([[1.0, 0.5], [0.5, 2.0]])


def test_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        sym_eigen(np.eye(2), tol=0.0)


@pytest.mark.parametrize("d", [2, 5, 10, 20])
def test_random_invariants(d):
    rng = np.random.default_rng(d)
    for _ in range(20):
        M = random_symmetric(rng, d)
        spec = sym_eigen(M)
        check_spectrum(M, spec)
        assert abs(trace(M) - spec.eigenvalues.sum()) <= 1e-10 * (1 + abs(trace(M)))
        # independent second route
        np.testing.assert_allclose(spec.eigenvalues, np.linalg.eigvalsh(M), atol=1e-11)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(min_value=1, max_value=12),
    st.integers(min_value=0, max_value=2**32 - 1),
    st.floats(min_value=1e-3, max_value=1e3),
)
def test_invariants_hold_at_any_scale(d, seed, scale):
    M = scale * random_symmetric(np.random.default_rng(seed), d)
    check_spectrum(M, sym_eigen(M))


def test_repeated_eigenvalues():
    rng = np.random.default_rng(7)
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    M = Q @ np.diag([1.0, 1.0, 1.0, 2.0, 2.0, 5.0]) @ Q.T
    M = np.triu(M) + np.triu(M, 1).T
    spec = sym_eigen(M)
    np.testing.assert_allclose(spec.eigenvalues, [1, 1, 1, 2, 2, 5], atol=1e-12)
    check_spectrum(M, spec)


def test_operator_norm_examples():
    assert operator_norm(np.diag([1.0] + [0.9] * 9)) == pytest.approx(1.0, abs=1e-15)
    assert operator_norm(np.zeros((3, 3))) == 0.0
    assert operator_norm([[0.0, 2.0], [2.0, 0.0]]) == pytest.approx(2.0, abs=1e-14)
    assert operator_norm(np.diag([-3.0, 1.0])) == 3.0


def test_trace_examples():
    assert trace(np.diag([1.0] + [0.9] * 9)) == pytest.approx(9.1, abs=1e-14)
    assert trace(np.eye(6)) == 6.0
    assert trace(np.zeros((2, 2))) == 0.0


def test_rayleigh_quotient_examples():
    M = np.diag([1.0, 2.0])
    assert rayleigh_quotient(M, [1.0, 0.0]) == 1.0
    assert rayleigh_quotient(M, [1.0, 1.0]) == 1.5
    v = np.array([0.3, -1.7])
    assert rayleigh_quotient(M, 7 * v) == pytest.approx(rayleigh_quotient(M, v), rel=1e-15)
    with pytest.raises(ZeroVector):
        rayleigh_quotient(M, [0.0, 0.0])


def test_rayleigh_quotient_within_spectrum(rng):
    M = random_symmetric(rng, 8)
    lam = sym_eigen(M).eigenvalues
    for _ in range(1000):
        v = rng.standard_normal(8)
        rq = rayleigh_quotient(M, v)
        assert lam[0] - 1e-12 <= rq <= lam[-1] + 1e-12
