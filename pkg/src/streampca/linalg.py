"""Dense symmetric-matrix primitives and a cyclic Jacobi eigensolver.

The eigensolver is the offline ground-truth oracle for every streaming
estimator in the package, so it favours accuracy and orthonormality of the
returned basis over speed.  Eigenvalues are always returned in ascending
order.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatrix, NoConvergence, ZeroVector

DEFAULT_TOL = 1e-12
MAX_SWEEPS = 100


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues; column ``j`` of ``eigenvectors`` pairs with ``eigenvalues[j]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def d(self):
        return self.eigenvalues.shape[0]

    def pair(self, j):
        return self.eigenvalues[j], self.eigenvectors[:, j]


def as_symmetric(M):
    """Return a float copy of ``M`` with the upper triangle mirrored onto the lower one."""
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidMatrix("matrix has non-finite entries")
    upper = np.triu(A)
    return upper + np.triu(A, 1).T


def _fix_signs(Q):
    # largest-magnitude entry of every column made positive
    idx = np.argmax(np.abs(Q), axis=0)
    signs = np.sign(Q[idx, np.arange(Q.shape[1])])
    signs[signs == 0] = 1.0
    return Q * signs


def sym_eigen(M, tol=DEFAULT_TOL):
    """Eigen-decomposition of a real symmetric matrix by row-cyclic Jacobi sweeps.

    Sweeps continue until the largest off-diagonal magnitude drops below
    ``tol * ||M||_F``.  Raises :class:`NoConvergence` after ``MAX_SWEEPS``.

    >>> spec = sym_eigen([[2.0, 1.0], [1.0, 2.0]])
    >>> spec.eigenvalues
    array([1., 3.])
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    A = as_symmetric(M)
    d = A.shape[0]
    Q = np.eye(d)
    threshold = tol * np.linalg.norm(A)

    for _ in range(MAX_SWEEPS + 1):
        off = np.abs(A - np.diag(np.diag(A)))
        if d == 1 or off.max() <= threshold:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c

                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0

                vec_p = Q[:, p].copy()
                vec_q = Q[:, q].copy()
                Q[:, p] = c * vec_p - s * vec_q
                Q[:, q] = s * vec_p + c * vec_q
    else:
        raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")

    eigenvalues = np.diag(A).copy()
    order = np.argsort(eigenvalues, kind="stable")
    return Spectrum(eigenvalues[order], _fix_signs(Q[:, order]))


def operator_norm(M):
    """Spectral norm ``max_j |lambda_j|`` of a symmetric matrix."""
    lam = sym_eigen(M).eigenvalues
    return float(np.max(np.abs(lam)))


def trace(M):
    A = np.asarray(M, dtype=float)
    return float(np.trace(A))


def rayleigh_quotient(M, v):
    """``<Mv, v> / ||v||^2``; invariant to rescaling of ``v``."""
    A = np.asarray(M, dtype=float)
    v = np.asarray(v, dtype=float)
    vv = float(v @ v)
    if vv == 0.0:
        raise ZeroVector("Rayleigh quotient of the zero vector")
    return float(v @ (A @ v)) / vv
