"""Kernel matrices between lattice boxes and their norms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

DENSE_LIMIT = 3000


@dataclass
class KernelMatrix:
    """Dense complex matrix indexed by two finite sets of lattice points.

    ``truncation_error`` bounds the operator-norm effect of discarded
    entries (0 when the matrix is exact); ``entry_error`` bounds the
    absolute error of each stored entry.
    """
    entries: np.ndarray
    row_coords: np.ndarray | None = None
    col_coords: np.ndarray | None = None
    truncation_error: float = 0.0
    entry_error: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.entries = np.atleast_2d(np.asarray(self.entries))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def entry_error_norm(self) -> float:
        """Bound on the operator norm of the entrywise error matrix."""
        return float(self.entry_error * np.sqrt(self.entries.shape[0] * self.entries.shape[1]))


def _array(K) -> np.ndarray:
    return K.entries if isinstance(K, KernelMatrix) else np.atleast_2d(np.asarray(K))


def operator_norm(K, tol: float = 1e-10) -> float:
    """Largest singular value.

    Dense LAPACK SVD for matrices up to ``DENSE_LIMIT`` on a side; beyond
    that and for ``LinearOperator`` input, a Lanczos lower estimate
    converged to relative ``tol``.
    """
    if isinstance(K, scipy.sparse.linalg.LinearOperator):
        if min(K.shape) < 3:
            return float(scipy.linalg.svdvals(K @ np.eye(K.shape[1]))[0])
        return _lanczos_norm(K, tol)
    A = _array(K)
    if A.size == 0:
        return 0.0
    if max(A.shape) <= DENSE_LIMIT or min(A.shape) < 3:
        return float(scipy.linalg.svdvals(A)[0])
    return _lanczos_norm(scipy.sparse.linalg.aslinearoperator(A), tol)


def _lanczos_norm(A: scipy.sparse.linalg.LinearOperator, tol: float,
                  max_steps: int = 400) -> float:
    """sqrt of the top Ritz value of A^H A from Lanczos with full
    reorthogonalisation, stopped when the Ritz value stagnates to relative
    ``tol``.  Ritz values never exceed the largest eigenvalue, so this is a
    lower estimate of the norm that converges fast even when the top of the
    spectrum is clustered (where residual-based stopping does not)."""
    n = A.shape[1]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n).astype(complex)
    v /= np.linalg.norm(v)
    basis = [v]
    alpha, beta = [], []
    theta_prev = -np.inf
    theta = 0.0
    for j in range(min(max_steps, n)):
        w = A.rmatvec(A.matvec(basis[-1]))
        a = float(np.vdot(basis[-1], w).real)
        alpha.append(a)
        Q = np.array(basis)
        for _ in range(2):
            w = w - Q.T @ (Q.conj() @ w)
        b = float(np.linalg.norm(w))
        if (j + 1) % 5 == 0 or b < 1e-14 * max(abs(a), 1e-300):
            theta = scipy.linalg.eigvalsh_tridiagonal(np.array(alpha), np.array(beta),
                                                      select="i", select_range=(j, j))[0]
            if (j >= 30 and theta - theta_prev <= tol * abs(theta)) or b < 1e-14 * max(abs(a), 1e-300):
                break
            theta_prev = theta
        beta.append(b)
        basis.append(w / b)
    else:
        theta = scipy.linalg.eigvalsh_tridiagonal(np.array(alpha), np.array(beta[:len(alpha) - 1]),
                                                  select="i", select_range=(len(alpha) - 1,
                                                                            len(alpha) - 1))[0]
    return float(np.sqrt(max(theta, 0.0)))


def hs_norm(K) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    A = _array(K)
    return float(np.sqrt(np.sum(np.abs(A) ** 2)))


def hermitian_spectrum(K, atol: float = 1e-12) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, ascending."""
    A = _array(K)
    if A.shape[0] != A.shape[1]:
        raise ValueError("hermitian_spectrum needs a square matrix")
    dev = np.max(np.abs(A - A.conj().T)) if A.size else 0.0
    if dev > atol:
        raise ValueError(f"matrix is not Hermitian (max |K - K*| = {dev:.3g})")
    return scipy.linalg.eigvalsh(A)
