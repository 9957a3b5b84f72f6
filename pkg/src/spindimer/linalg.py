"""Dense complex linear algebra for the 2-, 3- and 6-dimensional operators of the dimer.

Matrices are plain ``numpy.ndarray`` objects (complex128). The eigensolver is a
cyclic Jacobi iteration, which is simple and unconditionally stable at these sizes.
"""
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NonHermitianInput, NumericalGuard

HERMITIAN_TOL = 1e-12
RESIDUAL_TOL = 1e-10
JACOBI_TOL = 1e-14
MAX_SWEEPS = 60

QUBIT_DIM = 2
QUTRIT_DIM = 3


class EigenSystem(NamedTuple):
    """Eigenvalues in ascending order with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(m):
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def dagger(m):
    return np.conj(np.asarray(m)).T


def is_hermitian(m, tol=HERMITIAN_TOL):
    a = as_matrix(m)
    return a.shape[0] == a.shape[1] and bool(np.all(np.abs(a - dagger(a)) <= tol))


def check_hermitian(m, tol=HERMITIAN_TOL):
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"square matrix required, got {a.shape}")
    dev = float(np.max(np.abs(a - dagger(a)), initial=0.0))
    if dev > tol:
        raise NonHermitianInput(f"matrix is not Hermitian (max |M - M^dagger| = {dev:.3e})")
    return a


def kron(a, b):
    """Tensor product with block ordering ``a[i, j] * b``."""
    a = as_matrix(a)
    b = as_matrix(b)
    m, n = a.shape
    p, q = b.shape
    out = np.empty((m * p, n * q), dtype=complex)
    for i in range(m):
        for j in range(n):
            out[i * p:(i + 1) * p, j * q:(j + 1) * q] = a[i, j] * b
    return out


def _off_norm(a):
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off.real ** 2 + off.imag ** 2)))


def hermitian_eig(m):
    """Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then applies
    the real two-by-two Jacobi rotation. Sweeps stop once the off-diagonal Frobenius
    mass falls below ``JACOBI_TOL`` relative to the matrix norm.

    Eigenvectors inside a degenerate cluster are whatever the rotations produce;
    callers must not rely on a particular basis there.
    """
    a = check_hermitian(m).copy()
    n = a.shape[0]
    a = 0.5 * (a + dagger(a))
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1.0)
    for _ in range(MAX_SWEEPS):
        if _off_norm(a) <= JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b <= 1e-300 or b <= 1e-18 * (abs(a[p, p]) + abs(a[q, q])):
                    continue
                u = apq / b
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * b)
                t = 1.0 / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                uc = np.conj(u)
                col_p = a[:, p].copy()
                col_q = a[:, q]
                a[:, p] = c * col_p - s * uc * col_q
                a[:, q] = s * col_p + c * uc * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :]
                a[p, :] = c * row_p - s * u * row_q
                a[q, :] = s * row_p + c * u * row_q
                a[p, q] = a[q, p] = 0.0
                a[p, p] = app - t * b
                a[q, q] = aqq + t * b
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * uc * v[:, q]
                v[:, q] = s * vp + c * uc * v[:, q]
    else:
        raise NumericalGuard("Jacobi iteration did not converge")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return EigenSystem(w[order], v[:, order])


def eigvalsh(m):
    return hermitian_eig(m).eigenvalues


def _check_six(rho):
    r = as_matrix(rho)
    if r.shape != (QUBIT_DIM * QUTRIT_DIM, QUBIT_DIM * QUTRIT_DIM):
        raise DimensionMismatch(f"expected a 6x6 qubit-qutrit operator, got {r.shape}")
    return r


def partial_trace(rho, side):
    """Trace out ``side`` ("qubit" or "qutrit") of a 6x6 operator.

    Tracing the qutrit leaves the 2x2 qubit marginal and vice versa.
    """
    r = _check_six(rho).reshape(QUBIT_DIM, QUTRIT_DIM, QUBIT_DIM, QUTRIT_DIM)
    if side == "qutrit":
        return np.einsum("ajbj->ab", r)
    if side == "qubit":
        return np.einsum("iaib->ab", r)
    raise ValueError(f"side must be 'qubit' or 'qutrit', not {side!r}")


def partial_transpose_qubit(rho):
    r = _check_six(rho).reshape(QUBIT_DIM, QUTRIT_DIM, QUBIT_DIM, QUTRIT_DIM)
    return r.transpose(2, 1, 0, 3).reshape(6, 6)


def trace_norm(m):
    return float(np.sum(np.abs(hermitian_eig(m).eigenvalues)))


def hs_inner(a, b):
    """Hilbert-Schmidt pairing ``Tr(A B)``; real for Hermitian arguments."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    # Tr(AB) = sum_ij A_ij B_ji
    return float(np.sum(a * b.T).real)


def hs_norm_sq(m):
    """Squared Hilbert-Schmidt norm ``Tr(M M^dagger)``."""
    return float(np.sum(np.abs(as_matrix(m)) ** 2))
