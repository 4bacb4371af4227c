"""Dense complex matrix kernel.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. The
helpers here validate shapes and hermiticity and fix conventions (eigenvector
phase, rank tolerance) that the rest of the package relies on.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionError, InvalidInput

HERMITIAN_TOL = 1e-12
RANK_TOL = 1e-9
NULL_ATOL = 1e-12

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite, non-empty 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] == 0 or m.shape[1] == 0:
        raise InvalidInput(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix has non-finite entries")
    return m


def as_square(a) -> np.ndarray:
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def dagger(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def max_abs(a) -> float:
    """Max-entry norm, the norm used for every tolerance in this package."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(a)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and max_abs(m - dagger(m)) <= tol


def as_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = as_square(a)
    dev = max_abs(m - dagger(m))
    if dev > tol:
        raise InvalidInput(f"matrix is not Hermitian (max deviation {dev:.3g} > {tol:g})")
    return m


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return max_abs(dagger(u) @ u - np.eye(u.shape[0])) <= tol


def multiply(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def tensor(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``a[i, j] * b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(*ops) -> np.ndarray:
    out = as_matrix(ops[0])
    for op in ops[1:]:
        out = np.kron(out, as_matrix(op))
    return out


def _check_same_square(a, b):
    a, b = as_square(a), as_square(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def commutator(a, b) -> np.ndarray:
    a, b = _check_same_square(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = _check_same_square(a, b)
    return a @ b + b @ a


class EigenSystem(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    # first component with non-negligible modulus becomes real positive
    out = vecs.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = np.flatnonzero(np.abs(col) > 1e-10 * max(1.0, np.max(np.abs(col))))
        if idx.size:
            c = col[idx[0]]
            out[:, k] = col * (np.conj(c) / abs(c))
    return out


def hermitian_eigensystem(m) -> EigenSystem:
    """Eigen-decompose a Hermitian matrix.

    Eigenvalues come back ascending. Each eigenvector is rephased so its first
    non-negligible component is real and positive, which makes the output
    deterministic for non-degenerate spectra.
    """
    h = as_hermitian(m)
    h = 0.5 * (h + dagger(h))
    w, v = np.linalg.eigh(h)
    order = np.argsort(w, kind="stable")
    return EigenSystem(w[order], _fix_phase(v[:, order]))


def null_space_projector(m, tol: float = RANK_TOL, atol: float = NULL_ATOL) -> np.ndarray:
    """Orthogonal projector onto the kernel of a square matrix.

    Singular values at or below ``max(tol * s_max, atol)`` count as zero; the
    absolute floor stops a matrix that is pure roundoff from looking full rank.
    """
    a = as_square(m)
    n = a.shape[0]
    _, s, vh = np.linalg.svd(a)
    cutoff = max(tol * (s[0] if s.size else 0.0), atol)
    null = vh[s <= cutoff]
    if null.shape[0] == 0:
        return np.zeros((n, n), dtype=complex)
    p = dagger(null) @ null
    return 0.5 * (p + dagger(p))


def projector_onto(vectors) -> np.ndarray:
    """Projector onto the span of the given column vectors."""
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    if not s.size or s[0] == 0.0:
        return np.zeros((v.shape[0], v.shape[0]), dtype=complex)
    u = u[:, s > RANK_TOL * s[0]]
    return u @ dagger(u)
