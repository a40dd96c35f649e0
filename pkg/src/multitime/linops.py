"""Dense complex linear algebra for the quantum sector.

Thin wrappers over numpy/scipy with the conventions used by the rest of
the package: matrices are square ``complex128`` arrays, states are 1-d
``complex128`` arrays, and the tensor-product ordering puts particle 1 in
the leftmost Kronecker factor.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "identity",
    "as_matrix",
    "dagger",
    "norm_inf",
    "is_hermitian",
    "commutator",
    "kron",
    "matrix_exponential",
    "hermitian_propagator",
    "pauli_string",
    "embed",
]

MAX_DENSE_DIM = 1024

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": SIGMA_X,
    "Y": SIGMA_Y,
    "Z": SIGMA_Z,
}


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def norm_inf(a: np.ndarray) -> float:
    """Induced infinity norm (max absolute row sum)."""
    a = np.atleast_2d(a)
    return float(np.abs(a).sum(axis=1).max())


def is_hermitian(a: np.ndarray, tol: float = 1e-10) -> bool:
    a = as_matrix(a)
    return norm_inf(a - dagger(a)) < tol


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first argument is the leftmost tensor leg."""
    return np.kron(as_matrix(a), as_matrix(b))


def matrix_exponential(a: np.ndarray) -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] > MAX_DENSE_DIM:
        raise ValueError(f"dense matrix exponential limited to dim {MAX_DENSE_DIM}")
    if not np.all(np.isfinite(a)):
        raise OverflowError("matrix exponential of non-finite input")
    r = scipy.linalg.expm(a)
    if not np.all(np.isfinite(r)):
        raise OverflowError("matrix exponential overflowed")
    return r


def hermitian_propagator(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i h dt) for Hermitian h via eigendecomposition (exactly unitary
    up to rounding; much faster than expm at the small dims used here)."""
    h = as_matrix(h)
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * w * dt)
    return (v * phases) @ dagger(v)


def pauli_string(symbols: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis, e.g. ``"ZI"`` = sigma_z x I."""
    if not symbols or any(c not in _PAULI for c in symbols):
        raise ValueError(f"invalid Pauli string {symbols!r}")
    m = _PAULI[symbols[0]]
    for c in symbols[1:]:
        m = np.kron(m, _PAULI[c])
    return m


def embed(op: np.ndarray, site: int, n: int, local_dim: int) -> np.ndarray:
    """Place ``op`` on 1-based ``site`` of an n-fold tensor product."""
    op = as_matrix(op)
    if op.shape[0] != local_dim:
        raise ValueError("operator dimension does not match local_dim")
    if not 1 <= site <= n:
        raise ValueError(f"site {site} outside 1..{n}")
    m = np.eye(1, dtype=np.complex128)
    for j in range(1, n + 1):
        m = np.kron(m, op if j == site else np.eye(local_dim, dtype=np.complex128))
    return m
