"""Dense complex matrix kernel.

Everything downstream (symmetry discovery, perturbation construction, the
speed-limit formulas) is built on the handful of primitives in this module:
Hermitian/unitary validation, norms, eigendecomposition-based exponentials,
Kronecker products, row-vectorization and the adjoint superoperator, and
tensor-factor permutation operators.

Matrices are plain ``numpy.ndarray`` values with complex128 entries.  The
validator helpers (``require_square``, ``require_hermitian``, ...) are the
boundary where array-shaped garbage is rejected; internal code may assume
validated input.
"""

from __future__ import annotations

import numpy as np

# Default tolerances.  All are relative to max(1, norm) of the operand unless
# noted otherwise, so tests are scale-free.
TAU_H = 1e-10          # hermiticity, Frobenius scale
TAU_U = 1e-10          # unitarity, Frobenius scale per sqrt(dim)
TAU_RANK = 1e-9        # rank / nullspace decisions, relative to s_max
GAP_RTOL = 1e-8        # eigenvalue clustering, relative to operator norm
DEGENERACY_RTOL = 1e-8  # kernel-projection degeneracy cut, relative to ||H||_inf

# Guard for materialized superoperators (adjoint representations, the
# quadratic restoration map).  Counts dense entries; larger problems must go
# through the matrix-free paths in the bounds module.
DIMENSION_CAP = 2**20


class QslError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(QslError):
    """Operands have incompatible or non-square shapes."""


class DimensionCapError(QslError):
    """A dense intermediate would exceed the configured entry cap."""


class ValidationError(QslError):
    """A value violates its numerical contract (hermiticity, unitarity, ...)."""


class NoSpectralGapError(QslError):
    """All eigenvalues coincide; no nonzero spectral gap exists."""


class ClosureTruncatedError(QslError):
    """Lie closure hit the dimension limit before closing.

    Carries the partial basis found so far in ``partial_basis``.
    """

    def __init__(self, message: str, partial_basis=None):
        super().__init__(message)
        self.partial_basis = partial_basis


class ConditioningError(QslError):
    """A linear solve failed its residual check.

    ``diagnostics`` holds named floats describing the failure.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def as_operator(M) -> np.ndarray:
    """Coerce to a 2-d complex128 array without copying when possible."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of rank {A.ndim}")
    return A


def require_square(M) -> np.ndarray:
    A = as_operator(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return A


def require_same_dimension(A, B) -> tuple[np.ndarray, np.ndarray]:
    A, B = require_square(A), require_square(B)
    if A.shape != B.shape:
        raise DimensionError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return A, B


def is_hermitian(M, tol: float = TAU_H) -> bool:
    A = require_square(M)
    return np.linalg.norm(A - A.conj().T) <= tol * max(1.0, np.linalg.norm(A))


def require_hermitian(M, tol: float = TAU_H) -> np.ndarray:
    A = require_square(M)
    defect = np.linalg.norm(A - A.conj().T)
    if defect > tol * max(1.0, np.linalg.norm(A)):
        raise ValidationError(f"matrix is not Hermitian (defect {defect:.3e})")
    return A


def require_unitary(M, tol: float = TAU_U) -> np.ndarray:
    A = require_square(M)
    d = A.shape[0]
    defect = np.linalg.norm(A.conj().T @ A - np.eye(d))
    if defect > tol * np.sqrt(d):
        raise ValidationError(f"matrix is not unitary (defect {defect:.3e})")
    return A


def check_entry_cap(entries: int, cap: int = DIMENSION_CAP) -> None:
    if entries > cap:
        raise DimensionCapError(
            f"dense intermediate needs {entries} entries, cap is {cap}; "
            "use a matrix-free method for problems of this size"
        )


def hermitize(M) -> np.ndarray:
    """(M + M†)/2.  Idempotent on Hermitian input."""
    A = require_square(M)
    return 0.5 * (A + A.conj().T)


def commutator(A, B) -> np.ndarray:
    """[A, B] = AB - BA."""
    A, B = require_same_dimension(A, B)
    return A @ B - B @ A


def frobenius_norm(M) -> float:
    return float(np.linalg.norm(as_operator(M)))


def operator_norm(M) -> float:
    """Largest singular value; max |eigenvalue| on the Hermitian path."""
    A = as_operator(M)
    if A.shape[0] == A.shape[1] and is_hermitian(A):
        w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
        return float(np.max(np.abs(w))) if w.size else 0.0
    return float(np.linalg.norm(A, ord=2))


def matrix_exponential(H, t: float) -> np.ndarray:
    """exp(-iHt) for Hermitian H, via eigendecomposition."""
    A = require_hermitian(H)
    w, V = np.linalg.eigh(hermitize(A))
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def kron(A, B) -> np.ndarray:
    """Kronecker product, (A⊗B)[i·dB+k, j·dB+l] = A[i,j]·B[k,l]."""
    return np.kron(as_operator(A), as_operator(B))


def row_vectorize(M) -> np.ndarray:
    """Stack rows into a vector; ||M||_F = ||vec(M)||_2."""
    return as_operator(M).reshape(-1)


def devectorize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DimensionError(f"vector of length {v.size} is not a square matrix")
    return v.reshape(d, d)


def adjoint_superoperator(H) -> np.ndarray:
    """Matrix of Y ↦ [H, Y] on row-vectorized Y: H⊗1 - 1⊗Hᵀ.

    Hermitian whenever H is, since the Hilbert-Schmidt inner product makes the
    commutator map self-adjoint.
    """
    A = require_hermitian(H)
    d = A.shape[0]
    check_entry_cap(d**4)
    eye = np.eye(d)
    return np.kron(A, eye) - np.kron(eye, A.T)


def iota(H) -> np.ndarray:
    """H⊗1 + 1⊗H on the doubled space; spectrum is pairwise eigenvalue sums."""
    A = require_hermitian(H)
    d = A.shape[0]
    check_entry_cap(d**4)
    eye = np.eye(d)
    return np.kron(A, eye) + np.kron(eye, A)


def permutation_operator(perm, local_dims) -> np.ndarray:
    """Unitary permuting tensor factors: factor a of the input moves to slot
    perm[a] of the output.

    For a product state v_0 ⊗ ... ⊗ v_{k-1} the result places v_a at position
    perm[a].  Transpositions are self-inverse; compositions satisfy
    P_sigma @ P_tau = P_{sigma after tau}.
    """
    perm = list(perm)
    dims = [int(d) for d in local_dims]
    k = len(dims)
    if sorted(perm) != list(range(k)):
        raise DimensionError(f"not a permutation of {k} slots: {perm}")
    if any(d < 1 for d in dims):
        raise DimensionError(f"local dimensions must be positive: {dims}")
    D = 1
    for d in dims:
        D *= d
    check_entry_cap(D)
    idx = np.arange(D)
    digits = np.array(np.unravel_index(idx, dims))
    new_digits = np.empty_like(digits)
    new_dims = [0] * k
    for a, target in enumerate(perm):
        new_digits[target] = digits[a]
        new_dims[target] = dims[a]
    new_idx = np.ravel_multi_index(list(new_digits), new_dims)
    P = np.zeros((D, D), dtype=complex)
    P[new_idx, idx] = 1.0
    return P


def cluster_eigenvalues(values, tol: float) -> list[np.ndarray]:
    """Group sorted real values into clusters whose adjacent gaps are <= tol."""
    w = np.sort(np.asarray(values, dtype=float).reshape(-1))
    if w.size == 0:
        return []
    clusters = [[w[0]]]
    for x in w[1:]:
        if x - clusters[-1][-1] <= tol:
            clusters[-1].append(x)
        else:
            clusters.append([x])
    return [np.asarray(c) for c in clusters]


def min_eigenvalue_gap(values, cluster_tol: float) -> float:
    """Smallest gap between distinct eigenvalue clusters.

    Raises NoSpectralGapError when everything collapses to one cluster.
    """
    clusters = cluster_eigenvalues(values, cluster_tol)
    if len(clusters) < 2:
        raise NoSpectralGapError("all eigenvalues coincide within tolerance")
    reps = np.array([c.mean() for c in clusters])
    return float(np.min(np.diff(reps)))
