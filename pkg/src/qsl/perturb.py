"""Symmetry-restoring perturbations.

Given a symmetry S broken by the drift H_d, the minimal-Frobenius-norm
Hermitian perturbation with [S, H_d + ΔH] = 0 is the Moore-Penrose solution
ΔH = -ad_S⁺ ad_S(H_d).  For linear S this is an entrywise projection in the
eigenbasis of S (kill every matrix element of H_d joining distinct eigenvalue
clusters); for quadratic S it is a least-squares solve of the doubled-space
commutation constraint over Hermitian arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lie import Symmetry
from .matcore import (
    ConditioningError,
    GAP_RTOL,
    TAU_RANK,
    ValidationError,
    check_entry_cap,
    commutator,
    frobenius_norm,
    hermitize,
    iota,
    min_eigenvalue_gap,
    operator_norm,
    require_hermitian,
    row_vectorize,
)


@dataclass
class Perturbation:
    """A drift modification ΔH restoring a symmetry, with its norms."""

    matrix: np.ndarray
    symmetry: Symmetry
    op_norm: float
    frob_norm: float
    residual: float | None = None

    @classmethod
    def from_matrix(cls, symmetry: Symmetry, matrix, drift=None) -> "Perturbation":
        """Wrap a known-feasible ΔH, computing norms and, when the drift is
        supplied, the commutation residual of the restored Hamiltonian."""
        dH = require_hermitian(matrix)
        residual = None
        if drift is not None:
            H = require_hermitian(drift) + dH
            if symmetry.kind == "linear":
                residual = frobenius_norm(commutator(symmetry.matrix, H))
            else:
                residual = frobenius_norm(commutator(symmetry.matrix, iota(H)))
        return cls(dH, symmetry, operator_norm(dH), frobenius_norm(dH), residual)


def spectral_gap_min(S) -> float:
    """Smallest nonzero gap between eigenvalues of S.

    Eigenvalues are clustered at a tolerance relative to the operator norm
    before gaps are measured, so numerically-degenerate pairs do not produce
    spurious tiny gaps.  Equals 1 for orthogonal projections.
    """
    A = require_hermitian(S)
    w = np.linalg.eigvalsh(A)
    return min_eigenvalue_gap(w, GAP_RTOL * float(np.max(np.abs(w))))


def _cluster_labels(w: np.ndarray, tol: float) -> np.ndarray:
    """Cluster ids for ascending eigenvalues, split at adjacent gaps > tol."""
    labels = np.zeros(w.size, dtype=int)
    for i in range(1, w.size):
        labels[i] = labels[i - 1] + (1 if w[i] - w[i - 1] > tol else 0)
    return labels


def _restore_linear(S: Symmetry, H_d: np.ndarray, tol: float) -> Perturbation:
    w, V = np.linalg.eigh(S.matrix)
    cluster_tol = GAP_RTOL * float(np.max(np.abs(w)))
    labels = _cluster_labels(w, cluster_tol)
    Hd_eig = V.conj().T @ H_d @ V
    off_cluster = labels[:, None] != labels[None, :]
    dH_eig = np.where(off_cluster, -Hd_eig, 0.0)
    dH = hermitize(V @ dH_eig @ V.conj().T)
    residual = frobenius_norm(commutator(S.matrix, H_d + dH))
    limit = tol * max(1.0, S.frobenius * frobenius_norm(H_d))
    if residual > limit:
        raise ConditioningError(
            "restored drift still fails to commute with the symmetry",
            {"residual": residual, "limit": limit},
        )
    return Perturbation(dH, S, operator_norm(dH), frobenius_norm(dH), residual)


def _hermitian_unit_basis(d: int) -> list[np.ndarray]:
    basis = []
    for i in range(d):
        E = np.zeros((d, d), dtype=complex)
        E[i, i] = 1.0
        basis.append(E)
    for i in range(d):
        for j in range(i + 1, d):
            E = np.zeros((d, d), dtype=complex)
            E[i, j] = E[j, i] = 1.0 / np.sqrt(2)
            basis.append(E)
            F = np.zeros((d, d), dtype=complex)
            F[i, j] = 1j / np.sqrt(2)
            F[j, i] = -1j / np.sqrt(2)
            basis.append(F)
    return basis


def _restore_quadratic(S: Symmetry, H_d: np.ndarray, tol: float) -> Perturbation:
    d = H_d.shape[0]
    check_entry_cap(2 * d**6)  # least-squares matrix is (2 d^4) x d^2

    def embed(M: np.ndarray) -> np.ndarray:
        v = row_vectorize(M)
        return np.concatenate([v.real, v.imag])

    def constraint(Y: np.ndarray) -> np.ndarray:
        return commutator(S.matrix, iota(Y))

    basis = _hermitian_unit_basis(d)
    M = np.array([embed(constraint(B)) for B in basis]).T
    rhs = -embed(constraint(H_d))
    coeffs, *_ = np.linalg.lstsq(M, rhs, rcond=TAU_RANK)
    dH = np.zeros((d, d), dtype=complex)
    for c, B in zip(coeffs, basis):
        dH = dH + c * B
    dH = hermitize(dH)
    residual = frobenius_norm(constraint(H_d + dH))
    limit = tol * max(1.0, S.frobenius * frobenius_norm(H_d))
    if residual > limit:
        raise ConditioningError(
            "quadratic restoration left a commutation residual",
            {"residual": residual, "limit": limit},
        )
    return Perturbation(dH, S, operator_norm(dH), frobenius_norm(dH), residual)


def restore_symmetry(S: Symmetry, H_d, tol: float = TAU_RANK) -> Perturbation:
    """Minimal-Frobenius-norm Hermitian ΔH with the symmetry restored.

    Linear kind: [S, H_d + ΔH] = 0, solved in the eigenbasis of S.  Quadratic
    kind: [S, (H_d+ΔH)⊗1 + 1⊗(H_d+ΔH)] = 0, solved by least squares over an
    orthonormal Hermitian basis (the minimal-coefficient-norm solution is the
    minimal-Frobenius-norm one).  Drift directions already compatible with S
    are left untouched, so ΔH is generally much smaller than -H_d.
    """
    H = require_hermitian(H_d)
    if S.kind == "linear":
        if H.shape[0] != S.dimension:
            raise ValidationError("drift dimension does not match symmetry")
        return _restore_linear(S, H, tol)
    if H.shape[0] != S.base_dimension:
        raise ValidationError("drift dimension does not match quadratic symmetry")
    return _restore_quadratic(S, H, tol)


def perturbation_norm_bound(S: Symmetry, H_d) -> float:
    """Analytic bound ||ΔH||_inf <= ||[S, H_d]||_F / sigma_min(S).

    Linear kind only; always at least the operator norm of the perturbation
    returned by restore_symmetry.
    """
    if S.kind != "linear":
        raise ValidationError("analytic perturbation bound applies to linear "
                              "symmetries only")
    H = require_hermitian(H_d)
    return frobenius_norm(commutator(S.matrix, H)) / S.sigma_min
