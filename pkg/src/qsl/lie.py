"""Dynamical Lie algebra closure and symmetry discovery.

A bilinear control system H(t) = H_d + sum_j f_j(t) H_j generates the real
Lie algebra spanned by iterated commutators of {iH_d, iH_j}.  Symmetries live
in commutants: linear symmetries commute with every control on the base space,
quadratic symmetries commute with the doubled-space lifts H⊗1 + 1⊗H.  Both
kinds are found as SVD nullspaces of stacked adjoint superoperators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matcore import (
    ConditioningError,
    ClosureTruncatedError,
    DimensionError,
    GAP_RTOL,
    TAU_RANK,
    ValidationError,
    adjoint_superoperator,
    as_operator,
    commutator,
    devectorize,
    frobenius_norm,
    hermitize,
    iota,
    kron,
    min_eigenvalue_gap,
    require_hermitian,
    require_unitary,
    row_vectorize,
)


@dataclass
class OperatorBasis:
    """Hilbert-Schmidt orthonormal basis of antihermitian matrices."""

    dimension: int
    elements: list[np.ndarray]
    closed: bool = True
    tol: float = TAU_RANK

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


@dataclass
class Symmetry:
    """Hermitian operator commuting with every control.

    kind "linear" acts on the base space; kind "quadratic" acts on the doubled
    space and commutes with the H⊗1 + 1⊗H lifts instead.  ``sigma_min`` is the
    smallest gap between distinct eigenvalues (clustered at a tolerance
    relative to the operator norm) and is computed lazily unless a hint is
    supplied by the caller.
    """

    kind: str
    matrix: np.ndarray
    note: str = ""
    sigma_min_hint: float | None = None
    _sigma_min: float | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("linear", "quadratic"):
            raise ValidationError(f"unknown symmetry kind {self.kind!r}")
        self.matrix = require_hermitian(self.matrix)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def base_dimension(self) -> int:
        """Dimension of the base space (sqrt of matrix size for quadratic)."""
        if self.kind == "linear":
            return self.dimension
        d = int(round(np.sqrt(self.dimension)))
        if d * d != self.dimension:
            raise DimensionError("quadratic symmetry dimension is not a square")
        return d

    @property
    def frobenius(self) -> float:
        return frobenius_norm(self.matrix)

    @property
    def sigma_min(self) -> float:
        if self.sigma_min_hint is not None:
            return self.sigma_min_hint
        if self._sigma_min is None:
            w = np.linalg.eigvalsh(self.matrix)
            cluster_tol = GAP_RTOL * float(np.max(np.abs(w)))
            self._sigma_min = min_eigenvalue_gap(w, cluster_tol)
        return self._sigma_min

    def scaled(self, factor: float) -> "Symmetry":
        return Symmetry(self.kind, factor * self.matrix, note=self.note)


def _validated_generators(generators) -> list[np.ndarray]:
    gens = [require_hermitian(G) for G in generators]
    if not gens:
        raise DimensionError("at least one generator is required")
    d = gens[0].shape[0]
    for G in gens:
        if G.shape[0] != d:
            raise DimensionError("generators must share one dimension")
    return gens


def lie_closure(generators, max_dim: int | None = None,
                tol: float = TAU_RANK) -> OperatorBasis:
    """Orthonormal basis of the real Lie algebra generated by {iH}.

    Breadth-first over (new element) x (all earlier elements) commutator
    pairs, Gram-Schmidt against the current basis (twice, for numerical
    orthogonality), accepting residual directions with norm above ``tol``.
    Deterministic given the generator order.  Raises ClosureTruncatedError,
    carrying the partial basis, if ``max_dim`` is hit while new directions
    keep appearing.
    """
    gens = _validated_generators(generators)
    d = gens[0].shape[0]
    limit = d * d if max_dim is None else min(int(max_dim), d * d)
    if limit < 1:
        raise DimensionError("max_dim must be at least 1")

    basis: list[np.ndarray] = []

    def try_accept(C: np.ndarray) -> None:
        n0 = np.linalg.norm(C)
        if n0 <= tol:
            return
        C = C / n0
        for _ in range(2):
            for b in basis:
                C = C - np.trace(b.conj().T @ C) * b
        r = np.linalg.norm(C)
        if r <= tol:
            return
        if len(basis) >= limit:
            raise ClosureTruncatedError(
                f"Lie closure exceeded max_dim={limit} before closing",
                partial_basis=OperatorBasis(d, list(basis), closed=False, tol=tol),
            )
        C = C / r
        basis.append(0.5 * (C - C.conj().T))  # keep exactly antihermitian

    for G in gens:
        try_accept(1j * G)

    done = 0  # elements [0, done) have been paired with each other already
    while done < len(basis):
        hi = len(basis)
        for i in range(done, hi):
            for j in range(i):
                try_accept(commutator(basis[i], basis[j]))
        done = hi

    return OperatorBasis(d, basis, closed=True, tol=tol)


def project_onto_span(X, basis: OperatorBasis) -> tuple[np.ndarray, float]:
    """Hilbert-Schmidt projection of iX onto the basis span.

    Returns (coefficients, residual norm); membership of H in the algebra
    means the residual is below tol * max(1, ||X||_F).
    """
    A = require_hermitian(X)
    if A.shape[0] != basis.dimension:
        raise DimensionError("dimension mismatch with basis")
    V = 1j * A
    coeffs = np.array([np.real(np.trace(b.conj().T @ V)) for b in basis.elements])
    R = V.copy()
    for c, b in zip(coeffs, basis.elements):
        R = R - c * b
    return coeffs, float(np.linalg.norm(R))


def _nullspace(K: np.ndarray, tol: float) -> list[np.ndarray]:
    """Right nullspace vectors of K at a relative singular-value threshold."""
    if K.size == 0:
        return []
    _, s, Vh = np.linalg.svd(K, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return [Vh[i].conj() for i in range(rank, Vh.shape[0])]


def _hermitian_basis_from_nullspace(vectors, dim: int, tol: float) -> list[np.ndarray]:
    """Split nullspace matrices into Hermitian parts and orthonormalize.

    A matrix commutes with Hermitian H iff its Hermitian and antihermitian
    parts both do, so the split stays inside the nullspace; the real span is
    orthonormalized through an SVD over real-embedded coordinates.
    """
    herms: list[np.ndarray] = []
    for v in vectors:
        M = devectorize(v)
        herms.append(hermitize(M))
        herms.append((M - M.conj().T) / 2j)
    if not herms:
        return []
    rows = np.array([
        np.concatenate([row_vectorize(H).real, row_vectorize(H).imag])
        for H in herms
    ])
    _, s, Vh = np.linalg.svd(rows, full_matrices=False)
    smax = s[0] if s.size else 0.0
    out = []
    for i in range(int(np.sum(s > tol * smax)) if smax > 0 else 0):
        r = Vh[i]
        M = devectorize(r[: dim * dim] + 1j * r[dim * dim:])
        out.append(hermitize(M))
    return out


def _verify_commutation(mats, ops, tol: float, lift) -> None:
    for M in mats:
        for op in ops:
            L = lift(op)
            defect = frobenius_norm(commutator(L, M))
            scale = max(1.0, frobenius_norm(M) * frobenius_norm(L))
            if defect > 100 * tol * scale:
                raise ConditioningError(
                    "nullspace element fails the commutation re-check",
                    {"defect": defect, "scale": scale},
                )


def commutant_basis(ops, tol: float = TAU_RANK) -> list[Symmetry]:
    """Orthonormal Hermitian basis of {S : [S, H_j] = 0 for all j}.

    Solved as the SVD nullspace of the stacked adjoint superoperators, then
    hermitized, re-orthonormalized, and re-verified.  Always contains the
    identity direction.
    """
    mats = _validated_generators(ops)
    d = mats[0].shape[0]
    K = np.vstack([adjoint_superoperator(op) for op in mats])
    basis = _hermitian_basis_from_nullspace(_nullspace(K, tol), d, tol)
    _verify_commutation(basis, mats, tol, lift=lambda op: op)
    return [Symmetry("linear", M, note="commutant") for M in basis]


def quadratic_symmetry_basis(ops, tol: float = TAU_RANK) -> list[Symmetry]:
    """Orthonormal Hermitian basis of {S on H⊗H : [S, H_j⊗1 + 1⊗H_j] = 0}."""
    mats = _validated_generators(ops)
    D = mats[0].shape[0] ** 2
    K = np.vstack([adjoint_superoperator(iota(op)) for op in mats])
    basis = _hermitian_basis_from_nullspace(_nullspace(K, tol), D, tol)
    _verify_commutation(basis, mats, tol, lift=iota)
    return [Symmetry("quadratic", M, note="quadratic commutant") for M in basis]


def symmetry_breaking_norm(S: Symmetry, target) -> float:
    """||[U, S]||_F for linear S, ||[U⊗U, S]||_F for quadratic S."""
    U = require_unitary(target)
    if S.kind == "linear":
        if U.shape[0] != S.dimension:
            raise DimensionError("target dimension does not match symmetry")
        return frobenius_norm(commutator(U, S.matrix))
    if U.shape[0] != S.base_dimension:
        raise DimensionError("target dimension does not match quadratic symmetry")
    return frobenius_norm(commutator(kron(U, U), S.matrix))


def span_residual(X, symmetries) -> float:
    """Distance from X to the real span of the given symmetry matrices."""
    A = require_hermitian(X)
    mats = [s.matrix if isinstance(s, Symmetry) else as_operator(s)
            for s in symmetries]
    if not mats:
        return frobenius_norm(A)
    cols = np.array([
        np.concatenate([row_vectorize(M).real, row_vectorize(M).imag])
        for M in mats
    ]).T
    rhs = np.concatenate([row_vectorize(A).real, row_vectorize(A).imag])
    coeffs, *_ = np.linalg.lstsq(cols, rhs, rcond=None)
    return float(np.linalg.norm(rhs - cols @ coeffs))


def center_dimension(basis: OperatorBasis, tol: float = TAU_RANK) -> int:
    """Dimension of the center of the algebra spanned by the basis."""
    n = basis.size
    if n == 0:
        return 0
    cols = []
    for k in range(n):
        col = []
        for j in range(n):
            c = row_vectorize(commutator(basis.elements[k], basis.elements[j]))
            col.append(np.concatenate([c.real, c.imag]))
        cols.append(np.concatenate(col))
    M = np.array(cols).T
    s = np.linalg.svd(M, compute_uv=False)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return n - rank
