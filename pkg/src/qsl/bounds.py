"""Speed-limit evaluation.

Two families of lower bounds on control time are computed here.  For a target
unitary U and a symmetry S broken by U but preserved by the controls, the time
obeys T >= ||[U, S]||_F / (2 ||S||_F ||ΔH||_inf) (linear S; the quadratic
version carries U⊗U and a 4 in the denominator).  For a target Hamiltonian
H_s the numerator becomes the part of S outside the commutant of H_s,
||(1 - P_ker ad_{H_s}) S||_F, and the denominator picks up a sqrt(2).

The kernel-complement numerator has three implementations with a strict
ordering (commutator <= exact, chebyshev <= exact): an exact eigenbasis
projection, a cheap commutator bound needing only ||H_s||_inf, and a
matrix-free Chebyshev spectral filter for dimensions where diagonalization or
superoperator materialization is off the table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lie import Symmetry, symmetry_breaking_norm
from .matcore import (
    DEGENERACY_RTOL,
    DimensionError,
    GAP_RTOL,
    QslError,
    TAU_RANK,
    ValidationError,
    check_entry_cap,
    commutator,
    frobenius_norm,
    kron,
    operator_norm,
    require_hermitian,
    require_unitary,
)
from .perturb import Perturbation, perturbation_norm_bound, restore_symmetry, spectral_gap_min

# Filter policy used when the caller supplies no spectral estimates: treat
# eigenvalue gaps below this fraction of the (estimated) spectral span as
# effectively degenerate.  Components of S at smaller gaps are then not
# counted by the Chebyshev numerator, which keeps it a valid lower bound but
# costs tightness; callers with sharper knowledge should pass estimates.
DEFAULT_FILTER_CUT_REL = 2.5e-4
DEFAULT_FILTER_EPS = 1e-2
DEFAULT_MAX_DEGREE = 20000


@dataclass
class BoundReport:
    """A speed-limit value together with everything used to compute it."""

    bound_time: float
    theorem: str
    projection_method: str
    intermediates: dict[str, float]
    symmetry: Symmetry | None = None
    perturbation: Perturbation | None = None
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class ChebyshevFilter:
    """Degree-m polynomial with p(0) = 1, uniformly small on [σ_min, σ_max].

    Shifted Chebyshev construction: p(x) = T_m(ℓ(x)) / T_m(x0) with the affine
    map ℓ sending [σ_min, σ_max] onto [-1, 1] and ℓ(0) = x0 > 1.  On the
    suppression interval |p| <= ε = sech(m · arccosh(x0)), and no polynomial
    of the same degree with p(0) = 1 does better.
    """

    degree: int
    sigma_min: float
    sigma_max: float

    def __post_init__(self):
        if self.degree < 1:
            raise ValidationError("filter degree must be at least 1")
        if not (0 < self.sigma_min <= self.sigma_max):
            raise ValidationError(
                "need 0 < sigma_min <= sigma_max, got "
                f"[{self.sigma_min}, {self.sigma_max}]"
            )

    @property
    def _interval(self) -> tuple[float, float]:
        # A zero-width interval makes the affine map singular; shrinking the
        # lower edge only widens the suppression band, so validity is kept.
        lo = min(self.sigma_min, self.sigma_max * (1 - 1e-6))
        return lo, self.sigma_max

    @property
    def _x0(self) -> float:
        lo, hi = self._interval
        return (hi + lo) / (hi - lo)

    @property
    def epsilon(self) -> float:
        z = self.degree * math.acosh(self._x0)
        if z > 745.0:  # sech underflows
            return 0.0
        e = math.exp(-z)
        return 2 * e / (1 + e * e)

    def evaluate(self, x):
        """p(x), stable for arguments far outside the suppression interval."""
        lo, hi = self._interval
        m = self.degree
        y = (hi + lo - 2 * np.asarray(x, dtype=float)) / (hi - lo)
        th0 = math.acosh(self._x0)
        log_tm_x0 = m * th0 + math.log1p(math.exp(-2 * m * th0)) - math.log(2)
        out = np.empty_like(y)
        inside = np.abs(y) <= 1
        out[inside] = np.cos(m * np.arccos(y[inside])) * math.exp(-log_tm_x0)
        yo = y[~inside]
        th = np.arccosh(np.abs(yo))
        mag = np.exp(m * th + np.log1p(np.exp(-2 * m * th)) - math.log(2) - log_tm_x0)
        out[~inside] = np.where(yo > 0, mag, mag * (-1) ** m)
        return out if np.ndim(x) else float(out)

    def apply(self, apply_a, Y: np.ndarray) -> np.ndarray:
        """p(A) Y through the three-term recurrence, A given as a callable.

        Uses the normalized iterates Z_k = T_k(ℓ(A)) Y / T_k(x0), whose
        components all stay bounded by ||Y||, so the recurrence is stable for
        any degree; the Chebyshev values T_k(x0) themselves would overflow.
        """
        lo, hi = self._interval
        x0 = self._x0
        shift = (hi + lo) / (hi - lo)
        scale = 2.0 / (hi - lo)

        def mapped(Z):
            return shift * Z - scale * apply_a(Z)

        z_prev = Y
        z_curr = mapped(Y) / x0
        r_prev = 1.0 / x0
        for _ in range(self.degree - 1):
            r_curr = 1.0 / (2 * x0 - r_prev)
            z_next = 2 * r_curr * mapped(z_curr) - r_curr * r_prev * z_prev
            z_prev, z_curr = z_curr, z_next
            r_prev = r_curr
        return z_curr


def chebyshev_degree_for(eps_target: float, sigma_min: float, sigma_max: float,
                         max_degree: int = DEFAULT_MAX_DEGREE) -> int:
    """Smallest degree whose filter error is below eps_target, capped."""
    if not (0 < eps_target < 1):
        raise ValidationError("eps_target must lie in (0, 1)")
    probe = ChebyshevFilter(1, sigma_min, sigma_max)
    theta = math.acosh(probe._x0)
    m = int(math.ceil(math.acosh(1.0 / eps_target) / theta))
    return max(1, min(m, max_degree))


def uniform_speed_limit(perturbation) -> float:
    """T* >= 1/(4 ||ΔH||_inf): no symmetry information, just the drift change."""
    dh = perturbation.op_norm if isinstance(perturbation, Perturbation) \
        else float(perturbation)
    if dh <= 0:
        raise ValidationError("perturbation operator norm must be positive")
    return 1.0 / (4.0 * dh)


def _delta_h_inf(S: Symmetry, perturbation, drift):
    """Resolve ||ΔH||_inf from an explicit perturbation or from the drift.

    Returns (value, perturbation-or-None, source, extras) where extras are
    intermediates worth reporting.
    """
    extras: dict[str, float] = {}
    if perturbation is not None:
        dh = perturbation.op_norm
        if dh <= 0:
            raise ValidationError("perturbation operator norm must be positive")
        return dh, perturbation, "supplied", extras
    if drift is None:
        raise ValidationError("either a perturbation or a drift is required")
    if S.kind == "linear":
        dh = perturbation_norm_bound(S, drift)
        if dh <= 0:
            raise ValidationError("symmetry already commutes with the drift; "
                                  "no time bound follows")
        extras["sigma_min"] = S.sigma_min
        return dh, None, "analytic-bound", extras
    pert = restore_symmetry(S, drift)
    if pert.op_norm <= 0:
        raise ValidationError("symmetry already commutes with the drift; "
                              "no time bound follows")
    return pert.op_norm, pert, "restored", extras


def unitary_speed_limit(U, S: Symmetry, perturbation: Perturbation | None = None,
                        *, drift=None) -> BoundReport:
    """Speed limit for implementing the unitary U.

    Quadratic S:  T >= ||[U⊗U, S]||_F / (4 ||S||_F ||ΔH||_inf).
    Linear S:     T >= ||[U, S]||_F / (2 ||S||_F ||ΔH||_inf).

    With a linear S and a drift supplied, the fully analytic variant replacing
    ||ΔH||_inf by ||[S, H_d]||_F / σ_min is also evaluated and reported; it is
    the bound when no explicit perturbation is given.
    """
    U = require_unitary(U)
    sfrob = S.frobenius
    if sfrob <= 0:
        raise ValidationError("symmetry matrix must be nonzero")
    breaking = symmetry_breaking_norm(S, U)
    dh, pert, source, extras = _delta_h_inf(S, perturbation, drift)
    if S.kind == "quadratic":
        theorem, denom = "T1a", 4.0 * sfrob * dh
    else:
        theorem, denom = "T1b", 2.0 * sfrob * dh
    inter = {"symmetry_frobenius": sfrob, "breaking_norm": breaking,
             "delta_h_op_norm": dh, **extras}
    if S.kind == "linear" and drift is not None:
        dh_analytic = perturbation_norm_bound(S, drift)
        if dh_analytic > 0:
            inter["analytic_bound"] = breaking / (2.0 * sfrob * dh_analytic)
            inter["sigma_min"] = S.sigma_min
    return BoundReport(breaking / denom, theorem, "not_applicable", inter,
                       symmetry=S, perturbation=pert,
                       warnings=[] if source != "analytic-bound" else
                       ["perturbation norm taken from the analytic "
                        "||[S, H_d]||_F / sigma_min bound"])


def _eigen_gaps_and_frame(H: np.ndarray, S: Symmetry):
    """Eigenbasis data for the exact projection: (gap matrix, S in frame)."""
    w, V = np.linalg.eigh(H)
    if S.kind == "linear":
        gaps = np.abs(w[:, None] - w[None, :])
        frame = V.conj().T @ S.matrix @ V
    else:
        d = H.shape[0]
        check_entry_cap(d**4)
        sums = np.add.outer(w, w).reshape(-1)
        gaps = np.abs(sums[:, None] - sums[None, :])
        W = kron(V, V)
        frame = W.conj().T @ S.matrix @ W
    return w, gaps, frame


def kernel_complement_norm_exact(H_s, S: Symmetry,
                                 tol_degeneracy: float | None = None) -> float:
    """||(1 - P_ker ad_{H_s}) S||_F by explicit diagonalization.

    Matrix elements of S between eigenvectors whose eigenvalue difference is
    within the degeneracy tolerance belong to the kernel and are dropped; the
    Frobenius norm of the rest is returned.  Quadratic S pairs with the
    doubled-space lift, whose spectrum is the pairwise eigenvalue sums.
    """
    H = require_hermitian(H_s)
    _check_symmetry_dimension(H, S)
    w = np.linalg.eigvalsh(H)
    hnorm = float(np.max(np.abs(w))) if w.size else 0.0
    if hnorm == 0.0:
        return 0.0
    tol = DEGENERACY_RTOL * hnorm if tol_degeneracy is None else tol_degeneracy
    _, gaps, frame = _eigen_gaps_and_frame(H, S)
    return float(np.linalg.norm(frame[gaps > tol]))


def _check_symmetry_dimension(H: np.ndarray, S: Symmetry) -> None:
    want = S.dimension if S.kind == "linear" else S.base_dimension
    if H.shape[0] != want:
        raise DimensionError("Hamiltonian dimension does not match symmetry")


def _iota_commutator(H: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """[H⊗1 + 1⊗H, Y] using d-dimensional contractions only."""
    d = H.shape[0]
    Y4 = Y.reshape(d, d, d, d)
    out = (np.einsum("ae,ebcd->abcd", H, Y4)
           + np.einsum("bf,afcd->abcd", H, Y4)
           - np.einsum("abed,ec->abcd", Y4, H)
           - np.einsum("abcf,fd->abcd", Y4, H))
    return out.reshape(d * d, d * d)


def kernel_complement_norm_commutator(H_s, S: Symmetry) -> float:
    """Commutator lower bound on the kernel-complement norm.

    ||[H_s, S]||_F / (2 ||H_s||_inf) for linear S; the quadratic version uses
    the doubled-space commutator and ||H⊗1 + 1⊗H||_inf <= 2 ||H_s||_inf.
    Never exceeds the exact projection, needs no diagonalization.
    """
    H = require_hermitian(H_s)
    _check_symmetry_dimension(H, S)
    hnorm = operator_norm(H)
    if hnorm <= 0:
        raise ValidationError("Hamiltonian must be nonzero")
    if S.kind == "linear":
        return frobenius_norm(commutator(H, S.matrix)) / (2.0 * hnorm)
    return frobenius_norm(_iota_commutator(H, S.matrix)) / (4.0 * hnorm)


def chebyshev_filter_bound(H_s, S: Symmetry, degree: int,
                           sigma_min_est: float, sigma_max_est: float
                           ) -> tuple[float, float]:
    """Matrix-free lower bound on the kernel-complement norm.

    Applies the spectral filter p to A = (ad_{H_s})² acting on S, where each
    application of A is a double commutator (d x d products only; A is never
    materialized).  The estimates should bracket the nonzero spectrum of A.

    Returns (value, ε) with value = sqrt(max(0, ||S||_F² - ||p(A) S||_F²)).
    Because p(0) = 1 exactly, ||p(A) S||_F can only exceed the norm of the
    kernel component of S, so the value is a valid lower bound on
    ||(1 - P_ker) S||_F no matter how rough the estimates are; once the
    nonzero spectrum really lies in [σ_min_est, σ_max_est] it converges to
    the exact norm at rate ε².
    """
    H = require_hermitian(H_s)
    _check_symmetry_dimension(H, S)
    filt = ChebyshevFilter(degree, sigma_min_est, sigma_max_est)
    if S.kind == "linear":
        def apply_a(Y):
            return commutator(H, commutator(H, Y))
    else:
        def apply_a(Y):
            return _iota_commutator(H, _iota_commutator(H, Y))
    Z = filt.apply(apply_a, S.matrix)
    s2 = S.frobenius**2
    p2 = frobenius_norm(Z)**2
    return float(np.sqrt(max(0.0, s2 - p2))), filt.epsilon


def _default_filter_interval(H: np.ndarray, kind: str) -> tuple[float, float]:
    lift = 2.0 if kind == "linear" else 4.0
    span = lift * operator_norm(H)  # every eigenvalue gap of ad is below this
    sigma_max = span**2
    return (DEFAULT_FILTER_CUT_REL * span) ** 2, sigma_max


def hamiltonian_speed_limit(H_s, S: Symmetry,
                            perturbation: Perturbation | None = None, *,
                            method: str = "exact", drift=None,
                            degree: int | None = None,
                            sigma_min_est: float | None = None,
                            sigma_max_est: float | None = None,
                            tol_degeneracy: float | None = None) -> BoundReport:
    """Speed limit for simulating the Hamiltonian H_s.

    T >= numerator / (2√2 ||S||_F ||ΔH||_inf) for quadratic S, or
    numerator / (√2 ||S||_F ||ΔH||_inf) for linear S, with the numerator
    produced by the selected kernel-projection method (exact, commutator, or
    chebyshev).  When no perturbation is supplied the drift is used: linear
    symmetries fall back to the analytic ||[S, H_d]||_F / σ_min bound on
    ||ΔH||_inf, quadratic ones get an explicit minimal perturbation.
    """
    H = require_hermitian(H_s)
    if method not in ("exact", "commutator", "chebyshev"):
        raise ValidationError(f"unknown projection method {method!r}")
    sfrob = S.frobenius
    if sfrob <= 0:
        raise ValidationError("symmetry matrix must be nonzero")

    warnings: list[str] = []
    inter: dict[str, float] = {"symmetry_frobenius": sfrob}
    if method == "exact":
        num = kernel_complement_norm_exact(H, S, tol_degeneracy)
        w = np.linalg.eigvalsh(H)
        hnorm = float(np.max(np.abs(w))) if w.size else 0.0
        tol = DEGENERACY_RTOL * hnorm if tol_degeneracy is None else tol_degeneracy
        diffs = np.abs(w[:, None] - w[None, :])
        near = (diffs > tol) & (diffs <= 10 * tol)
        if np.any(near):
            warnings.append("spectral gaps within 10x of the degeneracy "
                            "tolerance; the exact projection is sensitive here")
    elif method == "commutator":
        num = kernel_complement_norm_commutator(H, S)
    else:
        if sigma_max_est is None or sigma_min_est is None:
            lo, hi = _default_filter_interval(H, S.kind)
            sigma_min_est = lo if sigma_min_est is None else sigma_min_est
            sigma_max_est = hi if sigma_max_est is None else sigma_max_est
        if degree is None:
            degree = chebyshev_degree_for(DEFAULT_FILTER_EPS,
                                          sigma_min_est, sigma_max_est)
        num, eps = chebyshev_filter_bound(H, S, degree, sigma_min_est,
                                          sigma_max_est)
        inter.update({"epsilon": eps, "degree": float(degree),
                      "sigma_min_est": sigma_min_est,
                      "sigma_max_est": sigma_max_est})

    dh, pert, source, extras = _delta_h_inf(S, perturbation, drift)
    inter.update(extras)
    inter.update({"kernel_complement_norm": num, "delta_h_op_norm": dh})
    if source == "analytic-bound":
        warnings.append("perturbation norm taken from the analytic "
                        "||[S, H_d]||_F / sigma_min bound")
    factor = 2.0 * math.sqrt(2.0) if S.kind == "quadratic" else math.sqrt(2.0)
    theorem = "T2a" if S.kind == "quadratic" else "T2b"
    return BoundReport(num / (factor * sfrob * dh), theorem, method, inter,
                       symmetry=S, perturbation=pert, warnings=warnings)


def single_control_bound(H_d, H_c, U) -> float:
    """Speed limit when a single control is available.

    The control Hamiltonian itself is then a symmetry of the reachable set:
    T >= ||[U, H_c]||_F σ_min(H_c) / (2 ||H_c||_F ||[H_c, H_d]||_F).
    """
    Hd = require_hermitian(H_d)
    Hc = require_hermitian(H_c)
    U = require_unitary(U)
    comm = frobenius_norm(commutator(Hc, Hd))
    scale = max(1.0, frobenius_norm(Hc) * frobenius_norm(Hd))
    if comm <= TAU_RANK * scale:
        raise ValidationError("control commutes with the drift; the bound "
                              "degenerates (division by zero)")
    sigma = spectral_gap_min(Hc)
    return frobenius_norm(commutator(U, Hc)) * sigma / (
        2.0 * frobenius_norm(Hc) * comm)


def optimize_symmetry(basis: list[Symmetry], objective, iterations: int = 200,
                      seed: int = 0) -> Symmetry:
    """Search real combinations of the basis (plus an identity shift) for the
    symmetry maximizing the objective.

    Rescaling a symmetry never changes the theorem bounds but adding identity
    does, so the search space is the unit Frobenius sphere in
    span(basis) ∪ {1}.  Every basis element is evaluated first (the result is
    never worse than the best individual element), then ``iterations`` random
    directions, then rounds of coordinate refinement around the best point.
    Deterministic given the seed; on ties the earliest candidate wins.
    Candidates on which the objective raises a QslError score -inf.
    """
    if not basis:
        raise ValidationError("symmetry basis must be nonempty")
    kind = basis[0].kind
    if any(b.kind != kind for b in basis):
        raise ValidationError("all basis elements must share one kind")
    dim = basis[0].dimension
    if any(b.dimension != dim for b in basis):
        raise DimensionError("all basis elements must share one dimension")
    mats = [b.matrix for b in basis]
    eye = np.eye(dim)
    n = len(mats)

    def assemble(coeffs) -> Symmetry | None:
        M = sum(c * B for c, B in zip(coeffs[:n], mats)) + coeffs[n] * eye
        nrm = np.linalg.norm(M)
        if nrm <= 1e-12:
            return None
        return Symmetry(kind, M / nrm, note="optimized")

    def score(sym: Symmetry | None) -> float:
        if sym is None:
            return -np.inf
        try:
            v = float(objective(sym))
        except QslError:
            return -np.inf
        return v if np.isfinite(v) else -np.inf

    best_coeffs = None
    best_value = -np.inf

    def consider(coeffs) -> None:
        nonlocal best_coeffs, best_value
        v = score(assemble(coeffs))
        if v > best_value:
            best_value = v
            best_coeffs = np.array(coeffs, dtype=float)

    for k in range(n):
        e = np.zeros(n + 1)
        e[k] = 1.0
        consider(e)

    rng = np.random.default_rng(seed)
    for _ in range(max(0, int(iterations))):
        consider(rng.standard_normal(n + 1))

    if best_coeffs is None:
        best_coeffs = np.zeros(n + 1)
        best_coeffs[0] = 1.0

    step = 0.5
    for _ in range(4):
        improved = True
        while improved:
            improved = False
            for k in range(n + 1):
                for delta in (step, -step):
                    trial = best_coeffs.copy()
                    trial[k] += delta
                    v = score(assemble(trial))
                    if v > best_value:
                        best_value, best_coeffs = v, trial
                        improved = True
        step *= 0.25

    result = assemble(best_coeffs)
    if result is None:  # only if every candidate was degenerate
        result = Symmetry(kind, mats[0] / np.linalg.norm(mats[0]),
                          note="optimized")
    return result


def kernel_projection_lower_bound(A, v) -> float:
    """Lower bound on ||(1 - P_ker A) v||² without computing the kernel.

    For Hermitian A: max{ <v, A v> / ||A||_inf, ||A v||² / ||A||_inf² }.
    The first branch vanishes identically for v = vec(S) with Hermitian S and
    A the adjoint map of a Hamiltonian (trace cyclicity), which is why the
    commutator-method numerator uses only the second; both are kept here for
    general vectors.
    """
    A = require_hermitian(A)
    v = np.asarray(v, dtype=complex).reshape(-1)
    anorm = operator_norm(A)
    if anorm <= 0:
        return 0.0
    Av = A @ v
    quad = float(np.real(np.vdot(v, Av))) / anorm
    grad = float(np.real(np.vdot(Av, Av))) / anorm**2
    return max(quad, grad)


def evolution_from_identity_peak(A, v, n_grid: int = 2000,
                                 horizon_factor: float = 200.0) -> float:
    """max_t ||(e^{-itA} - 1) v||² over a dense grid.

    The grid spans [0, horizon_factor / λ] with λ the smallest nonzero
    |eigenvalue| of A; over that horizon the time average already comes
    within a few percent of 2 ||(1 - P_ker A) v||², so the grid maximum does
    too.
    """
    A = require_hermitian(A)
    v = np.asarray(v, dtype=complex).reshape(-1)
    w, V = np.linalg.eigh(A)
    c = V.conj().T @ v
    wmax = float(np.max(np.abs(w))) if w.size else 0.0
    if wmax == 0.0:
        return 0.0
    nonzero = np.abs(w) > GAP_RTOL * wmax
    if not np.any(nonzero):
        return 0.0
    lam = float(np.min(np.abs(w[nonzero])))
    ts = np.linspace(0.0, horizon_factor / lam, n_grid)
    weights = np.abs(c)**2
    vals = 2.0 * (1.0 - np.cos(np.outer(ts, w))) @ weights
    return float(np.max(vals))
