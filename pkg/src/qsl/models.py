"""Reference physical systems with their analytic quantities.

Four builders: a coupled qubit pair targeting CNOT, a particle-hopping chain
targeting the endpoint swap, a Rydberg atom array simulating an Ising chain,
and random SYK Hamiltonians from Jordan-Wigner Majorana operators.  Each
bundle carries the control system, the target, the recommended symmetry, the
symmetry-restoring perturbation, and closed-form reference numbers so the
generic pipeline can be cross-checked end to end.

Conventions: qubits are tensor factors left to right, |0> is the Z eigenvalue
+1 state, chain sites 1..N map to the standard basis vectors of C^N.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bounds import DEFAULT_FILTER_CUT_REL
from .lie import Symmetry
from .matcore import (
    DimensionCapError,
    PAULI,
    ValidationError,
    matrix_exponential,
    permutation_operator,
    require_hermitian,
)
from .perturb import Perturbation


@dataclass
class ControlSystem:
    """Drift plus controls: H(t) = H_d + sum_j f_j(t) H_j."""

    drift: np.ndarray
    controls: list[np.ndarray]
    label: str = ""

    def __post_init__(self):
        self.drift = require_hermitian(self.drift)
        self.controls = [require_hermitian(H) for H in self.controls]
        d = self.drift.shape[0]
        if any(H.shape[0] != d for H in self.controls):
            raise ValidationError("controls must match the drift dimension")

    @property
    def dimension(self) -> int:
        return self.drift.shape[0]


@dataclass
class ModelBundle:
    """A control system, its target, and the analytic reference quantities."""

    system: ControlSystem
    symmetry: Symmetry
    perturbation: Perturbation | None = None
    target_unitary: np.ndarray | None = None
    target_hamiltonian: np.ndarray | None = None
    references: dict | None = None
    spectral_estimates: tuple[float, float] | None = None


@dataclass
class PulseSchedule:
    """Piecewise-constant control amplitudes: row j is f_j over the segments."""

    dt: float
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.atleast_2d(np.asarray(self.amplitudes, dtype=float))
        if self.dt <= 0:
            raise ValidationError("segment duration must be positive")
        if not np.all(np.isfinite(self.amplitudes)):
            raise ValidationError("amplitudes must be finite")

    @property
    def segments(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def total_time(self) -> float:
        return self.dt * self.segments


def local_operator(op, site: int, n_qubits: int) -> np.ndarray:
    """op acting on one qubit, identity elsewhere."""
    out = np.eye(1, dtype=complex)
    for k in range(n_qubits):
        out = np.kron(out, op if k == site else PAULI["I"])
    return out


def site_sum(op, n_qubits: int) -> np.ndarray:
    return sum(local_operator(op, k, n_qubits) for k in range(n_qubits))


def global_controls(n_qubits: int) -> list[np.ndarray]:
    """Collective controls [sum X_i, sum Z_i]."""
    return [site_sum(PAULI["X"], n_qubits), site_sum(PAULI["Z"], n_qubits)]


def coupled_qubit_model(g: float) -> ModelBundle:
    """Two qubits with ZZ coupling and full local control, targeting CNOT.

    The quadratic symmetry 1 - M(1,3) - M(2,4) + M(1,3)(2,4), built from
    tensor-factor transpositions on the doubled two-qubit space, commutes with
    every local control lift but not with CNOT⊗CNOT; -g Z1 Z2 restores it, so
    the speed limit is sqrt(2)/(4g).  Full excitation transfer needs pi/(4g),
    a factor pi/sqrt(2) above the bound.
    """
    if g <= 0:
        raise ValidationError("coupling must be positive")
    Z, X = PAULI["Z"], PAULI["X"]
    drift = g * np.kron(Z, Z)
    controls = [local_operator(X, 0, 2), local_operator(Z, 0, 2),
                local_operator(X, 1, 2), local_operator(Z, 1, 2)]
    cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    m13 = permutation_operator([2, 1, 0, 3], [2] * 4)
    m24 = permutation_operator([0, 3, 2, 1], [2] * 4)
    m13_24 = permutation_operator([2, 3, 0, 1], [2] * 4)
    S = np.eye(16, dtype=complex) - m13 - m24 + m13_24
    sym = Symmetry("quadratic", S, note="doubled-space transposition combination")
    pert = Perturbation.from_matrix(sym, -drift, drift=drift)
    refs = {
        "bound_time": math.sqrt(2) / (4 * g),
        "literature_time": math.pi / (4 * g),
        "breaking_norm": 4 * math.sqrt(2),
        "symmetry_frobenius": 4.0,
    }
    system = ControlSystem(drift, controls, label="coupled-qubit-pair")
    return ModelBundle(system, sym, pert, target_unitary=cnot, references=refs)


def hopping_chain_modes(N: int, J: float):
    """Spectrum of the open hopping chain: energies and eigenvectors.

    E_k = 2J cos(pi k/(N+1)); mode k has components
    sqrt(2/(N+1)) sin(pi k m/(N+1)) at site m.
    """
    k = np.arange(1, N + 1)
    energies = 2 * J * np.cos(np.pi * k / (N + 1))
    m = np.arange(1, N + 1)
    states = np.sqrt(2.0 / (N + 1)) * np.sin(np.pi * np.outer(m, k) / (N + 1))
    return energies, states.astype(complex)


def hopping_chain_model(N: int, J: float = 1.0) -> ModelBundle:
    """Single particle hopping on an open chain, site-1 energy control,
    endpoint-swap target.

    The symmetry is the rank-one projection onto |alpha>, a combination of
    the two lowest modes chosen so that <1|alpha> = 0 (invisible to the
    control); shifting the second mode's energy onto the first restores it,
    with ||ΔH||_inf = E_1 - E_2 < 3 pi² J / N².
    """
    if N < 3:
        raise ValidationError("chain needs at least 3 sites")
    if J <= 0:
        raise ValidationError("coupling must be positive")
    drift = J * (np.diag(np.ones(N - 1), 1) + np.diag(np.ones(N - 1), -1))
    drift = drift.astype(complex)
    control = np.zeros((N, N), dtype=complex)
    control[0, 0] = 1.0
    target = np.eye(N, dtype=complex)
    target[0, 0] = target[-1, -1] = 0.0
    target[0, -1] = target[-1, 0] = 1.0

    energies, states = hopping_chain_modes(N, J)
    a1, a2 = states[:, 0], states[:, 1]
    ratio = math.sin(2 * math.pi / (N + 1)) / math.sin(math.pi / (N + 1))
    alpha = a2 - ratio * a1
    alpha = alpha / np.linalg.norm(alpha)
    S = np.outer(alpha, alpha.conj())
    sym = Symmetry("linear", S, note="projection onto the control-blind state",
                   sigma_min_hint=1.0)
    dH = (energies[0] - energies[1]) * np.outer(a2, a2.conj())
    pert = Perturbation.from_matrix(sym, dH, drift=drift)
    # Two numerators for ||[U, S]||_F: the overlap form 2|<N|alpha>| treats
    # {|1>, |alpha>, |N>} as orthogonal and feeds the closed form; the exact
    # value is smaller by sqrt(1 - |<N|alpha>|^2 / 2).
    overlap = abs(alpha[-1])
    refs = {
        "breaking_norm": 2 * overlap,
        "breaking_norm_exact": 2 * overlap * math.sqrt(1 - overlap**2 / 2),
        "delta_h_op_norm": float(energies[0] - energies[1]),
        "gap_over_bound": 3 * math.pi**2 * J / N**2,
        "closed_form": hopping_chain_closed_form(N, J),
        "symmetry_frobenius": 1.0,
    }
    system = ControlSystem(drift, [control], label=f"hopping-chain-{N}")
    return ModelBundle(system, sym, pert, target_unitary=target, references=refs)


def hopping_chain_closed_form(N: int, J: float = 1.0) -> float:
    """Closed-form endpoint-swap speed limit for the hopping chain.

    T >= (2 N²) / (3 pi² J sqrt(3 + 2 cos(2 pi/(N+1)))) * sqrt(2/(N+1))
         * |sin(2 pi N/(N+1))|,
    using the 3 pi² J/N² over-bound on the restored gap and the overlap form
    2|<N|alpha>| of the symmetry-breaking numerator.  Grows like sqrt(N)/J
    for long chains.
    """
    if N < 3:
        raise ValidationError("chain needs at least 3 sites")
    x = 2 * math.pi / (N + 1)
    return (2 * N**2) / (3 * math.pi**2 * J * math.sqrt(3 + 2 * math.cos(x))) \
        * math.sqrt(2.0 / (N + 1)) * abs(math.sin(math.pi * N * 2 / (N + 1)))


def _occupation_diagonal(N: int) -> np.ndarray:
    """bits[i, s] = occupation (0/1) of qubit i in basis state s."""
    idx = np.arange(2**N)
    return np.array([(idx >> (N - 1 - i)) & 1 for i in range(N)])


def rydberg_chain_model(N: int, C: float = 1.0, a: float = 1.0,
                        J: float = 1.0, g: float = 0.5,
                        h: float = 0.5) -> ModelBundle:
    """Linear Rydberg array with global controls, simulating an Ising chain.

    Drift: van der Waals interactions C/(a|i-j|)^6 between excited states.
    Controls: collective sum X, sum Z (permutation invariant, so the swap of
    the first two atoms is a symmetry of everything but the drift).  Averaging
    the couplings of atoms 1 and 2 to each other atom restores the swap; the
    resulting ΔH is diagonal with ||ΔH||_inf = C/(2 a^6) (1 - 1/(N-1)^6).
    """
    if N < 3:
        raise ValidationError("array needs at least 3 atoms")
    if N > 14:
        raise DimensionCapError("dense construction is limited to 14 atoms")
    bits = _occupation_diagonal(N)
    pair_diag = np.zeros(2**N)
    for i in range(N):
        for j in range(i + 1, N):
            pair_diag += (C / (a * (j - i))**6) * bits[i] * bits[j]
    drift = np.diag(pair_diag).astype(complex)
    controls = global_controls(N)

    zz = np.zeros(2**N)
    z = 1.0 - 2.0 * bits
    for i in range(N - 1):
        zz += z[i] * z[i + 1]
    H_s = J * np.diag(zz).astype(complex) + g * site_sum(PAULI["X"], N) \
        + h * np.diag(z.sum(axis=0)).astype(complex)

    S = permutation_operator([1, 0] + list(range(2, N)), [2] * N)
    sym = Symmetry("linear", S, note="swap of the first two atoms",
                   sigma_min_hint=2.0)

    # delta_j = half the difference of the couplings of atoms 1, 2 to atom j;
    # summing (n_1 - n_2) n_j delta_j symmetrizes the drift.
    dh_diag = np.zeros(2**N)
    for j in range(2, N):
        delta = 0.5 * C / a**6 * (1.0 / (j - 1)**6 - 1.0 / j**6)
        dh_diag += delta * (bits[0] - bits[1]) * bits[j]
    dH = np.diag(dh_diag).astype(complex)
    pert = Perturbation.from_matrix(sym, dH, drift=drift)

    hs_norm_bound = J * (N - 1) + (abs(g) + abs(h)) * N
    sigma_max = (2 * hs_norm_bound)**2
    sigma_min = (DEFAULT_FILTER_CUT_REL**2) * sigma_max
    refs = {
        "delta_h_closed_form": C / (2 * a**6) * (1 - 1.0 / (N - 1)**6),
        "trend_limit": math.sqrt(2) * a**6 / C,
        "hs_norm_bound": hs_norm_bound,
    }
    system = ControlSystem(drift, controls, label=f"rydberg-chain-{N}")
    return ModelBundle(system, sym, pert, target_hamiltonian=H_s,
                       references=refs, spectral_estimates=(sigma_min, sigma_max))


def majorana_operators(n_majorana: int) -> list[np.ndarray]:
    """Majorana operators on n/2 qubits, normalized so {chi_i, chi_j} = delta_ij.

    chi_{2i-1} = X_1 ... X_{i-1} Z_i / sqrt(2),
    chi_{2i}   = X_1 ... X_{i-1} Y_i / sqrt(2).
    """
    if n_majorana % 2 != 0 or n_majorana < 2:
        raise ValidationError("need a positive even number of Majorana modes")
    q = n_majorana // 2
    X, Y, Z = PAULI["X"], PAULI["Y"], PAULI["Z"]
    ops = []
    prefix = np.eye(1, dtype=complex)
    for i in range(q):
        tail = np.eye(2**(q - i - 1), dtype=complex)
        for last in (Z, Y):
            ops.append(np.kron(np.kron(prefix, last), tail) / math.sqrt(2))
        prefix = np.kron(prefix, X)
    return ops


def syk_model(n_majorana: int, seed: int = 0, mu: float = 0.0) -> np.ndarray:
    """Random four-Majorana Hamiltonian, optionally with a charge-like term.

    H = sum_{i<j<k<l} J_ijkl chi_i chi_j chi_k chi_l + (mu/4) Q² with
    Q = sum_{ij} C_ij chi_i chi_j; the independent entries of the
    antisymmetric tensors J and C are standard normal.  Deterministic per
    seed; J is always drawn before C so the quartic couplings do not depend
    on mu.
    """
    if n_majorana % 2 != 0 or n_majorana < 4:
        raise ValidationError("need an even number of Majorana modes, at least 4")
    chi = majorana_operators(n_majorana)
    d = chi[0].shape[0]
    rng = np.random.default_rng(seed)
    quads = list(itertools.combinations(range(n_majorana), 4))
    couplings = rng.standard_normal(len(quads))
    pairs = list(itertools.combinations(range(n_majorana), 2))
    charges = rng.standard_normal(len(pairs))

    H = np.zeros((d, d), dtype=complex)
    for Jv, (i, j, k, l) in zip(couplings, quads):
        H += Jv * (chi[i] @ chi[j] @ chi[k] @ chi[l])
    if mu != 0.0:
        Q = np.zeros((d, d), dtype=complex)
        for Cv, (i, j) in zip(charges, pairs):
            Q += 2.0 * Cv * (chi[i] @ chi[j])
        H += (mu / 4.0) * (Q @ Q)
    return 0.5 * (H + H.conj().T)


def propagate_piecewise(system: ControlSystem, pulses: PulseSchedule) -> np.ndarray:
    """Time-ordered product of segment exponentials, later segments on the left."""
    if pulses.amplitudes.shape[0] != len(system.controls):
        raise ValidationError("amplitude row count must equal the control count")
    if pulses.segments == 0:
        raise ValidationError("schedule must contain at least one segment")
    U = np.eye(system.dimension, dtype=complex)
    for k in range(pulses.segments):
        H = system.drift.copy()
        for f, Hc in zip(pulses.amplitudes[:, k], system.controls):
            H = H + f * Hc
        U = matrix_exponential(H, pulses.dt) @ U
    return U
