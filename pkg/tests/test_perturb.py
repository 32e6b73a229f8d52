import numpy as np
import pytest

from qsl.lie import Symmetry
from qsl.matcore import (
    NoSpectralGapError,
    PAULI,
    ValidationError,
    commutator,
    frobenius_norm,
    iota,
    kron,
    operator_norm,
)
from qsl.models import coupled_qubit_model
from qsl.perturb import (
    Perturbation,
    perturbation_norm_bound,
    restore_symmetry,
    spectral_gap_min,
)
from conftest import random_hermitian

X, Z, I2 = PAULI["X"], PAULI["Z"], PAULI["I"]


class TestSpectralGap:
    def test_projector(self):
        assert spectral_gap_min(np.diag([1.0, 0, 0])) == pytest.approx(1.0)

    def test_spread_spectrum(self):
        assert spectral_gap_min(np.diag([1.0, 2.0, 4.0])) == pytest.approx(1.0)

    def test_pauli_z(self):
        assert spectral_gap_min(Z) == pytest.approx(2.0)

    def test_smallest_of_several_gaps(self):
        assert spectral_gap_min(np.diag([0.0, 0.3, 1.0])) == pytest.approx(0.3)

    def test_multiple_of_identity_has_no_gap(self):
        with pytest.raises(NoSpectralGapError):
            spectral_gap_min(3.0 * np.eye(4))

    def test_matches_symmetry_accessor(self, rng):
        M = random_hermitian(rng, 5)
        assert spectral_gap_min(M) == pytest.approx(Symmetry("linear", M).sigma_min)


class TestLinearRestore:
    def test_z_symmetry_cancels_x_drift(self):
        pert = restore_symmetry(Symmetry("linear", Z), X)
        assert np.allclose(pert.matrix, -X, atol=1e-12)
        assert pert.op_norm == pytest.approx(1.0)

    def test_diagonal_drift_needs_nothing(self):
        pert = restore_symmetry(Symmetry("linear", Z), np.diag([0.4, -0.1]))
        assert frobenius_norm(pert.matrix) < 1e-12

    def test_restored_drift_commutes(self, rng):
        for _ in range(10):
            S = Symmetry("linear", random_hermitian(rng, 6))
            H = random_hermitian(rng, 6)
            pert = restore_symmetry(S, H)
            assert frobenius_norm(commutator(S.matrix, H + pert.matrix)) < 1e-8
            assert np.allclose(pert.matrix, pert.matrix.conj().T, atol=1e-9)

    def test_only_off_block_part_is_touched(self, rng):
        # the perturbation never overlaps the part of the drift that already
        # commutes with S
        S = Symmetry("linear", np.diag([0.0, 0.0, 1.0]))
        H = random_hermitian(rng, 3)
        pert = restore_symmetry(S, H)
        overlap = np.trace(pert.matrix.conj().T @ (H + pert.matrix))
        assert abs(overlap) < 1e-10

    def test_norm_minimality_against_lemma(self, rng):
        for _ in range(10):
            S = Symmetry("linear", random_hermitian(rng, 5))
            H = random_hermitian(rng, 5)
            pert = restore_symmetry(S, H)
            cap = perturbation_norm_bound(S, H)
            assert pert.frob_norm <= cap + 1e-9

    def test_scaling_invariance(self, rng):
        S = random_hermitian(rng, 4)
        H = random_hermitian(rng, 4)
        a = restore_symmetry(Symmetry("linear", S), H)
        b = restore_symmetry(Symmetry("linear", 3.0 * S), H)
        assert np.allclose(a.matrix, b.matrix, atol=1e-10)


class TestQuadraticRestore:
    def test_coupled_qubit_pair(self):
        g = 0.7
        bundle = coupled_qubit_model(g)
        pert = restore_symmetry(bundle.symmetry, bundle.system.drift)
        assert np.allclose(pert.matrix, -g * kron(Z, Z), atol=1e-8)
        assert pert.op_norm == pytest.approx(g, abs=1e-8)

    def test_restored_lift_commutes(self, rng):
        S = Symmetry("quadratic", random_hermitian(rng, 9))
        H = random_hermitian(rng, 3)
        pert = restore_symmetry(S, H)
        defect = frobenius_norm(commutator(S.matrix, iota(H + pert.matrix)))
        assert defect < 1e-8
        assert pert.residual is not None and pert.residual < 1e-8

    def test_quadratic_norm_bound_rejected(self):
        S = Symmetry("quadratic", np.eye(4))
        with pytest.raises(ValidationError):
            perturbation_norm_bound(S, np.eye(2))


class TestPerturbationRecord:
    def test_from_matrix_norms(self):
        sym = Symmetry("linear", Z)
        pert = Perturbation.from_matrix(sym, 2.0 * X)
        assert pert.op_norm == pytest.approx(2.0)
        assert pert.frob_norm == pytest.approx(2.0 * np.sqrt(2))

    def test_from_matrix_residual_with_drift(self):
        sym = Symmetry("linear", Z)
        pert = Perturbation.from_matrix(sym, -X, drift=X)
        assert pert.residual == pytest.approx(0.0, abs=1e-12)

    def test_norm_bound_value(self):
        cap = perturbation_norm_bound(Symmetry("linear", Z), X)
        # ||[Z, X]||_F = 2 sqrt(2), gap 2
        assert cap == pytest.approx(np.sqrt(2.0))
        assert operator_norm(X) <= cap

    def test_norm_bound_projector_is_commutator_norm(self, rng):
        # unit gap, so the cap is exactly ||[S, H_d]||_F
        S = Symmetry("linear", np.diag([1.0, 1.0, 0.0, 0.0]))
        H = random_hermitian(rng, 4)
        cap = perturbation_norm_bound(S, H)
        assert cap == pytest.approx(frobenius_norm(commutator(S.matrix, H)))

    def test_norm_bound_dominates_restoration(self):
        from qsl.models import hopping_chain_model

        bundle = hopping_chain_model(3, 1.0)
        pert = restore_symmetry(bundle.symmetry, bundle.system.drift)
        cap = perturbation_norm_bound(bundle.symmetry, bundle.system.drift)
        assert pert.op_norm <= cap + 1e-12
