"""Statevector primitives: construction, gate application, partial trace,
eigendecomposition."""

import numpy as np
import pytest

from bplab.errors import ConfigurationError, TopologyError
from bplab.qcore import (
    ATOL_SPECTRAL,
    ATOL_STRUCTURAL,
    DensityMatrix,
    HermitianMatrix,
    StateVector,
    apply_two_qubit,
    hermitian_eig,
    partial_trace,
    zero_state,
)

from conftest import random_state, random_unitary

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


class TestZeroState:
    def test_single_qubit(self):
        np.testing.assert_array_equal(zero_state(1).amplitudes, [1, 0])

    def test_three_qubits(self):
        state = zero_state(3)
        assert state.amplitudes.shape == (8,)
        assert state.amplitudes[0] == 1.0
        assert np.count_nonzero(state.amplitudes) == 1

    def test_normalized(self):
        assert abs(np.linalg.norm(zero_state(2).amplitudes) - 1) < ATOL_STRUCTURAL

    @pytest.mark.parametrize("n", [0, -1, 15])
    def test_out_of_range(self, n):
        with pytest.raises(ConfigurationError):
            zero_state(n)


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="norm"):
            StateVector(1, np.array([1.0, 1.0]))

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError, match="length"):
            StateVector(2, np.array([1.0, 0.0]))


class TestApplyTwoQubit:
    def test_identity_leaves_state(self, rng):
        state = random_state(3, rng)
        out = apply_two_qubit(state, np.eye(4), (1, 2))
        np.testing.assert_allclose(out.amplitudes, state.amplitudes, atol=1e-15)

    def test_swap_on_01(self):
        # |01> has basis index 1 (qubit 0 is the most significant bit)
        state = StateVector(2, np.array([0, 1, 0, 0], dtype=complex))
        out = apply_two_qubit(state, SWAP, (0, 1))
        np.testing.assert_allclose(out.amplitudes, [0, 0, 1, 0], atol=1e-15)

    def test_random_unitary_preserves_norm(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 6))
            i = int(rng.integers(0, n - 1))
            state = random_state(n, rng)
            out = apply_two_qubit(state, random_unitary(4, rng), (i, i + 1))
            assert abs(np.linalg.norm(out.amplitudes) - 1) < ATOL_STRUCTURAL

    def test_non_adjacent_pair_rejected(self, rng):
        with pytest.raises(TopologyError):
            apply_two_qubit(random_state(3, rng), np.eye(4), (0, 2))

    def test_non_unitary_rejected(self, rng):
        with pytest.raises(ValueError, match="unitary"):
            apply_two_qubit(random_state(2, rng), np.ones((4, 4)), (0, 1))


class TestPartialTrace:
    def test_product_state(self):
        plus = np.array([1, 1]) / np.sqrt(2)
        amps = np.kron([1, 0], plus)
        rho = partial_trace(StateVector(2, amps), {0})
        np.testing.assert_allclose(rho.entries, [[1, 0], [0, 0]], atol=1e-12)

    def test_bell_state_maximally_mixed(self):
        bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
        rho = partial_trace(StateVector(2, bell), {0})
        np.testing.assert_allclose(rho.entries, np.eye(2) / 2, atol=1e-12)

    def test_ghz_two_qubit_marginal(self):
        ghz = np.zeros(8)
        ghz[0] = ghz[7] = 1 / np.sqrt(2)
        rho = partial_trace(StateVector(3, ghz), {0, 1})
        np.testing.assert_allclose(rho.entries, np.diag([0.5, 0, 0, 0.5]), atol=1e-12)

    def test_keep_set_validation(self, rng):
        state = random_state(3, rng)
        with pytest.raises(ValueError):
            partial_trace(state, set())
        with pytest.raises(ValueError):
            partial_trace(state, {0, 1, 2})

    def test_eigenvalues_sum_to_one(self, rng):
        for _ in range(10):
            state = random_state(5, rng)
            rho = partial_trace(state, {1, 3})
            assert abs(rho.eigenvalues().sum() - 1) < ATOL_STRUCTURAL

    def test_schmidt_symmetry(self, rng):
        # nonzero spectra of the two sides of a pure-state bipartition agree
        for _ in range(10):
            n = int(rng.integers(2, 6))
            cut = int(rng.integers(1, n))
            state = random_state(n, rng)
            left = partial_trace(state, set(range(cut))).eigenvalues()
            right = partial_trace(state, set(range(cut, n))).eigenvalues()
            k = min(len(left), len(right))
            np.testing.assert_allclose(
                np.sort(left)[-k:], np.sort(right)[-k:], atol=ATOL_SPECTRAL
            )

    def test_density_matrix_invariants(self, rng):
        rho = partial_trace(random_state(4, rng), {0, 2})
        rho.validate()


class TestHermitianEig:
    def test_diagonal(self):
        vals, _ = hermitian_eig(HermitianMatrix(3, np.diag([3.0, 1.0, 2.0])))
        np.testing.assert_allclose(vals, [1, 2, 3])

    def test_pauli_x(self):
        vals, _ = hermitian_eig(HermitianMatrix(2, np.array([[0, 1], [1, 0]], dtype=complex)))
        np.testing.assert_allclose(vals, [-1, 1], atol=1e-14)

    def test_random_reconstruction(self, rng):
        m = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        m = (m + m.conj().T) / 2
        vals, vecs = hermitian_eig(HermitianMatrix(16, m))
        assert np.linalg.norm(vecs @ np.diag(vals) @ vecs.conj().T - m) < 1e-8
        np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(16), atol=1e-8)

    def test_dim_512(self, rng):
        m = rng.normal(size=(512, 512))
        m = (m + m.T) / 2
        vals, vecs = hermitian_eig(HermitianMatrix(512, m))
        residual = np.linalg.norm(m @ vecs - vecs * vals, axis=0)
        assert np.max(residual) < ATOL_SPECTRAL * 512
        assert np.all(np.diff(vals) >= 0)

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError, match="Hermitian"):
            HermitianMatrix(2, np.array([[0, 1], [0, 0]], dtype=complex))


class TestDensityMatrix:
    def test_rejects_traceless(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(1, np.diag([0.4, 0.4]))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix(1, np.array([[0.5, 1], [0, 0.5]]))
