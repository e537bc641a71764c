"""State-vector and density-matrix substrate tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhlsim import qstate
from hhlsim.errors import DomainError, ImpossibleOutcomeError, ValidationError
from hhlsim.qstate import (
    DensityMatrix,
    StateVector,
    apply_controlled,
    apply_unitary,
    basis_state,
    exact_distribution,
    fidelity_overlap,
    fidelity_pure,
    fidelity_sqrt,
    partial_trace,
    postselect,
    sample,
)


def _random_state(rng, n):
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(n, amps / np.linalg.norm(amps))


def _random_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            StateVector(1, [1.0, 1.0])

    def test_rejects_wrong_length(self):
        with pytest.raises(ValidationError):
            StateVector(2, [1.0, 0.0])

    def test_basis_state(self):
        s = basis_state(2, 3)
        assert s.probability(3) == 1.0

    def test_amplitudes_read_only(self):
        s = basis_state(1, 0)
        with pytest.raises((ValueError, AttributeError)):
            s.amplitudes[0] = 0.5


class TestDensityMatrix:
    def test_pure_state_roundtrip(self):
        rng = np.random.default_rng(0)
        s = _random_state(rng, 2)
        rho = s.to_density_matrix()
        assert rho.purity() == pytest.approx(1.0, abs=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            DensityMatrix(1, np.array([[0.5, 0.4], [0.1, 0.5]]))

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValidationError):
            DensityMatrix(1, np.eye(2))


class TestApplyUnitary:
    def test_hadamard(self):
        s = apply_unitary(basis_state(1, 0), H, [0])
        np.testing.assert_allclose(s.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_qubit_zero_is_most_significant(self):
        s = apply_unitary(basis_state(2, 0), X, [0])
        assert s.probability(2) == pytest.approx(1.0)

    def test_density_matrix_channel_matches_vector(self):
        rng = np.random.default_rng(1)
        s = _random_state(rng, 3)
        u = _random_unitary(rng, 4)
        sv = apply_unitary(s, u, [0, 2])
        dm = apply_unitary(s.to_density_matrix(), u, [0, 2])
        np.testing.assert_allclose(
            dm.entries, sv.to_density_matrix().entries, atol=1e-10
        )

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**9), st.integers(1, 4))
    def test_norm_preserved(self, seed, n):
        rng = np.random.default_rng(seed)
        s = _random_state(rng, n)
        k = int(rng.integers(1, n + 1))
        targets = rng.choice(n, size=k, replace=False).tolist()
        u = _random_unitary(rng, 2**k)
        out = apply_unitary(s, u, targets)
        assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**9), st.integers(1, 4))
    def test_unitary_then_adjoint_is_identity(self, seed, n):
        rng = np.random.default_rng(seed)
        s = _random_state(rng, n)
        k = int(rng.integers(1, n + 1))
        targets = rng.choice(n, size=k, replace=False).tolist()
        u = _random_unitary(rng, 2**k)
        out = apply_unitary(apply_unitary(s, u, targets), u.conj().T, targets)
        np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=1e-10)


class TestApplyControlled:
    def test_cnot_truth_table(self):
        s = apply_controlled(basis_state(2, 2), X, [0], [1])
        assert s.probability(3) == pytest.approx(1.0)
        s = apply_controlled(basis_state(2, 0), X, [0], [1])
        assert s.probability(0) == pytest.approx(1.0)

    def test_control_zero_is_identity(self):
        rng = np.random.default_rng(2)
        u = _random_unitary(rng, 2)
        s = apply_controlled(basis_state(2, 1), u, [0], [1])
        assert s.probability(1) == pytest.approx(1.0)


class TestPostselect:
    def test_keeps_qubit_when_requested(self):
        s = apply_unitary(basis_state(1, 0), H, [0])
        out, prob = postselect(s, 0, 1, remove=False)
        assert prob == pytest.approx(0.5)
        assert out.probability(1) == pytest.approx(1.0)

    def test_removes_qubit_by_default(self):
        s = apply_unitary(basis_state(2, 0), H, [0])
        out, prob = postselect(s, 0, 1)
        assert out.num_qubits == 1
        assert prob == pytest.approx(0.5)

    def test_impossible_outcome_raises(self):
        with pytest.raises(ImpossibleOutcomeError):
            postselect(basis_state(1, 0), 0, 1, remove=False)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**9), st.integers(1, 4))
    def test_probability_matches_diagonal_mass(self, seed, n):
        rng = np.random.default_rng(seed)
        s = _random_state(rng, n)
        probs = np.abs(s.amplitudes) ** 2
        # mass with qubit 0 (most significant bit) equal to 1
        expected = probs[2 ** (n - 1) :].sum()
        if expected < 1e-12:
            return
        _, prob = postselect(s, 0, 1, remove=False)
        assert prob == pytest.approx(expected, abs=1e-10)


class TestPartialTrace:
    def test_product_state_factorizes(self):
        rng = np.random.default_rng(3)
        a, b = _random_state(rng, 1), _random_state(rng, 1)
        joint = StateVector(2, np.kron(a.amplitudes, b.amplitudes))
        rho_a = partial_trace(joint.to_density_matrix(), [0])
        np.testing.assert_allclose(
            rho_a.entries, a.to_density_matrix().entries, atol=1e-12
        )

    def test_bell_state_marginal_is_maximally_mixed(self):
        bell = StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
        rho = partial_trace(bell.to_density_matrix(), [1])
        np.testing.assert_allclose(rho.entries, np.eye(2) / 2, atol=1e-12)

    def test_keep_order_preserved(self):
        s = basis_state(2, 1)  # |01>
        rho = partial_trace(s.to_density_matrix(), [1, 0])
        # qubit 1 first: |1>|0> = index 2
        assert np.real(rho.entries[2, 2]) == pytest.approx(1.0)


class TestFidelity:
    def test_identical_pure_states(self):
        rng = np.random.default_rng(4)
        s = _random_state(rng, 2)
        assert fidelity_pure(s.to_density_matrix(), s) == pytest.approx(1.0)

    def test_orthogonal_states(self):
        assert fidelity_pure(basis_state(1, 0).to_density_matrix(), basis_state(1, 1)) == pytest.approx(0.0, abs=1e-12)

    def test_sqrt_convention_is_square_root_for_pure(self):
        rng = np.random.default_rng(5)
        s, t = _random_state(rng, 1), _random_state(rng, 1)
        ov = fidelity_overlap(s.to_density_matrix(), t)
        sq = fidelity_sqrt(s.to_density_matrix(), t)
        assert sq == pytest.approx(np.sqrt(ov), abs=1e-10)


class TestDistributions:
    def test_exact_distribution_sums_to_one(self):
        rng = np.random.default_rng(6)
        s = _random_state(rng, 3)
        hist = exact_distribution(s, [0, 1, 2])
        assert sum(hist.outcomes.values()) == pytest.approx(1.0, abs=1e-12)
        assert hist.shots is None

    def test_sampling_is_seeded(self):
        rng = np.random.default_rng(7)
        s = _random_state(rng, 2)
        a = sample(s, [0, 1], 500, seed=11)
        b = sample(s, [0, 1], 500, seed=11)
        assert a.outcomes == b.outcomes
        assert sum(a.outcomes.values()) == 500
