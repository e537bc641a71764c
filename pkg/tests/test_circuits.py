"""Gate IR, decompositions, compilation, and QASM emission."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhlsim import circuits
from hhlsim.circuits import (
    Circuit,
    GateDurations,
    adjoint,
    circuit_unitary,
    compile_circuit,
    controlled_ry_chain,
    decompose_controlled_unitary,
    emit_qasm,
    equal_up_to_phase,
    gate,
    gate_matrix,
    inverse_qft2,
    inverse_qft_gates,
    simplify,
    zyz_angles,
)
from hhlsim.errors import CompileError, ValidationError
from hhlsim.problem import build_a_lambda, unitary_power


def _random_unitary(rng, dim=2):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def _ry(t):
    return np.array(
        [[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]]
    )


class TestGate:
    def test_rejects_non_unitary_matrix(self):
        with pytest.raises(ValidationError):
            gate("unitary", 0, matrix=np.array([[1, 1], [0, 1]], dtype=complex))

    def test_rejects_non_finite_params(self):
        with pytest.raises(ValidationError):
            gate("ry", 0, params=(np.nan,))

    def test_cnot_matrix(self):
        m = gate_matrix(gate("cnot", 0, 1))
        expected = np.eye(4)[[0, 1, 3, 2]]
        np.testing.assert_allclose(m, expected)


class TestZyz:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**9))
    def test_reconstructs(self, seed):
        rng = np.random.default_rng(seed)
        u = _random_unitary(rng)
        alpha, beta, gamma, delta = zyz_angles(u)
        rz = lambda t: np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)])
        rebuilt = np.exp(1j * alpha) * rz(beta) @ _ry(gamma) @ rz(delta)
        np.testing.assert_allclose(rebuilt, u, atol=1e-10)


class TestControlledDecomposition:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**9))
    def test_matches_controlled_matrix(self, seed):
        rng = np.random.default_rng(seed)
        u = _random_unitary(rng)
        gates = decompose_controlled_unitary(u, 0, 1)
        got = circuit_unitary(gates, 2)
        expected = np.block(
            [[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), u]]
        )
        np.testing.assert_allclose(got, expected, atol=1e-9)

    def test_controlled_x_equivalent_to_cnot(self):
        gates = decompose_controlled_unitary(np.array([[0, 1], [1, 0]], dtype=complex), 0, 1)
        got = circuit_unitary(gates, 2)
        np.testing.assert_allclose(got, gate_matrix(gate("cnot", 0, 1)), atol=1e-9)

    def test_uniform_two_cnot_skeleton(self):
        # the entangling cost does not depend on the rotation angles
        for u in (np.eye(2, dtype=complex), -np.eye(2, dtype=complex),
                  np.array([[0, 1], [1, 0]], dtype=complex)):
            gates = decompose_controlled_unitary(u, 0, 1)
            assert sum(1 for g in gates if g.kind == "cnot") == 2

    def test_lambda_family_step(self):
        u = unitary_power(build_a_lambda(0.25).spectral, 1)
        gates = decompose_controlled_unitary(u, 0, 1)
        assert sum(1 for g in gates if g.kind == "cnot") == 2
        got = circuit_unitary(gates, 2)
        expected = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), u]])
        np.testing.assert_allclose(got, expected, atol=1e-9)


class TestInverseQft:
    def test_two_qubit_matrix(self):
        gates, out = inverse_qft2()
        u = circuit_unitary(gates, 2)
        dft = np.exp(2j * np.pi * np.outer(np.arange(4), np.arange(4)) / 4) / 2
        iqft = dft.conj().T
        # relabeled wires: logical bit i ends on out[i]; compare via permutation
        perm = np.zeros((4, 4))
        for x in range(4):
            bits = [(x >> 1) & 1, x & 1]
            y = bits[0] * (2 ** (1 - out[0])) + bits[1] * (2 ** (1 - out[1]))
            perm[y, x] = 1
        np.testing.assert_allclose(perm.T @ u, iqft, atol=1e-10)

    def test_physical_swap_variant(self):
        gates, out = inverse_qft2(physical_swap=True)
        assert out == [0, 1]
        u = circuit_unitary(gates, 2)
        dft = np.exp(2j * np.pi * np.outer(np.arange(4), np.arange(4)) / 4) / 2
        assert equal_up_to_phase(u, dft.conj().T, atol=1e-10)
        lowered = compile_circuit(Circuit(2, tuple(gates), {}))
        assert lowered.cnot_count == 5  # 3 for the swap + 2 for the controlled phase

    def test_relabeled_variant_uses_two_cnots(self):
        gates, _ = inverse_qft2()
        lowered = compile_circuit(Circuit(2, tuple(gates), {}))
        assert lowered.cnot_count == 2


class TestMultiplexedRy:
    def _reference(self, pattern_angles, k):
        dim = 2 ** (k + 1)
        m = np.zeros((dim, dim), dtype=complex)
        for x in range(2**k):
            pattern = format(x, f"0{k}b") if k else ""
            r = _ry(pattern_angles.get(pattern, 0.0))
            m[2 * x : 2 * x + 2, 2 * x : 2 * x + 2] = r
        return m

    @pytest.mark.parametrize(
        "angles,k",
        [
            ({"": 0.4}, 0),
            ({"1": 0.7}, 1),
            ({"0": 0.3, "1": 0.7}, 1),
            ({"01": 0.5, "10": 0.9, "11": 1.3}, 2),
            ({"00": 0.2, "01": 0.5, "10": 0.9, "11": 1.3}, 2),
        ],
    )
    def test_matches_block_diagonal(self, angles, k):
        gates = controlled_ry_chain(angles, list(range(k)), k)
        got = circuit_unitary(gates, k + 1)
        np.testing.assert_allclose(got, self._reference(angles, k), atol=1e-9)

    def test_cnot_costs(self):
        chain0 = controlled_ry_chain({"": 0.4}, [], 0)
        chain1 = controlled_ry_chain({"0": 0.3, "1": 0.7}, [0], 1)
        chain2 = controlled_ry_chain({"11": 1.0, "01": 0.2}, [0, 1], 2)
        count = lambda gs, n: compile_circuit(Circuit(n, tuple(gs), {})).cnot_count
        assert count(chain0, 1) == 0
        assert count(chain1, 2) == 2
        assert count(chain2, 3) == 14  # one cry (2 cx) + one ccry (12 cx)

    def test_three_controls_rejected(self):
        with pytest.raises(CompileError):
            controlled_ry_chain({"111": 1.0}, [0, 1, 2], 3)


_KINDS = ["h", "x", "rx", "ry", "rz", "phase", "cnot", "swap", "cphase", "cry"]


def _random_circuit(rng, n, length):
    gates = []
    for _ in range(length):
        kind = _KINDS[rng.integers(len(_KINDS))]
        if kind in ("h", "x"):
            gates.append(gate(kind, int(rng.integers(n))))
        elif kind in ("rx", "ry", "rz", "phase"):
            gates.append(gate(kind, int(rng.integers(n)), params=(float(rng.uniform(-np.pi, np.pi)),)))
        else:
            a, b = rng.choice(n, size=2, replace=False)
            if kind in ("cnot", "swap"):
                gates.append(gate(kind, int(a), int(b)))
            else:
                gates.append(gate(kind, int(a), int(b), params=(float(rng.uniform(-np.pi, np.pi)),)))
    return gates


class TestCompile:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**9), st.integers(2, 4), st.integers(1, 40))
    def test_compiled_unitary_equivalent(self, seed, n, length):
        rng = np.random.default_rng(seed)
        gates = _random_circuit(rng, n, length)
        compiled = compile_circuit(Circuit(n, tuple(gates), {}))
        assert all(g.kind in ("cnot", "h", "x", "rx", "ry", "rz", "measure") for g in compiled.gates)
        u_src = circuit_unitary(gates, n)
        u_cmp = circuit_unitary([g for g in compiled.gates], n)
        assert equal_up_to_phase(u_cmp, u_src, atol=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**9))
    def test_simplify_never_increases_cnots(self, seed):
        rng = np.random.default_rng(seed)
        gates = _random_circuit(rng, 3, 30)
        lowered = []
        for g in gates:
            lowered.extend(circuits._lower(g))
        before = sum(1 for g in lowered if g.kind == "cnot")
        after = sum(1 for g in simplify(lowered) if g.kind == "cnot")
        assert after <= before

    def test_adjoint_inverts(self):
        rng = np.random.default_rng(8)
        gates = _random_circuit(rng, 3, 20)
        u = circuit_unitary(gates + adjoint(gates), 3)
        assert equal_up_to_phase(u, np.eye(8), atol=1e-9)

    def test_durations(self):
        circ = Circuit(2, (gate("cnot", 0, 1), gate("h", 0), gate("rz", 1, params=(0.3,))), {})
        compiled = compile_circuit(circ, GateDurations())
        assert compiled.cnot_count == 1
        assert compiled.total_duration_ns == pytest.approx(260.0)


class TestQasm:
    def test_single_cnot(self):
        circ = Circuit(2, (gate("cnot", 0, 1),), {})
        text = emit_qasm(compile_circuit(circ))
        assert text.count("cx q[0],q[1];") == 1
        assert text.startswith("OPENQASM 2.0;")

    def test_deterministic(self):
        circ = Circuit(2, (gate("ry", 0, params=(0.123456789,)), gate("cnot", 0, 1)), {})
        assert emit_qasm(compile_circuit(circ)) == emit_qasm(compile_circuit(circ))

    def test_measures_serialized(self):
        circ = Circuit(
            2,
            (gate("h", 0), gate("measure", 0), gate("measure", 1)),
            {"register": (0, 1)},
        )
        text = emit_qasm(compile_circuit(circ))
        assert "creg register[2];" in text
        assert "measure" in text
