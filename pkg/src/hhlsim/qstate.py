"""Exact complex-amplitude simulation substrate.

State vectors and density matrices over qubit registers, gate application,
post-selection, partial trace, fidelity, and seeded measurement sampling.
Qubit 0 is the most significant bit of a basis-state index, so the bitstring
label of index ``x`` reads left to right as qubits 0, 1, 2, ...
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ImpossibleOutcomeError, ValidationError

ATOL = 1e-10


def _check_unitary(u: np.ndarray, atol: float = ATOL) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError(f"operator must be square, got shape {u.shape}")
    d = u.shape[0]
    if not (d > 0 and (d & (d - 1)) == 0):
        raise ValidationError(f"operator dimension {d} is not a power of two")
    if not np.allclose(u.conj().T @ u, np.eye(d), atol=atol):
        raise ValidationError("operator is not unitary within tolerance")
    return u


def _check_targets(num_qubits: int, targets) -> list[int]:
    targets = list(targets)
    if len(set(targets)) != len(targets):
        raise DomainError(f"qubit indices must be distinct, got {targets}")
    for q in targets:
        if not (0 <= q < num_qubits):
            raise DomainError(f"qubit index {q} out of range for {num_qubits} qubits")
    return targets


class StateVector:
    """Pure state over ``num_qubits`` qubits; amplitudes are read-only."""

    def __init__(self, num_qubits: int, amplitudes):
        if num_qubits < 1:
            raise DomainError("num_qubits must be >= 1")
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**num_qubits:
            raise ValidationError(
                f"expected {2**num_qubits} amplitudes, got {amps.size}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-8:
            raise ValidationError(f"state norm {norm} is not 1")
        # renormalize away float dust so invariants hold after long pipelines
        amps = amps / norm
        amps.setflags(write=False)
        self.num_qubits = num_qubits
        self.amplitudes = amps

    def probability(self, index: int) -> float:
        return float(abs(self.amplitudes[index]) ** 2)

    def to_density_matrix(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(self.num_qubits, np.outer(a, a.conj()))

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"


class DensityMatrix:
    """Mixed state; Hermitian, unit trace, positive semidefinite within tolerance."""

    def __init__(self, num_qubits: int, entries, *, _validate: bool = True):
        if num_qubits < 1:
            raise DomainError("num_qubits must be >= 1")
        d = 2**num_qubits
        rho = np.array(entries, dtype=complex)
        if rho.shape != (d, d):
            raise ValidationError(f"expected {d}x{d} matrix, got shape {rho.shape}")
        if _validate:
            if not np.allclose(rho, rho.conj().T, atol=ATOL):
                raise ValidationError("density matrix is not Hermitian")
            tr = np.trace(rho).real
            if abs(tr - 1.0) > 1e-8:
                raise ValidationError(f"density matrix trace {tr} is not 1")
            rho = rho / tr
            eigs = np.linalg.eigvalsh(rho)
            if eigs.min() < -1e-8:
                raise ValidationError(f"density matrix has negative eigenvalue {eigs.min()}")
        rho.setflags(write=False)
        self.num_qubits = num_qubits
        self.entries = rho

    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)

    def __repr__(self):
        return f"DensityMatrix(num_qubits={self.num_qubits})"


@dataclass(frozen=True)
class MeasurementHistogram:
    """Outcome bitstrings (MSB first) mapped to counts or exact probabilities.

    ``shots`` is None in exact-probability mode.
    """

    outcomes: dict = field(default_factory=dict)
    shots: int | None = None

    def __post_init__(self):
        if self.shots is not None:
            total = sum(self.outcomes.values())
            if total != self.shots:
                raise ValidationError(f"counts sum to {total}, expected {self.shots}")
        else:
            total = sum(self.outcomes.values())
            if self.outcomes and abs(total - 1.0) > 1e-9:
                raise ValidationError(f"probabilities sum to {total}, expected 1")

    def probabilities(self) -> dict:
        """Normalized view, identical for counts and exact modes."""
        if self.shots is None:
            return dict(self.outcomes)
        return {k: v / self.shots for k, v in self.outcomes.items()}


def basis_state(num_qubits: int, index: int) -> StateVector:
    """Computational basis state |index> on ``num_qubits`` qubits."""
    if num_qubits < 1:
        raise DomainError("num_qubits must be >= 1")
    if not (0 <= index < 2**num_qubits):
        raise DomainError(f"index {index} out of range for {num_qubits} qubits")
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(num_qubits, amps)


def _apply_on_axes(tensor: np.ndarray, u: np.ndarray, axes: list[int]) -> np.ndarray:
    """Apply matrix ``u`` on the given tensor axes (each of dimension 2)."""
    k = len(axes)
    t = np.moveaxis(tensor, axes, range(k))
    rest = t.shape[k:]
    t = (u @ t.reshape(2**k, -1)).reshape((2,) * k + rest)
    return np.moveaxis(t, range(k), axes)


def apply_unitary(state, u, targets):
    """Apply a unitary on the listed target qubits.

    ``targets[0]`` is the most significant bit of the operator's own index.
    Works on StateVector and DensityMatrix alike.
    """
    u = _check_unitary(u)
    targets = _check_targets(state.num_qubits, targets)
    if u.shape[0] != 2 ** len(targets):
        raise DomainError(
            f"operator dimension {u.shape[0]} does not match {len(targets)} targets"
        )
    n = state.num_qubits
    if isinstance(state, StateVector):
        psi = _apply_on_axes(state.amplitudes.reshape((2,) * n), u, targets)
        return StateVector(n, psi.reshape(-1))
    if isinstance(state, DensityMatrix):
        t = state.entries.reshape((2,) * (2 * n))
        t = _apply_on_axes(t, u, targets)
        t = _apply_on_axes(t, u.conj(), [n + q for q in targets])
        return DensityMatrix(n, t.reshape(2**n, 2**n), _validate=False)
    raise DomainError(f"unsupported state type {type(state)!r}")


def apply_controlled(state, u, controls, targets):
    """Apply ``u`` on targets only where every control qubit is |1>."""
    u = _check_unitary(u)
    controls = _check_targets(state.num_qubits, controls)
    targets = _check_targets(state.num_qubits, targets)
    if set(controls) & set(targets):
        raise DomainError("controls and targets overlap")
    if u.shape[0] != 2 ** len(targets):
        raise DomainError(
            f"operator dimension {u.shape[0]} does not match {len(targets)} targets"
        )
    nc, nt = len(controls), len(targets)
    big = np.eye(2 ** (nc + nt), dtype=complex)
    sub = 2**nt
    big[-sub:, -sub:] = u
    return apply_unitary(state, big, controls + targets)


def _marginal_probabilities(state, qubits: list[int]) -> np.ndarray:
    """Probabilities of computational-basis outcomes on the listed qubits."""
    n = state.num_qubits
    if isinstance(state, StateVector):
        p = (np.abs(state.amplitudes) ** 2).reshape((2,) * n)
    elif isinstance(state, DensityMatrix):
        p = np.real(np.diagonal(state.entries)).reshape((2,) * n)
    else:
        raise DomainError(f"unsupported state type {type(state)!r}")
    keep_sorted = qubits
    drop = [q for q in range(n) if q not in qubits]
    p = p.sum(axis=tuple(drop)) if drop else p
    # after summing, remaining axes are in ascending qubit order
    remaining = sorted(qubits)
    order = [remaining.index(q) for q in keep_sorted]
    p = np.transpose(p, order)
    return np.maximum(p.reshape(-1), 0.0)


def postselect(state, qubit: int, outcome: int, remove: bool = True):
    """Project one qubit onto ``outcome`` and renormalize.

    With ``remove`` (default) the projected qubit is dropped from the result;
    otherwise it stays, pinned to the basis state ``outcome``. Returns the
    conditioned state and the branch probability.
    """
    if outcome not in (0, 1):
        raise DomainError(f"outcome must be 0 or 1, got {outcome}")
    _check_targets(state.num_qubits, [qubit])
    n = state.num_qubits
    if remove and n < 2:
        raise DomainError("cannot postselect the only qubit away")
    if isinstance(state, StateVector):
        t = np.moveaxis(state.amplitudes.reshape((2,) * n), qubit, 0)
        psi = t[outcome]
        prob = float(np.sum(np.abs(psi) ** 2))
        if prob <= 1e-14:
            raise ImpossibleOutcomeError(
                f"outcome {outcome} on qubit {qubit} has zero probability"
            )
        if remove:
            return StateVector(n - 1, psi.reshape(-1) / np.sqrt(prob)), prob
        full = np.zeros_like(t)
        full[outcome] = psi
        full = np.moveaxis(full, 0, qubit)
        return StateVector(n, full.reshape(-1) / np.sqrt(prob)), prob
    if isinstance(state, DensityMatrix):
        t = state.entries.reshape((2,) * (2 * n))
        t = np.moveaxis(t, (qubit, n + qubit), (0, 1))
        block_t = t[outcome, outcome]
        d = 2 ** (n - 1)
        block = block_t.reshape(d, d)
        prob = float(np.trace(block).real)
        if prob <= 1e-14:
            raise ImpossibleOutcomeError(
                f"outcome {outcome} on qubit {qubit} has zero probability"
            )
        if remove:
            return DensityMatrix(n - 1, block / prob, _validate=False), prob
        full = np.zeros_like(t)
        full[outcome, outcome] = block_t
        full = np.moveaxis(full, (0, 1), (qubit, n + qubit))
        return (
            DensityMatrix(n, full.reshape(2**n, 2**n) / prob, _validate=False),
            prob,
        )
    raise DomainError(f"unsupported state type {type(state)!r}")


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every qubit not in ``keep``; result qubit order follows ``keep``."""
    keep = list(keep)
    if not keep:
        raise DomainError("keep must be nonempty")
    _check_targets(rho.num_qubits, keep)
    n = rho.num_qubits
    drop = [q for q in range(n) if q not in keep]
    t = rho.entries.reshape((2,) * (2 * n))
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=q, axis2=t.ndim // 2 + q)
    # remaining row axes correspond to sorted(keep)
    remaining = sorted(keep)
    m = len(keep)
    order = [remaining.index(q) for q in keep]
    t = np.transpose(t, order + [m + i for i in order])
    return DensityMatrix(m, t.reshape(2**m, 2**m), _validate=False)


def fidelity_overlap(rho, psi) -> float:
    """Overlap fidelity <psi|rho|psi> of a mixed state against a pure reference."""
    if isinstance(rho, StateVector):
        rho = rho.to_density_matrix()
    if rho.num_qubits != psi.num_qubits:
        raise DomainError("dimension mismatch between rho and psi")
    v = psi.amplitudes
    val = float(np.real(v.conj() @ rho.entries @ v))
    return min(max(val, 0.0), 1.0)


def fidelity_sqrt(rho, psi) -> float:
    """Square-root convention sqrt(<psi|rho|psi>)."""
    return float(np.sqrt(fidelity_overlap(rho, psi)))


# Pinned by the closed-form calibration in tests/test_oracles.py: the
# Appendix-style fidelity curves match the overlap convention on a lambda grid.
fidelity_pure = fidelity_overlap


def exact_distribution(state, qubits) -> MeasurementHistogram:
    """Exact computational-basis marginal over the listed qubits."""
    qubits = _check_targets(state.num_qubits, list(qubits))
    p = _marginal_probabilities(state, qubits)
    k = len(qubits)
    outcomes = {format(i, f"0{k}b"): float(p[i]) for i in range(2**k)}
    total = sum(outcomes.values())
    return MeasurementHistogram({k_: v / total for k_, v in outcomes.items()}, None)


def sample(state, qubits, shots: int, seed: int) -> MeasurementHistogram:
    """Seeded multinomial sampling of the marginal over the listed qubits."""
    if shots < 1:
        raise DomainError("shots must be >= 1")
    qubits = _check_targets(state.num_qubits, list(qubits))
    p = _marginal_probabilities(state, qubits)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, p)
    k = len(qubits)
    outcomes = {
        format(i, f"0{k}b"): int(c) for i, c in enumerate(draws) if c > 0
    }
    return MeasurementHistogram(outcomes, shots)
