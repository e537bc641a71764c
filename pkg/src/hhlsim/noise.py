"""Amplitude-damping (T1) execution of compiled circuits on density matrices.

Every gate advances the wall clock by its duration; each qubit then decays for
that long (idle qubits too, unless ``idle_damping`` is off). Readout errors
are independent per-bit flips applied to the measured distribution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import qstate
from .circuits import CompiledCircuit, GateDurations, gate_matrix
from .errors import DomainError, ValidationError
from .qstate import DensityMatrix, MeasurementHistogram, StateVector


@dataclass(frozen=True)
class NoiseParams:
    t1_ns: float = 50_000.0  # T1 ~ 50 us
    cnot_ns: float = 200.0
    rz_ns: float = 0.0
    single_ns: float = 60.0
    readout_flip: float = 0.0
    idle_damping: bool = True

    def __post_init__(self):
        if self.t1_ns <= 0:
            raise ValidationError("t1_ns must be positive")
        if min(self.cnot_ns, self.rz_ns, self.single_ns) < 0:
            raise ValidationError("gate durations must be nonnegative")
        if not (0.0 <= self.readout_flip <= 0.5):
            raise ValidationError("readout_flip must be in [0, 0.5]")

    @property
    def durations(self) -> GateDurations:
        return GateDurations(self.cnot_ns, self.rz_ns, self.single_ns)

    def to_json(self) -> str:
        return json.dumps(
            {
                "t1_ns": self.t1_ns,
                "cnot_ns": self.cnot_ns,
                "rz_ns": self.rz_ns,
                "single_ns": self.single_ns,
                "readout_flip": self.readout_flip,
                "idle_damping": self.idle_damping,
            },
            sort_keys=True,
        )

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseParams":
        return cls(
            t1_ns=float(d.get("t1_ns", 50_000.0)),
            cnot_ns=float(d.get("cnot_ns", 200.0)),
            rz_ns=float(d.get("rz_ns", 0.0)),
            single_ns=float(d.get("single_ns", 60.0)),
            readout_flip=float(d.get("readout_flip", 0.0)),
            idle_damping=bool(d.get("idle_damping", True)),
        )

    @classmethod
    def load(cls, path) -> "NoiseParams":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _kraus_pair(gamma: float):
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return k0, k1


def damping_channel(rho: DensityMatrix, qubit: int, t: float, t1: float) -> DensityMatrix:
    """Single-qubit amplitude damping for duration ``t`` with decay time ``t1``."""
    if t < 0:
        raise DomainError("elapsed time must be nonnegative")
    if t == 0:
        return rho
    gamma = 1.0 - np.exp(-t / t1)
    k0, k1 = _kraus_pair(gamma)
    n = rho.num_qubits
    out = np.zeros_like(rho.entries)
    for k in (k0, k1):
        t_ = rho.entries.reshape((2,) * (2 * n))
        t_ = qstate._apply_on_axes(t_, k, [qubit])
        t_ = qstate._apply_on_axes(t_, k.conj(), [n + qubit])
        out = out + t_.reshape(rho.entries.shape)
    return DensityMatrix(n, out, _validate=False)


def survival_bound(cnot_count: int, noise: NoiseParams = NoiseParams()) -> float:
    """exp(-(cnot_count * t_CNOT) / T1): the excited-population survival after
    a CNOT-dominated sequence. 50 CNOTs at the defaults give e^{-1/5} ~ 0.819."""
    if cnot_count < 0:
        raise DomainError("cnot_count must be nonnegative")
    return float(np.exp(-(cnot_count * noise.cnot_ns) / noise.t1_ns))


def _flip_distribution(probs: np.ndarray, k: int, flip: float) -> np.ndarray:
    """Apply an independent binary symmetric channel to each of k outcome bits."""
    if flip == 0.0:
        return probs
    m = np.array([[1 - flip, flip], [flip, 1 - flip]])
    t = probs.reshape((2,) * k)
    for axis in range(k):
        t = np.moveaxis(np.tensordot(m, np.moveaxis(t, axis, 0), axes=(1, 0)), 0, axis)
    return t.reshape(-1)


def run_noisy(
    compiled: CompiledCircuit,
    noise: NoiseParams,
    shots: int = 0,
    seed: int | None = None,
    initial: StateVector | qstate.DensityMatrix | None = None,
):
    """Execute a compiled circuit under amplitude damping.

    Returns ``(final density matrix, histogram)``. The histogram covers the
    measured qubits in gate order (all qubits, MSB first, if nothing is
    measured); ``shots == 0`` means exact probabilities. The returned density
    matrix is the pre-measurement state.
    """
    n = compiled.num_qubits
    if initial is None:
        initial = qstate.basis_state(n, 0)
    rho = initial if isinstance(initial, qstate.DensityMatrix) else initial.to_density_matrix()
    durations = noise.durations
    measured: list[int] = []
    for g in compiled.gates:
        if g.kind == "measure":
            measured.append(g.qubits[0])
            continue
        rho = qstate.apply_unitary(rho, gate_matrix(g), list(g.qubits))
        dt = durations.of(g)
        if dt > 0:
            aged = range(n) if noise.idle_damping else g.qubits
            for q in aged:
                rho = damping_channel(rho, q, dt, noise.t1_ns)
    targets = measured if measured else list(range(n))
    probs = qstate._marginal_probabilities(rho, targets)
    probs = probs / probs.sum()
    probs = _flip_distribution(probs, len(targets), noise.readout_flip)
    k = len(targets)
    if shots == 0:
        hist = MeasurementHistogram(
            {format(i, f"0{k}b"): float(p) for i, p in enumerate(probs)}, None
        )
    else:
        rng = np.random.default_rng(seed)
        draws = rng.multinomial(shots, probs / probs.sum())
        hist = MeasurementHistogram(
            {format(i, f"0{k}b"): int(c) for i, c in enumerate(draws) if c > 0}, shots
        )
    return rho, hist
