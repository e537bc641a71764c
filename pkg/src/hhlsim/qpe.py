"""Quantum phase estimation: circuit construction, exact register statistics,
and the measured QPEA used as the hybrid solver's first step.

Register bit 1 (most significant) controls the highest unitary power, so a
measured register string reads directly as the n-bit eigenvalue estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import circuits, qstate
from .circuits import Circuit, gate
from .errors import DomainError, ValidationError
from .problem import HermitianProblem, unitary_power
from .qstate import MeasurementHistogram


@dataclass(frozen=True)
class QpeConfig:
    n: int
    problem: HermitianProblem
    direction: str = "forward"  # forward | inverse

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("register size must be >= 1")
        if self.direction not in ("forward", "inverse"):
            raise ValidationError(f"unknown direction {self.direction!r}")


def qpe_block(problem: HermitianProblem, n: int, register, v_qubits, physical_swap=False):
    """Forward QPE gate sequence on explicit wires.

    Returns ``(gates, out_register)`` where ``out_register[i]`` is the wire
    holding register bit i+1 afterwards (differs from ``register`` when the
    inverse-QFT swap layer is absorbed by relabeling).
    """
    register = list(register)
    v_qubits = list(v_qubits)
    spectral = problem.spectral
    gates = [gate("h", q) for q in register]
    for i, q in enumerate(register):
        u = unitary_power(spectral, 2 ** (n - 1 - i))
        kind = "cunitary"
        gates.append(circuits.gate(kind, q, *v_qubits, matrix=u))
    iqft, out_register = circuits.inverse_qft_gates(register, physical_swap=physical_swap)
    gates.extend(iqft)
    return gates, out_register


def build_qpe(config: QpeConfig, physical_swap: bool = False) -> Circuit:
    """Standalone QPE(A) circuit: register on wires 0..n-1, input state after.

    Forward direction appends register measurements (the QPEA); the inverse
    direction is the exact adjoint of the unmeasured block.
    """
    n = config.n
    q = config.problem.num_qubits
    register = list(range(n))
    v_qubits = list(range(n, n + q))
    gates, out_register = qpe_block(
        config.problem, n, register, v_qubits, physical_swap=physical_swap
    )
    roles = {"register": tuple(out_register), "input": tuple(v_qubits)}
    if config.direction == "inverse":
        return Circuit(n + q, tuple(circuits.adjoint(gates)), roles)
    gates = gates + [gate("measure", w) for w in out_register]
    return Circuit(n + q, tuple(gates), roles)


def beta_coefficient(lam: float, x: int, n: int) -> complex:
    """(1/2^n) sum_y exp(2 pi i y (lam - x/2^n)) - the register amplitude weight."""
    y = np.arange(2**n)
    return complex(np.sum(np.exp(2j * np.pi * y * (lam - x / 2**n))) / 2**n)


def register_distribution_exact(problem: HermitianProblem, n: int) -> MeasurementHistogram:
    """Exact QPEA outcome distribution Pr(x) = sum_j |alpha_j|^2 |beta_{x|j}|^2."""
    if n < 1:
        raise DomainError("register size must be >= 1")
    spectral = problem.spectral
    weights = np.abs(spectral.amplitudes) ** 2
    probs = {}
    for x in range(2**n):
        p = sum(
            w * abs(beta_coefficient(lam, x, n)) ** 2
            for w, lam in zip(weights, spectral.eigenvalues)
        )
        probs[format(x, f"0{n}b")] = float(p)
    total = sum(probs.values())
    return MeasurementHistogram({k: v / total for k, v in probs.items()}, None)


def run_qpea(
    problem: HermitianProblem,
    n: int,
    shots: int,
    seed: int,
    noise=None,
) -> MeasurementHistogram:
    """Sampled QPEA histogram; deterministic for a fixed seed.

    With ``noise`` the compiled circuit runs on the density-matrix substrate
    (see :mod:`hhlsim.noise`); otherwise sampling uses the exact distribution.
    """
    if shots < 1:
        raise DomainError("shots must be >= 1")
    if noise is None:
        dist = register_distribution_exact(problem, n)
        return _sample_histogram(dist, shots, seed)
    from . import noise as noise_mod

    compiled = circuits.compile_circuit(build_qpe(QpeConfig(n, problem)), noise.durations)
    _, hist = noise_mod.run_noisy(compiled, noise, shots=shots, seed=seed)
    return hist


def qpea_distribution_noisy(problem: HermitianProblem, n: int, noise) -> MeasurementHistogram:
    """Exact-probability register distribution under the noise model."""
    from . import noise as noise_mod

    compiled = circuits.compile_circuit(build_qpe(QpeConfig(n, problem)))
    _, hist = noise_mod.run_noisy(compiled, noise, shots=0, seed=0)
    return hist


def _sample_histogram(dist: MeasurementHistogram, shots: int, seed: int) -> MeasurementHistogram:
    labels = sorted(dist.outcomes)
    p = np.array([dist.outcomes[k] for k in labels])
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, p)
    counts = {lab: int(c) for lab, c in zip(labels, draws) if c > 0}
    return MeasurementHistogram(counts, shots)
