"""Linear systems A x = b, the parameterized 2x2 family, and eigenvalue-bit analysis.

All matrices are Hermitian with spectrum strictly inside (0, 1); position k of a
register bitstring is the k-th bit of the binary expansion (MSB first), so the
integer value of an n-bit string s is sum_i 2^(n-i) s_i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, ValidationError

SPECTRUM_MARGIN = 1e-6


@dataclass(frozen=True)
class SpectralData:
    """Eigenpairs of the system matrix plus the input-state overlaps."""

    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # orthonormal columns, eigenvectors[:, j] <-> eigenvalues[j]
    amplitudes: np.ndarray  # alpha_j = <u_j|b>

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


@dataclass(frozen=True)
class EigenmeanProfile:
    """Per-position bit means over the distinct eigenvalue bitstrings."""

    n: int
    means: tuple  # position k in 1..n maps to means[k-1] in [0, 1]
    bitstrings: tuple  # the distinct n-bit strings the means were taken over

    def is_fixed(self, k: int) -> bool:
        """True when every eigenvalue bitstring agrees at 1-based position k."""
        return self.means[k - 1] in (0.0, 1.0)

    @property
    def fixed_positions(self) -> tuple:
        return tuple(k for k in range(1, self.n + 1) if self.is_fixed(k))

    @property
    def free_positions(self) -> tuple:
        return tuple(k for k in range(1, self.n + 1) if not self.is_fixed(k))


class HermitianProblem:
    """A Hermitian system matrix, a unit vector b, and lazily cached spectral data."""

    def __init__(self, matrix, b):
        a = np.array(matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"matrix must be square, got shape {a.shape}")
        d = a.shape[0]
        if not (d > 1 and (d & (d - 1)) == 0):
            raise ValidationError(f"dimension {d} is not a power of two >= 2")
        if not np.allclose(a, a.conj().T, atol=1e-10):
            raise ValidationError("matrix is not Hermitian")
        vec = np.array(b, dtype=complex).reshape(-1)
        if vec.size != d:
            raise ValidationError(f"b has size {vec.size}, expected {d}")
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > 1e-10:
            raise ValidationError(f"b has norm {norm}, expected a unit vector")
        eigs = np.linalg.eigvalsh(a)
        if eigs.min() < SPECTRUM_MARGIN or eigs.max() > 1.0 - SPECTRUM_MARGIN:
            raise ValidationError(
                f"eigenvalues {eigs} must lie strictly inside (0, 1)"
            )
        a.setflags(write=False)
        vec = vec / norm
        vec.setflags(write=False)
        self.matrix = a
        self.b = vec
        self.dimension = d
        self.num_qubits = d.bit_length() - 1

    @cached_property
    def spectral(self) -> SpectralData:
        return spectral_decompose(self)

    def __repr__(self):
        return f"HermitianProblem(dimension={self.dimension})"


def build_a_lambda(lam: float) -> HermitianProblem:
    """The 2x2 family [[1/2, lam-1/2], [lam-1/2, 1/2]] with b = |0>.

    Eigenpairs are (lam, |+>) and (1-lam, |->).
    """
    if not (0.0 < lam < 1.0):
        raise DomainError(f"lambda must be in (0, 1), got {lam}")
    a = np.array([[0.5, lam - 0.5], [lam - 0.5, 0.5]])
    return HermitianProblem(a, [1.0, 0.0])


def spectral_decompose(problem: HermitianProblem) -> SpectralData:
    """Eigendecomposition with eigenvalues ascending and overlaps against b."""
    eigenvalues, eigenvectors = np.linalg.eigh(problem.matrix)
    amplitudes = eigenvectors.conj().T @ problem.b
    return SpectralData(eigenvalues, eigenvectors, amplitudes)


def unitary_power(spectral: SpectralData, m: int) -> np.ndarray:
    """(e^{2 pi i A})^m assembled from the spectral form; m may be negative."""
    phases = np.exp(2j * np.pi * m * spectral.eigenvalues)
    return (spectral.eigenvectors * phases) @ spectral.eigenvectors.conj().T


def binary_estimate(lam: float, n: int) -> str:
    """First n bits of the binary expansion of lam in (0, 1).

    Dyadic values representable in n bits are returned exactly; everything
    else truncates (floor of 2^n * lam).
    """
    if not (0.0 < lam < 1.0):
        raise DomainError(f"lambda must be in (0, 1), got {lam}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    scaled = lam * 2**n
    nearest = round(scaled)
    value = nearest if abs(scaled - nearest) < 1e-9 else int(np.floor(scaled))
    value = min(max(value, 0), 2**n - 1)
    return format(value, f"0{n}b")


def _distinct_eigenvalues(spectral: SpectralData, tol: float = 1e-9) -> list[float]:
    distinct: list[float] = []
    for lam in spectral.eigenvalues:
        if not any(abs(lam - seen) <= tol for seen in distinct):
            distinct.append(float(lam))
    return distinct


def eigenmean_profile(spectral: SpectralData, n: int) -> EigenmeanProfile:
    """Bit means over the distinct eigenvalues' n-bit estimates.

    Degenerate spectra contribute each eigenvalue once; duplicates agree at
    every bit so fixedness is unaffected.
    """
    strings = tuple(binary_estimate(lam, n) for lam in _distinct_eigenvalues(spectral))
    return profile_from_bitstrings(strings, n)


def profile_from_bitstrings(bitstrings, n: int) -> EigenmeanProfile:
    """Eigenmean profile of an explicit collection of n-bit strings."""
    strings = tuple(dict.fromkeys(bitstrings))
    if not strings:
        raise DomainError("need at least one bitstring")
    for s in strings:
        if len(s) != n or set(s) - {"0", "1"}:
            raise DomainError(f"{s!r} is not an {n}-bit string")
    means = tuple(
        sum(int(s[k]) for s in strings) / len(strings) for k in range(n)
    )
    return EigenmeanProfile(n, means, strings)


def is_perfectly_estimated(spectral: SpectralData, n: int) -> bool:
    """True iff 2^n * lambda is an integer (within 1e-9) for every eigenvalue."""
    scaled = spectral.eigenvalues * 2**n
    return bool(np.all(np.abs(scaled - np.round(scaled)) < 1e-9))


def classical_solution(problem: HermitianProblem):
    """Normalized solution state A^{-1} b / ||A^{-1} b|| and the norm ||A^{-1} b||."""
    x = np.linalg.solve(problem.matrix, problem.b)
    norm = float(np.linalg.norm(x))
    return x / norm, norm


def problem_from_dict(spec: dict) -> HermitianProblem:
    """Build a problem from the JSON schema ({"kind": "lambda"|"matrix", ...})."""
    kind = spec.get("kind")
    if kind == "lambda":
        return build_a_lambda(float(spec["lambda"]))
    if kind == "matrix":
        d = int(spec["dim"])
        a = np.array(spec["a_real"], dtype=float).reshape(d, d) + 1j * np.array(
            spec["a_imag"], dtype=float
        ).reshape(d, d)
        b = np.array(spec["b_real"], dtype=float) + 1j * np.array(
            spec["b_imag"], dtype=float
        )
        return HermitianProblem(a, b)
    raise ValidationError(f"unknown problem kind {kind!r}")


def load_problem(path) -> HermitianProblem:
    with open(path, encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))
