"""Dense statevector primitives: state construction, two-qubit gate
application, partial trace, and Hermitian eigendecomposition.

Bit ordering convention, used everywhere in the package: qubit 0 is the
most significant bit of the amplitude index, so the computational basis
state |b_0 b_1 ... b_{n-1}> lives at index sum_q b_q * 2^(n-1-q).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError, TopologyError

# Structural tolerance: norms, traces, hermiticity, unitarity.
ATOL_STRUCTURAL = 1e-10
# Spectral tolerance: eigendecomposition residuals, entropy symmetry.
ATOL_SPECTRAL = 1e-8
# Largest statevector handled by the dense backend (Choi states reach 2n).
MAX_QUBITS = 14


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitude vector over ``n`` qubits."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (1 << self.n,):
            raise ValueError(
                f"amplitude vector has length {amps.shape}, expected 2^{self.n}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL_STRUCTURAL:
            raise ValueError(f"statevector norm {norm} deviates from 1")

    @property
    def dim(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, PSD, trace-1 reduced state on ``k`` qubits."""

    k: int
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", m)
        dim = 1 << self.k
        if m.shape != (dim, dim):
            raise ValueError(f"density matrix shape {m.shape}, expected {dim}x{dim}")
        if np.max(np.abs(m - m.conj().T)) > ATOL_STRUCTURAL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > ATOL_STRUCTURAL:
            raise ValueError(f"density matrix trace {np.trace(m)} deviates from 1")

    def eigenvalues(self) -> np.ndarray:
        """Ascending real eigenvalues; validates positivity."""
        vals = np.linalg.eigvalsh(self.entries)
        if vals[0] < -ATOL_STRUCTURAL:
            raise NumericError(f"density matrix has negative eigenvalue {vals[0]}")
        return vals

    def validate(self):
        """Run the full invariant check (hermiticity, trace, positivity)."""
        self.eigenvalues()


@dataclass(frozen=True)
class HermitianMatrix:
    """Dense Hermitian matrix (observables, Hamiltonians, generators)."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", m)
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"matrix shape {m.shape}, expected {self.dim}x{self.dim}")
        if np.max(np.abs(m - m.conj().T)) > ATOL_STRUCTURAL:
            raise ValueError("matrix is not Hermitian within tolerance")


def zero_state(n: int) -> StateVector:
    """The all-|0> product state on ``n`` qubits."""
    if not 1 <= n <= MAX_QUBITS:
        raise ConfigurationError(f"qubit count {n} outside supported range 1..{MAX_QUBITS}")
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def apply_gate_raw(amps: np.ndarray, n: int, gate: np.ndarray, i: int) -> np.ndarray:
    """Apply a 4x4 gate to adjacent qubits (i, i+1) of a raw amplitude array.

    Strided application: the pair occupies one contiguous axis of size 4
    after reshaping, so the cost is one small matmul over 2^n amplitudes.
    """
    d_left = 1 << i
    d_right = 1 << (n - i - 2)
    return np.matmul(gate, amps.reshape(d_left, 4, d_right)).reshape(-1)


def apply_two_qubit(state: StateVector, gate: np.ndarray, pair: tuple[int, int]) -> StateVector:
    """Apply a two-qubit unitary to an adjacent pair (i, i+1)."""
    i, j = pair
    if j != i + 1:
        raise TopologyError(f"pair {pair} is not adjacent; circuits are 1D")
    if not 0 <= i < state.n - 1:
        raise ValueError(f"pair {pair} outside qubit range 0..{state.n - 1}")
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (4, 4):
        raise ValueError(f"gate shape {gate.shape}, expected 4x4")
    if np.max(np.abs(gate.conj().T @ gate - np.eye(4))) > ATOL_STRUCTURAL:
        raise ValueError("gate is not unitary within tolerance")
    return StateVector(state.n, apply_gate_raw(state.amplitudes, state.n, gate, i))


def reduced_density_raw(amps: np.ndarray, n: int, keep: tuple[int, ...]) -> np.ndarray:
    """Reduced density matrix of a raw pure-state array on the kept qubits."""
    rest = [q for q in range(n) if q not in keep]
    mat = (
        amps.reshape([2] * n)
        .transpose(list(keep) + rest)
        .reshape(1 << len(keep), 1 << len(rest))
    )
    return mat @ mat.conj().T


def partial_trace(state: StateVector, keep) -> DensityMatrix:
    """Trace out all qubits not in ``keep`` from a pure state."""
    keep = tuple(sorted(keep))
    if len(keep) == 0:
        raise ValueError("keep set is empty")
    if len(set(keep)) != len(keep):
        raise ValueError(f"keep set {keep} has duplicates")
    if any(q < 0 or q >= state.n for q in keep):
        raise ValueError(f"keep set {keep} outside qubit range 0..{state.n - 1}")
    if len(keep) == state.n:
        raise ValueError("keep set must be a strict subset of the qubits")
    return DensityMatrix(len(keep), reduced_density_raw(state.amplitudes, state.n, keep))


def hermitian_eig(m: HermitianMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as orthonormal columns)
    with m @ V = V @ diag(vals) to within ATOL_SPECTRAL * dim per column.
    Backed by LAPACK via numpy.
    """
    try:
        vals, vecs = np.linalg.eigh(m.entries)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    residual = np.linalg.norm(m.entries @ vecs - vecs * vals, axis=0)
    if np.max(residual) >= ATOL_SPECTRAL * m.dim:
        raise NumericError(f"eigendecomposition residual {np.max(residual)} too large")
    return vals, vecs
