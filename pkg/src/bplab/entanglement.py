"""Entanglement diagnostics: bipartite output-state entropy with the
cost-register-aligned partition rule, the mutual-information sum over
single non-cost qubits, the collective (Choi-state) entropy of the circuit
unitary across the register boundary, and the inter-register mixing metric.

All entropies are in bits (log base 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import (
    PARAMS_PER_GATE,
    CircuitLayout,
    RegisterSpec,
    circuit_gate_matrices,
    gate_unitary_batch,
    theta_values,
)
from .errors import ConfigurationError
from .qcore import (
    MAX_QUBITS,
    DensityMatrix,
    StateVector,
    apply_gate_raw,
    reduced_density_raw,
)

# Reduced-matrix eigenvalues below this threshold contribute zero entropy.
EIG_CLIP = 1e-12


@dataclass(frozen=True)
class Partition:
    """Bipartition of the chain into contiguous ``alpha`` and the rest."""

    alpha: tuple[int, ...]
    beta: tuple[int, ...]

    def __post_init__(self):
        alpha = tuple(sorted(self.alpha))
        beta = tuple(sorted(self.beta))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        if not alpha or not beta:
            raise ValueError("both sides of the partition must be non-empty")
        n = len(alpha) + len(beta)
        if set(alpha) | set(beta) != set(range(n)):
            raise ValueError("partition must cover qubits 0..n-1 exactly once")
        if alpha[-1] - alpha[0] + 1 != len(alpha):
            raise ValueError(f"alpha {alpha} is not contiguous")

    @classmethod
    def of(cls, alpha, n: int) -> "Partition":
        alpha = tuple(sorted(alpha))
        beta = tuple(q for q in range(n) if q not in alpha)
        return cls(alpha, beta)


def default_partition(register: RegisterSpec) -> Partition:
    """The floor((n-1)/2)-qubit window aligned with the cost register.

    Alpha starts at the cost register (clipped to fit the chain), which
    maximizes its overlap with the cost qubits.
    """
    n = register.n
    if n < 3:
        raise ConfigurationError("default partition needs at least 3 qubits")
    size = (n - 1) // 2
    start = min(register.cost_offset, n - size)
    return Partition.of(range(start, start + size), n)


def entropy_bits(rho: np.ndarray | DensityMatrix) -> float:
    """Von Neumann entropy in bits of a density matrix."""
    entries = rho.entries if isinstance(rho, DensityMatrix) else rho
    return _entropy_from_eigs(np.linalg.eigvalsh(entries))


def _entropy_from_eigs(eigs: np.ndarray) -> float:
    p = np.clip(eigs, 0.0, 1.0)
    p = p[p > EIG_CLIP]
    return float(-(p * np.log2(p)).sum())


def state_entropy_raw(amps: np.ndarray, n: int, alpha: tuple[int, ...]) -> float:
    """Entropy of the reduced state on ``alpha`` for a raw pure state."""
    return entropy_bits(reduced_density_raw(amps, n, alpha))


def bipartite_entropy(state: StateVector, partition: Partition) -> float:
    """S = entropy of the reduced state on alpha, in bits."""
    if len(partition.alpha) + len(partition.beta) != state.n:
        raise ValueError("partition size does not match the state")
    return state_entropy_raw(state.amplitudes, state.n, partition.alpha)


def mutual_information_sum(state: StateVector, register: RegisterSpec) -> float:
    """Sum over non-cost qubits q of I_2(cost register, q)."""
    if register.n != state.n:
        raise ValueError("register does not match the state")
    if register.n_noncost < 1:
        raise ValueError("mutual-information sum needs a non-empty non-cost register")
    amps = state.amplitudes
    cost = register.cost_qubits
    s_cost = state_entropy_raw(amps, state.n, cost)
    total = 0.0
    for q in register.noncost_qubits:
        s_q = state_entropy_raw(amps, state.n, (q,))
        s_joint = state_entropy_raw(amps, state.n, tuple(sorted(cost + (q,))))
        total += s_cost + s_q - s_joint
    return total


# ---------------------------------------------------------------------------
# Choi-state construction and collective entropy


@dataclass(frozen=True)
class ChoiState:
    """2n-qubit pure state encoding a unitary: input register on qubits
    0..n-1, output register on qubits n..2n-1."""

    n: int
    state: StateVector

    def __post_init__(self):
        if self.state.n != 2 * self.n:
            raise ValueError("Choi state must live on 2n qubits")


def _choi_guard(n: int):
    if 2 * n > MAX_QUBITS:
        raise ConfigurationError(
            f"Choi construction needs 2n <= {MAX_QUBITS} qubits, got n={n}"
        )


def _entangled_pairs_raw(n: int) -> np.ndarray:
    """n maximally entangled input-output pairs as a raw 2n-qubit array."""
    return np.eye(1 << n, dtype=complex).reshape(-1) / np.sqrt(1 << n)


def choi_state(layout: CircuitLayout, theta) -> ChoiState:
    """Apply the circuit to the output half of n entangled pairs.

    The resulting amplitude at (input basis j, output basis i) equals
    U[i, j] / sqrt(2^n) without ever assembling the dense unitary.
    """
    n = layout.register.n
    _choi_guard(n)
    amps = _entangled_pairs_raw(n)
    mats = circuit_gate_matrices(layout, theta)
    for g, left in enumerate(layout.pair_lefts):
        amps = apply_gate_raw(amps, 2 * n, mats[g], n + left)
    return ChoiState(n, StateVector(2 * n, amps))


def choi_state_from_unitary(unitary: np.ndarray) -> ChoiState:
    """Choi state of an explicit dense unitary (oracle/diagnostic path)."""
    dim = unitary.shape[0]
    n = dim.bit_length() - 1
    if unitary.shape != (dim, dim) or 1 << n != dim:
        raise ValueError(f"unitary shape {unitary.shape} is not 2^n x 2^n")
    _choi_guard(n)
    # amplitude[j * 2^n + i] = U[i, j] / sqrt(2^n)
    amps = unitary.T.reshape(-1).astype(complex) / np.sqrt(dim)
    return ChoiState(n, StateVector(2 * n, amps))


def _collective_keep(register: RegisterSpec) -> tuple[int, ...]:
    n = register.n
    cost = register.cost_qubits
    return tuple(cost) + tuple(n + q for q in cost)


def collective_entropy_of_choi(choi: ChoiState, register: RegisterSpec) -> float:
    """Entropy of the Choi state reduced to the cost register's input and
    output qubits."""
    return state_entropy_raw(
        choi.state.amplitudes, 2 * choi.n, _collective_keep(register)
    )


def collective_entropy(layout: CircuitLayout, theta) -> float:
    """Collective entanglement of the circuit across the register boundary.

    Zero exactly when the unitary factorizes into independent cost-register
    and non-cost-register parts; at most 2*min(n_C, n_N).
    """
    return collective_entropy_of_choi(choi_state(layout, theta), layout.register)


def collective_entropy_batch(layout: CircuitLayout, thetas: np.ndarray) -> np.ndarray:
    """Vectorized collective entropy over a (batch, n_params) angle array.

    Used by finite-difference pretraining, where hundreds of nearby
    parameter vectors are evaluated per optimizer step.
    """
    n = layout.register.n
    _choi_guard(n)
    thetas = np.asarray(thetas, dtype=float)
    batch, n_params = thetas.shape
    if n_params != layout.n_params:
        raise ValueError(f"angle rows have length {n_params}, expected {layout.n_params}")
    n_gates = layout.gate_count
    mats = gate_unitary_batch(
        thetas.reshape(batch * n_gates, PARAMS_PER_GATE)
    ).reshape(batch, n_gates, 4, 4)

    amps = np.broadcast_to(_entangled_pairs_raw(n), (batch, 1 << (2 * n))).copy()
    total = 2 * n
    for g, left in enumerate(layout.pair_lefts):
        pos = n + left
        d_left, d_right = 1 << pos, 1 << (total - pos - 2)
        amps = np.einsum(
            "bij,bljr->blir", mats[:, g], amps.reshape(batch, d_left, 4, d_right)
        ).reshape(batch, -1)

    keep = _collective_keep(layout.register)
    rest = [q for q in range(total) if q not in keep]
    mat = (
        amps.reshape([batch] + [2] * total)
        .transpose([0] + [1 + q for q in keep] + [1 + q for q in rest])
        .reshape(batch, 1 << len(keep), 1 << len(rest))
    )
    rho = np.einsum("bkr,blr->bkl", mat, mat.conj())
    eigs = np.linalg.eigvalsh(rho)
    p = np.clip(eigs, 0.0, 1.0)
    terms = np.where(p > EIG_CLIP, -p * np.log2(np.where(p > EIG_CLIP, p, 1.0)), 0.0)
    return terms.sum(axis=1)


def mixing_metric(theta, entangling_param_indices) -> float:
    """Mean of |sin| over the entangling angles."""
    indices = list(entangling_param_indices)
    if not indices:
        raise ValueError("entangling index set is empty")
    vals = theta_values(theta)
    return float(np.mean(np.abs(np.sin(vals[indices]))))
