"""Shared test helpers: independent oracles kept deliberately simple."""

import numpy as np
import pytest

from bplab.qcore import StateVector


def random_state(n: int, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Unitary by orthonormalizing a random complex matrix."""
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def series_expm(m: np.ndarray, terms: int = 40) -> np.ndarray:
    """Matrix exponential by truncated Taylor series (oracle)."""
    out = np.eye(m.shape[0], dtype=complex)
    acc = np.eye(m.shape[0], dtype=complex)
    for k in range(1, terms):
        acc = acc @ m / k
        out = out + acc
    return out


PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_pauli_operator(n: int, factors: dict[int, str], coefficient: float = 1.0) -> np.ndarray:
    """Kronecker-product Pauli string (oracle; qubit 0 is the leftmost factor)."""
    out = np.array([[coefficient]], dtype=complex)
    for q in range(n):
        out = np.kron(out, PAULI[factors.get(q, "i")])
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
