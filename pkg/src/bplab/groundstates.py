"""Random long-range spin Hamiltonians, exact ground states, and the
ground-state compressor dataset (states labelled by their average z
magnetization)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import seeding
from .errors import ConfigurationError, NumericError
from .observables import expectation, z_magnetization
from .qcore import HermitianMatrix, StateVector, hermitian_eig

MAX_HAMILTONIAN_QUBITS = 12
_DISTRIBUTION = "uniform[-scale, +scale]"


@dataclass(frozen=True)
class LongRangeHamiltonian:
    """H = sum_{i<j} (Jz_ij Z_i Z_j + Jx_ij X_i X_j) + sum_i (w_i X_i + v Z_i).

    The uniform longitudinal field v multiplies every Z_i; coupling arrays
    are used on their strict upper triangle only.
    """

    n: int
    jz: np.ndarray
    jx: np.ndarray
    w: np.ndarray
    v: float

    def __post_init__(self):
        jz = np.asarray(self.jz, dtype=float)
        jx = np.asarray(self.jx, dtype=float)
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "jz", jz)
        object.__setattr__(self, "jx", jx)
        object.__setattr__(self, "w", w)
        if jz.shape != (self.n, self.n) or jx.shape != (self.n, self.n):
            raise ValueError("coupling arrays must be n x n")
        if w.shape != (self.n,):
            raise ValueError("field array must have length n")
        if not (np.all(np.isfinite(jz)) and np.all(np.isfinite(jx))
                and np.all(np.isfinite(w)) and np.isfinite(self.v)):
            raise ValueError("Hamiltonian coefficients must be finite")

    def coefficient_count(self) -> int:
        return self.n * (self.n - 1) + self.n + 1


def random_hamiltonian(n: int, seed: int, scale: float = 1.0) -> LongRangeHamiltonian:
    """Draw all coefficients i.i.d. uniform on [-scale, +scale]."""
    if n > MAX_HAMILTONIAN_QUBITS:
        raise ConfigurationError(f"n={n} exceeds dense limit {MAX_HAMILTONIAN_QUBITS}")
    rng = seeding.stream(seed, "hamiltonian")
    jz = np.zeros((n, n))
    jx = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    jz[iu] = rng.uniform(-scale, scale, len(iu[0]))
    jx[iu] = rng.uniform(-scale, scale, len(iu[0]))
    w = rng.uniform(-scale, scale, n)
    v = float(rng.uniform(-scale, scale))
    return LongRangeHamiltonian(n, jz, jx, w, v)


def build_matrix(h: LongRangeHamiltonian) -> HermitianMatrix:
    """Dense matrix over the computational basis (qubit 0 = most
    significant bit), built from bit arithmetic rather than Kronecker
    products."""
    n = h.n
    dim = 1 << n
    idx = np.arange(dim)
    shifts = np.array([n - 1 - q for q in range(n)])
    zvals = 1.0 - 2.0 * ((idx[:, None] >> shifts[None, :]) & 1)  # (dim, n)

    mat = np.zeros((dim, dim), dtype=complex)
    jz_upper = np.triu(h.jz, k=1)
    diag = ((zvals @ jz_upper) * zvals).sum(axis=1) + h.v * zvals.sum(axis=1)
    mat[idx, idx] = diag

    for i in range(n):
        mask_i = 1 << shifts[i]
        if h.w[i] != 0.0:
            mat[idx ^ mask_i, idx] += h.w[i]
        for j in range(i + 1, n):
            if h.jx[i, j] != 0.0:
                mat[idx ^ (mask_i | (1 << shifts[j])), idx] += h.jx[i, j]
    return HermitianMatrix(dim, mat)


def ground_state(h: LongRangeHamiltonian) -> tuple[float, StateVector]:
    """Lowest eigenpair with a deterministic phase convention: the
    largest-magnitude amplitude is made real and positive."""
    dim = 1 << h.n
    if dim > 4096:
        raise ConfigurationError(f"dimension {dim} exceeds dense solver limit 4096")
    matrix = build_matrix(h)
    vals, vecs = hermitian_eig(matrix)
    energy = float(vals[0])
    vec = vecs[:, 0]
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    vec = vec * np.conj(phase)
    residual = np.linalg.norm(matrix.entries @ vec - energy * vec)
    if residual >= 1e-8:
        raise NumericError(
            f"ground-state residual {residual:.3e} for n={h.n}, energy={energy:.6f}"
        )
    return energy, StateVector(h.n, vec)


@dataclass(frozen=True)
class CompressorDataset:
    """Ground states paired with their average z magnetization."""

    n: int
    n_g: int
    seed: int
    scale: float
    samples: tuple[tuple[StateVector, float], ...]
    distribution: str = _DISTRIBUTION

    def __post_init__(self):
        if len(self.samples) != self.n_g:
            raise ValueError("sample count does not match n_g")
        for state, label in self.samples:
            if state.n != self.n:
                raise ValueError("dataset state has wrong qubit count")
            if not -1.0 - 1e-12 <= label <= 1.0 + 1e-12:
                raise ValueError(f"label {label} outside [-1, 1]")


def make_compressor_dataset(
    n: int, n_g: int, seed: int, scale: float = 1.0
) -> CompressorDataset:
    """Generate ``n_g`` labelled ground states; each sample's Hamiltonian
    seed is derived from (seed, sample index), so generation order is
    irrelevant."""
    if n_g < 1:
        raise ConfigurationError(f"dataset size {n_g} must be >= 1")
    magnetization = z_magnetization(n)
    samples = []
    for i in range(n_g):
        h = random_hamiltonian(n, seeding.substream_seed(seed, "dataset-sample", i), scale)
        _, state = ground_state(h)
        samples.append((state, expectation(state, magnetization)))
    return CompressorDataset(n, n_g, seed, scale, tuple(samples))


def save_dataset(dataset: CompressorDataset, path) -> None:
    doc = {
        "meta": {
            "n": dataset.n,
            "N_g": dataset.n_g,
            "seed": dataset.seed,
            "scale": dataset.scale,
            "distribution": dataset.distribution,
        },
        "samples": [
            {
                "label": label,
                "re": state.amplitudes.real.tolist(),
                "im": state.amplitudes.imag.tolist(),
            }
            for state, label in dataset.samples
        ],
    }
    Path(path).write_text(json.dumps(doc))


def load_dataset(path) -> CompressorDataset:
    doc = json.loads(Path(path).read_text())
    meta = doc["meta"]
    samples = tuple(
        (
            StateVector(meta["n"], np.array(s["re"]) + 1j * np.array(s["im"])),
            float(s["label"]),
        )
        for s in doc["samples"]
    )
    return CompressorDataset(
        meta["n"], meta["N_g"], meta["seed"], meta["scale"], samples,
        meta.get("distribution", _DISTRIBUTION),
    )
