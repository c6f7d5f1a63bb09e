"""Pauli-string observables, magnetizations, expectation values, and the
three cost-function variants (raw expectation, absolute expectation,
compressor L1 loss over a ground-state dataset)."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitLayout, RegisterSpec, apply_circuit
from .errors import ConfigurationError
from .qcore import StateVector, zero_state

_AXES = ("x", "y", "z")


@dataclass(frozen=True)
class PauliString:
    """Product of single-qubit Pauli factors with a real coefficient.

    ``factors`` maps qubit index to axis; identity factors are omitted.
    """

    factors: tuple[tuple[int, str], ...]
    coefficient: float = 1.0

    def __post_init__(self):
        norm = tuple(sorted((int(q), ax) for q, ax in dict(self.factors).items()))
        object.__setattr__(self, "factors", norm)
        for q, ax in norm:
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if ax not in _AXES:
                raise ValueError(f"unknown Pauli axis {ax!r}")

    @classmethod
    def from_spec(cls, spec: str, coefficient: float = 1.0) -> "PauliString":
        """Parse literals like "Z1 Z2 X3" (1-based qubit labels)."""
        factors = {}
        for token in spec.split():
            m = re.fullmatch(r"([XYZxyz])(\d+)", token)
            if m is None:
                raise ValueError(f"bad Pauli token {token!r} in {spec!r}")
            qubit = int(m.group(2)) - 1
            if qubit < 0:
                raise ValueError(f"qubit labels are 1-based, got {token!r}")
            if qubit in factors:
                raise ValueError(f"repeated qubit in {spec!r}")
            factors[qubit] = m.group(1).lower()
        return cls(tuple(factors.items()), coefficient)

    @property
    def max_qubit(self) -> int:
        return max((q for q, _ in self.factors), default=-1)


@dataclass(frozen=True)
class ObservableSum:
    """Real-coefficient sum of Pauli strings (Hermitian by construction)."""

    terms: tuple[PauliString, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def max_qubit(self) -> int:
        return max((t.max_qubit for t in self.terms), default=-1)

    def describe(self) -> str:
        parts = []
        for t in self.terms:
            body = " ".join(f"{ax.upper()}{q + 1}" for q, ax in t.factors)
            parts.append(f"{t.coefficient:g}*[{body or 'I'}]")
        return " + ".join(parts)


def pauli_string(spec: str, coefficient: float = 1.0) -> ObservableSum:
    return ObservableSum((PauliString.from_spec(spec, coefficient),))


def z_magnetization(n: int) -> ObservableSum:
    """Average z magnetization (1/n) sum_i Z_i over all qubits."""
    return ObservableSum(
        tuple(PauliString(((q, "z"),), 1.0 / n) for q in range(n))
    )


def x_magnetization(register: RegisterSpec) -> ObservableSum:
    """Average x magnetization over the cost register only."""
    return ObservableSum(
        tuple(PauliString(((q, "x"),), 1.0 / register.n_cost) for q in register.cost_qubits)
    )


# ---------------------------------------------------------------------------
# Pauli action on raw amplitude arrays


def apply_pauli_raw(amps: np.ndarray, n: int, term: PauliString) -> np.ndarray:
    """coefficient * (Pauli product) acting on a raw amplitude array."""
    out = amps.copy()
    for q, ax in term.factors:
        d_left, d_right = 1 << q, 1 << (n - q - 1)
        view = out.reshape(d_left, 2, d_right)
        if ax == "z":
            view[:, 1, :] *= -1.0
        elif ax == "x":
            out = np.ascontiguousarray(view[:, ::-1, :]).reshape(-1)
        else:  # y
            swapped = view[:, ::-1, :].copy()
            swapped[:, 0, :] *= -1j
            swapped[:, 1, :] *= 1j
            out = swapped.reshape(-1)
    if term.coefficient != 1.0:
        out *= term.coefficient
    return out


def apply_observable_raw(amps: np.ndarray, n: int, obs: ObservableSum) -> np.ndarray:
    acc = np.zeros_like(amps)
    for term in obs.terms:
        acc += apply_pauli_raw(amps, n, term)
    return acc


def expectation(state: StateVector, obs: ObservableSum) -> float:
    """<psi| obs |psi> for a Pauli-string sum; always real."""
    if obs.max_qubit >= state.n:
        raise ValueError(
            f"observable touches qubit {obs.max_qubit}, state has {state.n} qubits"
        )
    return float(np.vdot(state.amplitudes, apply_observable_raw(state.amplitudes, state.n, obs)).real)


# ---------------------------------------------------------------------------
# Cost functions


@dataclass(frozen=True)
class CostFunction:
    """One of the three training objectives.

    kind "raw": <M_C> on the circuit output from |0>.
    kind "abs": |<M_C>|.
    kind "compressor": sum_i |<m_i> - label_i| over a dataset of input
    states, with <m_i> the observable on the circuit output for input i.
    """

    kind: str
    observable: ObservableSum
    dataset: tuple[tuple[StateVector, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in ("raw", "abs", "compressor"):
            raise ConfigurationError(f"unknown cost kind {self.kind!r}")
        if self.kind == "compressor":
            if not self.dataset:
                raise ConfigurationError("compressor cost needs a non-empty dataset")
            sizes = {s.n for s, _ in self.dataset}
            if len(sizes) != 1:
                raise ConfigurationError(f"dataset inputs mix qubit counts {sizes}")

    @classmethod
    def raw(cls, obs: ObservableSum) -> "CostFunction":
        return cls("raw", obs)

    @classmethod
    def absolute(cls, obs: ObservableSum) -> "CostFunction":
        return cls("abs", obs)

    @classmethod
    def compressor(cls, samples, obs: ObservableSum) -> "CostFunction":
        return cls("compressor", obs, tuple(samples))

    def describe(self) -> str:
        base = f"{self.kind}:{self.observable.describe()}"
        if self.dataset is not None:
            base += f" over {len(self.dataset)} samples"
        return base


def cost_value(cost: CostFunction, layout: CircuitLayout, theta) -> float:
    """Evaluate a cost function at a parameter vector."""
    if cost.kind == "compressor":
        total = 0.0
        for inp, label in cost.dataset:
            out = apply_circuit(layout, theta, inp)
            total += abs(expectation(out, cost.observable) - label)
        return total
    out = apply_circuit(layout, theta, zero_state(layout.register.n))
    value = expectation(out, cost.observable)
    return abs(value) if cost.kind == "abs" else value
