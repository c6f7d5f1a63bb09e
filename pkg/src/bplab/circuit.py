"""Brick-wall circuit structure, two-qubit gate parametrization, and
initialization schemes.

Layers are 1-based. Layer k places gates on pairs (q + 2m, q + 2m + 1)
with q = (k - 1) mod 2, so layer 1 starts at qubit 0 and parities
alternate; pairs that would run past qubit n-1 are omitted. Each gate
carries six rotation angles; a gate is "entangling" when its pair
straddles a boundary between the cost register and the rest of the chain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import seeding
from .errors import ConfigurationError
from .qcore import HermitianMatrix, StateVector, apply_gate_raw

# Rotation planes of the six per-gate angles, in application order
# (the first angle's rotation acts on the state first). Planes are
# two-qubit basis indices 0..3 = |00>,|01>,|10>,|11>.
ROTATION_PLANES = ((2, 3), (1, 2), (2, 3), (0, 1), (1, 2), (2, 3))
PARAMS_PER_GATE = 6


@dataclass(frozen=True)
class RegisterSpec:
    """Partition of the chain into a contiguous cost register and the rest."""

    n: int
    cost_offset: int
    n_cost: int

    def __post_init__(self):
        if not 1 <= self.n_cost <= self.n:
            raise ConfigurationError(f"cost register size {self.n_cost} invalid for n={self.n}")
        if self.cost_offset < 0 or self.cost_offset + self.n_cost > self.n:
            raise ConfigurationError(
                f"cost register [{self.cost_offset}, {self.cost_offset + self.n_cost}) "
                f"outside chain of {self.n} qubits"
            )

    @property
    def n_noncost(self) -> int:
        return self.n - self.n_cost

    @property
    def cost_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.cost_offset, self.cost_offset + self.n_cost))

    @property
    def noncost_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n) if q not in self.cost_qubits)

    def boundaries(self) -> tuple[int, ...]:
        """Left qubit index of every pair (i, i+1) that straddles the register."""
        cuts = []
        if self.cost_offset > 0:
            cuts.append(self.cost_offset - 1)
        if self.cost_offset + self.n_cost < self.n:
            cuts.append(self.cost_offset + self.n_cost - 1)
        return tuple(cuts)


@dataclass(frozen=True)
class GateSite:
    layer: int
    pair: tuple[int, int]
    param_offset: int
    is_entangling: bool


@dataclass(frozen=True)
class CircuitLayout:
    register: RegisterSpec
    layers: int
    gates: tuple[GateSite, ...]
    entangling_param_indices: tuple[int, ...]

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    @property
    def n_params(self) -> int:
        return PARAMS_PER_GATE * len(self.gates)

    @cached_property
    def pair_lefts(self) -> np.ndarray:
        """Left qubit of each gate's pair, in gate order (hot-loop cache)."""
        return np.array([g.pair[0] for g in self.gates], dtype=np.intp)

    @cached_property
    def entangling_param_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_params, dtype=bool)
        mask[list(self.entangling_param_indices)] = True
        return mask


@dataclass(frozen=True)
class ParamVector:
    """Flat vector of rotation angles in radians, six per gate."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1:
            raise ValueError("parameter vector must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError("parameter vector has non-finite entries")

    def __len__(self) -> int:
        return len(self.values)


def theta_values(theta) -> np.ndarray:
    """Accept a ParamVector or a plain array and return the raw angles."""
    if isinstance(theta, ParamVector):
        return theta.values
    return np.asarray(theta, dtype=float)


# ---------------------------------------------------------------------------
# Layout construction


def layer_pairs(n: int, layer: int) -> list[tuple[int, int]]:
    """Pairs acted on in a given 1-based layer of an n-qubit chain."""
    q = (layer - 1) % 2
    pairs = [(i, i + 1) for i in range(q, n - 1, 2)]
    if not pairs:
        # only possible at n=2, where every layer holds the single pair
        return [(0, 1)]
    return pairs


def build_layout(register: RegisterSpec, layers: int) -> CircuitLayout:
    """Enumerate the brick pattern and assign parameter offsets."""
    if register.n < 2:
        raise ConfigurationError("a two-qubit-gate circuit needs at least 2 qubits")
    if layers < 1:
        raise ConfigurationError(f"layer count {layers} must be >= 1")
    cuts = set(register.boundaries())
    gates = []
    entangling = []
    offset = 0
    for k in range(1, layers + 1):
        for pair in layer_pairs(register.n, k):
            is_ent = pair[0] in cuts
            gates.append(GateSite(k, pair, offset, is_ent))
            if is_ent:
                entangling.extend(range(offset, offset + PARAMS_PER_GATE))
            offset += PARAMS_PER_GATE
    return CircuitLayout(register, layers, tuple(gates), tuple(entangling))


# ---------------------------------------------------------------------------
# Gate parametrization


def generator_matrix(axes: tuple[int, int]) -> HermitianMatrix:
    """Rank-2 Hermitian generator with -i at (a-1, b-1) and +i at (b-1, a-1).

    Axes are 1-based labels of the two-qubit basis |00>,|01>,|10>,|11>.
    """
    a, b = axes
    if not (1 <= a < b <= 4):
        raise ValueError(f"axes {axes} must satisfy 1 <= a < b <= 4")
    m = np.zeros((4, 4), dtype=complex)
    m[a - 1, b - 1] = -1j
    m[b - 1, a - 1] = 1j
    return HermitianMatrix(4, m)


def _rotation(plane: tuple[int, int], angle: float) -> np.ndarray:
    a, b = plane
    r = np.eye(4)
    c, s = np.cos(angle), np.sin(angle)
    r[a, a] = c
    r[b, b] = c
    r[a, b] = -s
    r[b, a] = s
    return r


def gate_unitary(angles) -> np.ndarray:
    """Real orthogonal 4x4 gate from six plane-rotation angles."""
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (PARAMS_PER_GATE,):
        raise ValueError(f"expected {PARAMS_PER_GATE} angles, got shape {angles.shape}")
    if not np.all(np.isfinite(angles)):
        raise ValueError("angles must be finite")
    m = np.eye(4)
    for pos, plane in enumerate(ROTATION_PLANES):
        m = _rotation(plane, angles[pos]) @ m
    return m


def gate_unitary_batch(angles: np.ndarray) -> np.ndarray:
    """Vectorized gate_unitary over a (batch, 6) angle array -> (batch, 4, 4)."""
    angles = np.asarray(angles, dtype=float)
    batch = angles.shape[0]
    out = np.broadcast_to(np.eye(4), (batch, 4, 4)).copy()
    rot = np.empty((batch, 4, 4))
    for pos, (a, b) in enumerate(ROTATION_PLANES):
        c, s = np.cos(angles[:, pos]), np.sin(angles[:, pos])
        rot[:] = np.eye(4)
        rot[:, a, a] = c
        rot[:, b, b] = c
        rot[:, a, b] = -s
        rot[:, b, a] = s
        out = rot @ out
    return out


def circuit_gate_matrices(layout: CircuitLayout, theta) -> np.ndarray:
    """All gate matrices of a circuit, (gate_count, 4, 4), in gate order."""
    vals = theta_values(theta)
    if len(vals) != layout.n_params:
        raise ValueError(f"parameter vector length {len(vals)} != {layout.n_params}")
    return gate_unitary_batch(vals.reshape(layout.gate_count, PARAMS_PER_GATE))


def apply_circuit_raw(layout: CircuitLayout, gate_mats: np.ndarray, amps: np.ndarray) -> np.ndarray:
    """Apply precomputed gate matrices to a raw amplitude array."""
    n = layout.register.n
    for g, left in enumerate(layout.pair_lefts):
        amps = apply_gate_raw(amps, n, gate_mats[g], left)
    return amps


def apply_circuit(layout: CircuitLayout, theta, state: StateVector) -> StateVector:
    """Run the full layered circuit on an input state."""
    if state.n != layout.register.n:
        raise ValueError(f"state has {state.n} qubits, layout expects {layout.register.n}")
    mats = circuit_gate_matrices(layout, theta)
    return StateVector(state.n, apply_circuit_raw(layout, mats, state.amplitudes.copy()))


# ---------------------------------------------------------------------------
# Initialization schemes


@dataclass(frozen=True)
class Random:
    label: str = field(default="random", init=False)


@dataclass(frozen=True)
class Partitioned:
    label: str = field(default="partitioned", init=False)


@dataclass(frozen=True)
class HardLimit:
    """Entangling angles live only in ``entangling_layers`` boundary layers."""

    entangling_layers: int
    placement: str = "last"

    @property
    def label(self) -> str:
        return f"hardlimit(L_E={self.entangling_layers},{self.placement})"


@dataclass(frozen=True)
class FromValues:
    values: np.ndarray

    label: str = field(default="fromvalues", init=False)


def _pick_layers(available: list[int], count: int, placement: str) -> set[int]:
    if placement == "first":
        return set(available[:count])
    if placement == "last":
        return set(available[len(available) - count:])
    if placement == "evenly-spaced":
        if count == 0:
            return set()
        if count == 1:
            return {available[0]}
        picks = []
        for i in range(count):
            j = round(i * (len(available) - 1) / (count - 1))
            while j in picks:
                j += 1
            picks.append(j)
        return {available[j] for j in picks}
    raise ConfigurationError(f"unknown placement {placement!r}")


def init_params(layout: CircuitLayout, scheme, seed: int) -> ParamVector:
    """Draw a parameter vector under one of the initialization schemes.

    Deterministic for a fixed seed: all schemes consume the same uniform
    draw over every angle, then zero out entangling angles as the scheme
    dictates, so two schemes with one seed share non-entangling values.
    """
    if isinstance(scheme, FromValues):
        vals = np.asarray(scheme.values, dtype=float)
        if len(vals) != layout.n_params:
            raise ConfigurationError(
                f"value vector length {len(vals)} != {layout.n_params}"
            )
        return ParamVector(vals.copy())

    rng = seeding.stream(seed, "init")
    vals = rng.uniform(0.0, 2.0 * np.pi, layout.n_params)
    if isinstance(scheme, Random):
        return ParamVector(vals)
    if isinstance(scheme, Partitioned):
        vals[layout.entangling_param_mask] = 0.0
        return ParamVector(vals)
    if isinstance(scheme, HardLimit):
        boundary_layers = sorted({g.layer for g in layout.gates if g.is_entangling})
        if not 0 <= scheme.entangling_layers <= len(boundary_layers):
            raise ConfigurationError(
                f"L_E={scheme.entangling_layers} exceeds {len(boundary_layers)} boundary layers"
            )
        keep = _pick_layers(boundary_layers, scheme.entangling_layers, scheme.placement)
        for g in layout.gates:
            if g.is_entangling and g.layer not in keep:
                vals[g.param_offset:g.param_offset + PARAMS_PER_GATE] = 0.0
        return ParamVector(vals)
    raise ConfigurationError(f"unknown initialization scheme {scheme!r}")


# ---------------------------------------------------------------------------
# Serialization


def params_to_json(layout: CircuitLayout, theta, scheme_label: str = "fromvalues",
                   seed: int | None = None) -> str:
    """Flat JSON array of radians plus the layout descriptor."""
    reg = layout.register
    doc = {
        "n": reg.n,
        "cost_offset": reg.cost_offset,
        "n_C": reg.n_cost,
        "L": layout.layers,
        "scheme": scheme_label,
        "seed": seed,
        "values": [float(v) for v in theta_values(theta)],
    }
    return json.dumps(doc)


def params_from_json(text: str) -> tuple[CircuitLayout, ParamVector, dict]:
    """Rebuild (layout, params, descriptor) from params_to_json output."""
    doc = json.loads(text)
    reg = RegisterSpec(doc["n"], doc["cost_offset"], doc["n_C"])
    layout = build_layout(reg, doc["L"])
    theta = ParamVector(np.array(doc["values"], dtype=float))
    if len(theta) != layout.n_params:
        raise ConfigurationError(
            f"serialized vector length {len(theta)} != layout size {layout.n_params}"
        )
    return layout, theta, doc
