"""Analytic circuit gradients, a finite-difference oracle, and Monte Carlo
estimation of gradient statistics over random initializations.

Differentiation uses a generator-insertion adjoint sweep: one forward pass
stores the output state, then a reverse pass carries the observable-adjoint
state backwards while the ket is unwound gate by gate. The derivative for
each of a gate's six angles inserts the plane generator at that rotation's
position in the gate's ordered product, reusing cached partial products,
so the total cost is O(gate count) gate applications.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import seeding
from .circuit import (
    PARAMS_PER_GATE,
    ROTATION_PLANES,
    CircuitLayout,
    _rotation,
    circuit_gate_matrices,
    init_params,
    theta_values,
)
from .errors import ConfigurationError
from .observables import CostFunction, ObservableSum, apply_observable_raw, cost_value
from .qcore import StateVector, apply_gate_raw, zero_state


@dataclass(frozen=True)
class GradientVector:
    """Derivatives with respect to every angle, in parameter order."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if not np.all(np.isfinite(vals)):
            raise ValueError("gradient has non-finite entries")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class VarianceReport:
    """Sample statistics of one gradient component over random draws."""

    param_index: int
    n_samples: int
    mean: float
    variance: float
    variance_stderr: float

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("variance needs at least 2 samples")
        if self.variance < 0:
            raise ValueError("variance must be non-negative")


# ---------------------------------------------------------------------------
# Per-gate derivative algebra


def _plane_generator_times(plane: tuple[int, int], mat: np.ndarray) -> np.ndarray:
    """Left-multiply by the antisymmetric plane generator d/dtheta of a Givens
    rotation at theta=0 (rows: out[a] = -mat[b], out[b] = +mat[a])."""
    a, b = plane
    out = np.zeros_like(mat)
    out[a] = -mat[b]
    out[b] = mat[a]
    return out


def _gate_rotations(angles: np.ndarray) -> list[np.ndarray]:
    return [_rotation(ROTATION_PLANES[m], angles[m]) for m in range(PARAMS_PER_GATE)]


def _gate_derivative_stack(angles: np.ndarray) -> np.ndarray:
    """(6, 4, 4) stack of gate derivatives with respect to each angle."""
    rots = _gate_rotations(angles)
    prefixes = [rots[0]]
    for m in range(1, PARAMS_PER_GATE):
        prefixes.append(rots[m] @ prefixes[-1])
    dus = np.empty((PARAMS_PER_GATE, 4, 4))
    suffix = np.eye(4)
    for m in range(PARAMS_PER_GATE - 1, -1, -1):
        dus[m] = suffix @ _plane_generator_times(ROTATION_PLANES[m], prefixes[m])
        suffix = suffix @ rots[m]
    return dus


def _gate_derivative(angles: np.ndarray, m: int) -> np.ndarray:
    """Single du/dtheta_m without building the full stack."""
    rots = _gate_rotations(angles)
    prefix = rots[0]
    for p in range(1, m + 1):
        prefix = rots[p] @ prefix
    du = _plane_generator_times(ROTATION_PLANES[m], prefix)
    for p in range(m + 1, PARAMS_PER_GATE):
        du = rots[p] @ du
    return du


# ---------------------------------------------------------------------------
# Full analytic gradient


def _grad_expectation_raw(
    layout: CircuitLayout, vals: np.ndarray, input_amps: np.ndarray, obs: ObservableSum
) -> tuple[np.ndarray, float, np.ndarray]:
    """Adjoint sweep. Returns (gradient, expectation value, output amps)."""
    n = layout.register.n
    n_gates = layout.gate_count
    mats = circuit_gate_matrices(layout, vals)
    angle_rows = vals.reshape(n_gates, PARAMS_PER_GATE)
    lefts = layout.pair_lefts

    ket = input_amps
    for g in range(n_gates):
        ket = apply_gate_raw(ket, n, mats[g], lefts[g])
    psi = ket

    bra = apply_observable_raw(psi, n, obs)
    value = float(np.vdot(psi, bra).real)

    grad = np.empty(layout.n_params)
    ket = psi
    for g in range(n_gates - 1, -1, -1):
        left = lefts[g]
        adj = mats[g].T
        ket = apply_gate_raw(ket, n, adj, left)
        dus = _gate_derivative_stack(angle_rows[g])
        d_left, d_right = 1 << left, 1 << (n - left - 2)
        ket3 = ket.reshape(d_left, 4, d_right)
        bra3 = bra.reshape(d_left, 4, d_right)
        moved = np.einsum("mab,lbr->mlar", dus, ket3)
        inner = np.einsum("mlar,lar->m", moved, bra3.conj())
        grad[g * PARAMS_PER_GATE:(g + 1) * PARAMS_PER_GATE] = 2.0 * inner.real
        if g > 0:
            bra = apply_gate_raw(bra, n, adj, left)
    return grad, value, psi


def grad_expectation(
    layout: CircuitLayout, theta, input_state: StateVector, obs: ObservableSum
) -> GradientVector:
    """Exact derivative of <obs> on the circuit output with respect to
    every angle."""
    if input_state.n != layout.register.n:
        raise ValueError(
            f"input has {input_state.n} qubits, layout expects {layout.register.n}"
        )
    if obs.max_qubit >= layout.register.n:
        raise ValueError(f"observable touches qubit {obs.max_qubit} outside the chain")
    vals = theta_values(theta)
    grad, _, _ = _grad_expectation_raw(layout, vals, input_state.amplitudes.copy(), obs)
    return GradientVector(grad)


def _sign(x: float) -> float:
    # sign(0) := 0, the subgradient choice that adds no drift at the optimum
    return float(np.sign(x))


def cost_and_grad(cost: CostFunction, layout: CircuitLayout, theta) -> tuple[float, np.ndarray]:
    """Loss value and analytic gradient sharing one sweep per input state."""
    vals = theta_values(theta)
    if cost.kind == "compressor":
        total = 0.0
        grad = np.zeros(layout.n_params)
        for inp, label in cost.dataset:
            g, e, _ = _grad_expectation_raw(
                layout, vals, inp.amplitudes.copy(), cost.observable
            )
            total += abs(e - label)
            grad += _sign(e - label) * g
        return total, grad
    amps0 = zero_state(layout.register.n).amplitudes
    grad, e, _ = _grad_expectation_raw(layout, vals, amps0, cost.observable)
    if cost.kind == "abs":
        return abs(e), _sign(e) * grad
    return e, grad


def grad_cost(cost: CostFunction, layout: CircuitLayout, theta) -> GradientVector:
    """Gradient of a cost function via the chain rule on <M_C>."""
    _, grad = cost_and_grad(cost, layout, theta)
    return GradientVector(grad)


def finite_difference_grad(cost, layout: CircuitLayout, theta, h: float) -> GradientVector:
    """Central-difference oracle, (f(t+h) - f(t-h)) / 2h per coordinate.

    ``cost`` may be a CostFunction or any callable of the raw angle array.
    """
    if h <= 0:
        raise ValueError(f"step {h} must be positive")
    if isinstance(cost, CostFunction):
        fn = lambda v: cost_value(cost, layout, v)
    else:
        fn = cost
    vals = theta_values(theta).copy()
    grad = np.empty_like(vals)
    for i in range(len(vals)):
        orig = vals[i]
        vals[i] = orig + h
        up = fn(vals)
        vals[i] = orig - h
        down = fn(vals)
        vals[i] = orig
        grad[i] = (up - down) / (2.0 * h)
    return GradientVector(grad)


# ---------------------------------------------------------------------------
# Single-component fast path (used by the Monte Carlo estimators)


def component_and_loss(
    cost: CostFunction, layout: CircuitLayout, theta, param_index: int
) -> tuple[float, float, np.ndarray]:
    """One gradient component plus the loss, at ~2 gate sweeps of work.

    Returns (component, loss, output amplitudes from |0>). Restricted to
    "raw" and "abs" costs; dataset costs need the full gradient.
    """
    if cost.kind == "compressor":
        raise ConfigurationError("single-component path supports raw/abs costs only")
    vals = theta_values(theta)
    if not 0 <= param_index < layout.n_params:
        raise ValueError(f"parameter index {param_index} outside 0..{layout.n_params - 1}")
    n = layout.register.n
    g_target, m = divmod(param_index, PARAMS_PER_GATE)
    mats = circuit_gate_matrices(layout, vals)
    lefts = layout.pair_lefts

    ket = zero_state(n).amplitudes
    snapshot = None
    for g in range(layout.gate_count):
        if g == g_target:
            snapshot = ket
        ket = apply_gate_raw(ket, n, mats[g], lefts[g])
    psi = ket

    bra = apply_observable_raw(psi, n, cost.observable)
    e = float(np.vdot(psi, bra).real)
    for g in range(layout.gate_count - 1, g_target, -1):
        bra = apply_gate_raw(bra, n, mats[g].T, lefts[g])

    du = _gate_derivative(vals[g_target * PARAMS_PER_GATE:(g_target + 1) * PARAMS_PER_GATE], m)
    moved = apply_gate_raw(snapshot, n, du, lefts[g_target])
    raw_component = 2.0 * float(np.vdot(bra, moved).real)

    if cost.kind == "abs":
        return _sign(e) * raw_component, abs(e), psi
    return raw_component, e, psi


# ---------------------------------------------------------------------------
# Monte Carlo variance estimation


def first_responsive_param(layout: CircuitLayout) -> int:
    """Default component for variance experiments.

    The first three rotations of every gate act in planes that leave the
    two-qubit |00> component fixed, so for the first gate (whose input is
    exactly |00>) those angles have identically zero derivative. The first
    angle that can respond at the zero input is the |00>-plane rotation of
    the first gate.
    """
    for m, plane in enumerate(ROTATION_PLANES):
        if 0 in plane:
            return layout.gates[0].param_offset + m
    raise AssertionError("no rotation touches the |00> plane")


def sample_gradient_matrix(
    layout: CircuitLayout,
    cost: CostFunction,
    scheme,
    n_samples: int,
    seed: int,
    *,
    entropy_fn=None,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Full gradient per sample, (n_samples, n_params); used for pooled
    (all-components) variance statistics. Raw/abs costs only."""
    if cost.kind == "compressor":
        raise ConfigurationError("gradient sampling supports raw/abs costs only")
    grads = np.empty((n_samples, layout.n_params))
    entropies = np.empty(n_samples) if entropy_fn is not None else None
    amps0 = zero_state(layout.register.n).amplitudes

    def run(idx: int):
        sub = seeding.substream_seed(seed, "mc-sample", idx)
        vals = init_params(layout, scheme, sub).values
        g, e, psi = _grad_expectation_raw(layout, vals, amps0.copy(), cost.observable)
        grads[idx] = _sign(e) * g if cost.kind == "abs" else g
        if entropies is not None:
            entropies[idx] = entropy_fn(psi)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(n_samples)))
    else:
        for i in range(n_samples):
            run(i)
    return grads, entropies


def sample_components(
    layout: CircuitLayout,
    cost: CostFunction,
    scheme,
    param_index: int,
    n_samples: int,
    seed: int,
    *,
    transform=None,
    entropy_fn=None,
    frozen_entangling=None,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Draw ``n_samples`` parameter vectors and evaluate one gradient
    component for each.

    Per-sample randomness comes from a stream keyed by (seed, sample index),
    so results do not depend on the thread count. ``transform(theta,
    component, loss)`` maps the plain component to e.g. its regularized
    counterpart. ``entropy_fn(output_amps)`` optionally records a per-sample
    output-state diagnostic. ``frozen_entangling`` holds entangling angles
    at the given vector's values while the scheme redraws the rest.
    """
    from .circuit import init_params  # local import to keep module load light

    components = np.empty(n_samples)
    entropies = np.empty(n_samples) if entropy_fn is not None else None
    mask = layout.entangling_param_mask
    frozen = None
    if frozen_entangling is not None:
        frozen = theta_values(frozen_entangling)[mask]

    def run(idx: int):
        sub = seeding.substream_seed(seed, "mc-sample", idx)
        vals = init_params(layout, scheme, sub).values
        if frozen is not None:
            vals[mask] = frozen
        comp, loss, psi = component_and_loss(cost, layout, vals, param_index)
        if transform is not None:
            comp = transform(vals, comp, loss)
        components[idx] = comp
        if entropies is not None:
            entropies[idx] = entropy_fn(psi)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(n_samples)))
    else:
        for i in range(n_samples):
            run(i)
    return components, entropies


def jackknife_variance_stderr(x: np.ndarray) -> float:
    """Jackknife standard error of the unbiased sample variance."""
    n = len(x)
    if n < 3:
        return float("inf")
    s1 = x.sum()
    s2 = (x * x).sum()
    loo_s1 = s1 - x
    loo_s2 = s2 - x * x
    loo_var = (loo_s2 - loo_s1 * loo_s1 / (n - 1)) / (n - 2)
    return float(np.sqrt((n - 1) / n * np.sum((loo_var - loo_var.mean()) ** 2)))


def grad_variance_estimate(
    layout: CircuitLayout,
    cost: CostFunction,
    scheme,
    param_index: int,
    n_samples: int,
    seed: int,
    *,
    transform=None,
    frozen_entangling=None,
    threads: int = 1,
) -> VarianceReport:
    """Unbiased mean/variance of one gradient component over random draws,
    with a jackknife standard error for principled tolerances."""
    comps, _ = sample_components(
        layout, cost, scheme, param_index, n_samples, seed,
        transform=transform, frozen_entangling=frozen_entangling, threads=threads,
    )
    return VarianceReport(
        param_index=param_index,
        n_samples=n_samples,
        mean=float(comps.mean()),
        variance=float(comps.var(ddof=1)),
        variance_stderr=jackknife_variance_stderr(comps),
    )
