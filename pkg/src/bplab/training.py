"""Optimization stack: AMSGrad updates, entanglement regularization,
Langevin-noise gradients, the training loop with entropy logging, and
collective-entropy-minimizing pre-training."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import seeding
from .circuit import (
    CircuitLayout,
    Random,
    apply_circuit_raw,
    circuit_gate_matrices,
    theta_values,
)
from .entanglement import (
    collective_entropy_batch,
    default_partition,
    mixing_metric,
    state_entropy_raw,
)
from .errors import ConfigurationError, NumericError
from .gradients import (
    GradientVector,
    cost_and_grad,
    first_responsive_param,
    grad_variance_estimate,
)
from .observables import CostFunction, ObservableSum, PauliString
from .qcore import zero_state


@dataclass(frozen=True)
class AMSGradConfig:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass(frozen=True)
class AMSGradState:
    """Moment accumulators; AMSGrad convention, no bias correction."""

    m: np.ndarray
    v: np.ndarray
    v_hat: np.ndarray
    step: int
    config: AMSGradConfig

    @classmethod
    def fresh(cls, n_params: int, config: AMSGradConfig | None = None) -> "AMSGradState":
        config = config or AMSGradConfig()
        zeros = np.zeros(n_params)
        return cls(zeros, zeros.copy(), zeros.copy(), 0, config)


def amsgrad_step(state: AMSGradState, theta, grad) -> tuple[AMSGradState, np.ndarray]:
    """One AMSGrad update; returns the new optimizer state and parameters."""
    vals = theta_values(theta)
    g = grad.values if isinstance(grad, GradientVector) else np.asarray(grad, dtype=float)
    if g.shape != vals.shape:
        raise ValueError(f"gradient shape {g.shape} != parameter shape {vals.shape}")
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite gradient")
    cfg = state.config
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * g * g
    v_hat = np.maximum(state.v_hat, v)
    new_theta = vals - cfg.learning_rate * m / (np.sqrt(v_hat) + cfg.eps)
    return AMSGradState(m, v, v_hat, state.step + 1, cfg), new_theta


# ---------------------------------------------------------------------------
# Gradient augmentations


@dataclass(frozen=True)
class RegularizationConfig:
    """Penalty scale for entangling-angle magnitudes.

    With the adaptive schedule the effective scale is
    lambda0 * max(floor, min(1, loss / loss_ref)), relaxing the penalty as
    the loss approaches zero.
    """

    lambda0: float
    schedule: str = "constant"
    adaptive_floor: float = 0.0

    def __post_init__(self):
        if self.lambda0 < 0:
            raise ConfigurationError("lambda0 must be >= 0")
        if self.schedule not in ("constant", "adaptive"):
            raise ConfigurationError(f"unknown schedule {self.schedule!r}")

    def effective_lambda(self, loss: float, loss_ref: float | None) -> float:
        if self.schedule == "constant" or loss_ref is None or loss_ref == 0.0:
            return self.lambda0
        ratio = min(1.0, abs(loss) / abs(loss_ref))
        return self.lambda0 * max(self.adaptive_floor, ratio)


@dataclass(frozen=True)
class LangevinConfig:
    """Noise scale and the parameter subset carrying the noise term."""

    lam: float
    subset: tuple[int, ...]

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError("lambda must be >= 0")
        object.__setattr__(self, "subset", tuple(sorted(set(self.subset))))

    @classmethod
    def sample_subset(
        cls, layout: CircuitLayout, lam: float, size: int | None = None,
        seed: int = 0, include: tuple[int, ...] = (),
    ) -> "LangevinConfig":
        """Uniformly sample a subset (default 10% of parameters), optionally
        forcing specific indices in."""
        n_params = layout.n_params
        if size is None:
            size = max(1, n_params // 10)
        if size > n_params:
            raise ConfigurationError(f"subset size {size} exceeds {n_params} parameters")
        rng = seeding.stream(seed, "langevin-subset")
        chosen = list(include)
        pool = [i for i in range(n_params) if i not in chosen]
        extra = rng.choice(len(pool), size=size - len(chosen), replace=False)
        chosen.extend(pool[i] for i in sorted(extra))
        return cls(lam, tuple(chosen))


def _regularize(vals, grad, loss, lam, ent_indices):
    sins = np.sin(vals[ent_indices])
    sin_sum = float(np.abs(sins).sum())
    out = (1.0 + lam * sin_sum) * grad
    out[ent_indices] += lam * np.cos(vals[ent_indices]) * np.sign(sins) * loss
    return out, lam * sin_sum * loss


def regularized_gradient(
    layout: CircuitLayout, theta, cost: CostFunction, cfg: RegularizationConfig,
    loss_ref: float | None = None,
) -> tuple[GradientVector, float]:
    """Gradient of the entanglement-regularized cost, plus the penalty value."""
    vals = theta_values(theta)
    ent = list(layout.entangling_param_indices)
    if cfg.lambda0 > 0 and not ent:
        raise ConfigurationError("regularization needs a non-empty entangling set")
    loss, grad = cost_and_grad(cost, layout, vals)
    if cfg.lambda0 == 0:
        return GradientVector(grad), 0.0
    lam = cfg.effective_lambda(loss, loss_ref)
    out, penalty = _regularize(vals, grad, loss, lam, ent)
    return GradientVector(out), penalty


def _wrap_angles(x: np.ndarray) -> np.ndarray:
    return np.mod(x, 2.0 * np.pi)


def _langevin(vals, grad, loss, cfg: LangevinConfig):
    subset = list(cfg.subset)
    wrapped = _wrap_angles(vals[subset])
    out = (1.0 + cfg.lam * float(wrapped.sum())) * grad
    out[subset] += cfg.lam * np.sign(wrapped) * loss
    return out


def langevin_gradient(
    layout: CircuitLayout, theta, cost: CostFunction, cfg: LangevinConfig
) -> GradientVector:
    """Gradient of the Langevin-noise-augmented objective.

    Subset angles enter through their representative in [0, 2pi), keeping
    the noise term bounded.
    """
    vals = theta_values(theta)
    if cfg.subset and max(cfg.subset) >= layout.n_params:
        raise ValueError("subset index outside the parameter vector")
    loss, grad = cost_and_grad(cost, layout, vals)
    if cfg.lam == 0:
        return GradientVector(grad)
    return GradientVector(_langevin(vals, grad, loss, cfg))


def regularized_component_transform(
    layout: CircuitLayout, cfg: RegularizationConfig, param_index: int,
    loss_ref: float | None = None,
):
    """Single-component version of the regularized gradient, for Monte Carlo
    variance estimation."""
    ent = np.asarray(layout.entangling_param_indices, dtype=int)
    is_entangling = bool(layout.entangling_param_mask[param_index])

    def transform(vals, comp, loss):
        lam = cfg.effective_lambda(loss, loss_ref)
        sins = np.sin(vals[ent])
        out = (1.0 + lam * np.abs(sins).sum()) * comp
        if is_entangling:
            theta_i = vals[param_index]
            out += lam * np.cos(theta_i) * np.sign(np.sin(theta_i)) * loss
        return out

    return transform


def langevin_component_transform(cfg: LangevinConfig, param_index: int):
    subset = np.asarray(cfg.subset, dtype=int)
    in_subset = param_index in cfg.subset

    def transform(vals, comp, loss):
        wrapped = _wrap_angles(vals[subset])
        out = (1.0 + cfg.lam * wrapped.sum()) * comp
        if in_subset:
            out += cfg.lam * np.sign(_wrap_angles(vals[param_index:param_index + 1])[0]) * loss
        return out

    return transform


# ---------------------------------------------------------------------------
# Training loop


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    entropy: float
    mixing: float
    grad_norm: float


@dataclass(frozen=True)
class TrainReport:
    records: tuple[EpochRecord, ...]
    final_theta: np.ndarray
    config: dict
    wall_time: float

    def final_loss(self) -> float:
        return self.records[-1].loss

    def to_csv(self, path) -> None:
        lines = ["epoch,loss,S,mixing,grad_norm"]
        for r in self.records:
            lines.append(
                f"{r.epoch},{r.loss:.17g},{r.entropy:.17g},{r.mixing:.17g},{r.grad_norm:.17g}"
            )
        Path(path).write_text("\n".join(lines) + "\n")

    def to_json(self) -> str:
        return json.dumps({
            "config": self.config,
            "wall_time": self.wall_time,
            "final_theta": self.final_theta.tolist(),
            "records": [
                [r.epoch, r.loss, r.entropy, r.mixing, r.grad_norm] for r in self.records
            ],
        })

    @classmethod
    def from_json(cls, text: str) -> "TrainReport":
        doc = json.loads(text)
        records = tuple(
            EpochRecord(int(e), loss, s, mix, g) for e, loss, s, mix, g in doc["records"]
        )
        return cls(records, np.array(doc["final_theta"]), doc["config"], doc["wall_time"])


def _mode_gradient(mode, layout, vals, cost, reg, lang, loss, grad, loss_ref):
    if mode == "plain":
        return grad
    if mode == "regularized":
        if reg is None:
            raise ConfigurationError("regularized mode needs a RegularizationConfig")
        if reg.lambda0 == 0:
            return grad
        lam = reg.effective_lambda(loss, loss_ref)
        out, _ = _regularize(vals, grad, loss, lam, list(layout.entangling_param_indices))
        return out
    if mode == "langevin":
        if lang is None:
            raise ConfigurationError("langevin mode needs a LangevinConfig")
        if lang.lam == 0:
            return grad
        return _langevin(vals, grad, loss, lang)
    raise ConfigurationError(f"unknown gradient mode {mode!r}")


def train(
    layout: CircuitLayout,
    theta0,
    cost: CostFunction,
    *,
    optimizer: AMSGradConfig | None = None,
    mode: str = "plain",
    epochs: int,
    regularization: RegularizationConfig | None = None,
    langevin: LangevinConfig | None = None,
    loss_target: float | None = None,
    grad_tol: float = 1e-12,
    config_echo: dict | None = None,
) -> TrainReport:
    """AMSGrad training with per-epoch logging of loss, the output-state
    bipartite entropy (cost-aligned default partition, computed on the
    |0> input), the mixing metric, and the update-gradient norm.

    Stops early when loss < loss_target or the gradient norm drops below
    grad_tol. Records are the state at the start of each epoch.
    """
    if epochs < 1:
        raise ConfigurationError("epochs must be >= 1")
    optimizer = optimizer or AMSGradConfig()
    vals = theta_values(theta0).copy()
    reg = layout.register
    partition = default_partition(reg) if reg.n >= 3 else None
    ent_indices = layout.entangling_param_indices
    opt_state = AMSGradState.fresh(layout.n_params, optimizer)

    start = time.perf_counter()
    records = []
    loss_ref = None
    amps0 = zero_state(reg.n).amplitudes
    for epoch in range(epochs):
        loss, grad = cost_and_grad(cost, layout, vals)
        if loss_ref is None:
            loss_ref = loss
        update = _mode_gradient(
            mode, layout, vals, cost, regularization, langevin, loss, grad, loss_ref
        )
        grad_norm = float(np.linalg.norm(update))
        if partition is not None:
            psi = apply_circuit_raw(layout, circuit_gate_matrices(layout, vals), amps0.copy())
            entropy = state_entropy_raw(psi, reg.n, partition.alpha)
        else:
            entropy = 0.0
        mixing = mixing_metric(vals, ent_indices) if ent_indices else 0.0
        records.append(EpochRecord(epoch, loss, entropy, mixing, grad_norm))
        if loss_target is not None and loss < loss_target:
            break
        if grad_norm < grad_tol:
            break
        opt_state, vals = amsgrad_step(opt_state, vals, update)

    config = dict(config_echo or {})
    config.setdefault("cost", cost.describe())
    config.setdefault("mode", mode)
    config.setdefault("epochs", epochs)
    config.setdefault("learning_rate", optimizer.learning_rate)
    return TrainReport(tuple(records), vals, config, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# Collective-entropy pre-training (meta-learning of initializations)


@dataclass(frozen=True)
class PretrainRecord:
    step: int
    collective_entropy: float
    mixing: float
    variance_estimate: float | None


@dataclass(frozen=True)
class PretrainResult:
    theta: np.ndarray
    records: tuple[PretrainRecord, ...]


def _default_variance_cost(layout: CircuitLayout) -> CostFunction:
    factors = tuple((q, "z") for q in layout.register.cost_qubits)
    return CostFunction.raw(ObservableSum((PauliString(factors),)))


def pretrain_minimize_sc(
    layout: CircuitLayout,
    theta0,
    steps: int,
    optimizer: AMSGradConfig | None = None,
    *,
    fd_step: float = 1e-4,
    var_every: int | None = None,
    var_samples: int = 200,
    var_seed: int = 0,
    var_param_index: int | None = None,
    var_cost: CostFunction | None = None,
) -> PretrainResult:
    """Minimize the collective entanglement of the circuit unitary by
    central finite differences over all angles with AMSGrad updates.

    The objective is deliberately the Choi-state collective entropy, never
    the output-state entropy: the trace records it at every step together
    with the mixing metric. When ``var_every`` is set, the variance of one
    gradient component is re-estimated every that many steps (and at the
    final step) by redrawing all non-entangling angles uniformly while the
    entangling angles stay at their current values.

    Returns the lowest-entropy parameters seen, so the final collective
    entropy never exceeds the initial one.
    """
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    optimizer = optimizer or AMSGradConfig()
    vals = theta_values(theta0).copy()
    n_params = layout.n_params
    opt_state = AMSGradState.fresh(n_params, optimizer)
    ent_indices = layout.entangling_param_indices
    cost = var_cost or _default_variance_cost(layout)
    if var_param_index is None:
        var_param_index = first_responsive_param(layout)

    def variance_at(theta_vals, index):
        report = grad_variance_estimate(
            layout, cost, Random(), var_param_index, var_samples,
            seeding.substream_seed(var_seed, "pretrain-variance", index),
            frozen_entangling=theta_vals,
        )
        return report.variance

    eye_rows = np.arange(n_params)
    records = []
    best_sc = np.inf
    best_vals = vals.copy()
    for step in range(steps):
        batch = np.empty((2 * n_params + 1, n_params))
        batch[0] = vals
        batch[1:n_params + 1] = vals
        batch[1 + eye_rows, eye_rows] += fd_step
        batch[n_params + 1:] = vals
        batch[n_params + 1 + eye_rows, eye_rows] -= fd_step
        entropies = collective_entropy_batch(layout, batch)
        s_c = float(entropies[0])
        grad = (entropies[1:n_params + 1] - entropies[n_params + 1:]) / (2.0 * fd_step)

        if s_c < best_sc:
            best_sc = s_c
            best_vals = vals.copy()
        estimate = None
        if var_every is not None and (step % var_every == 0 or step == steps - 1):
            estimate = variance_at(vals, step)
        mixing = mixing_metric(vals, ent_indices) if ent_indices else 0.0
        records.append(PretrainRecord(step, s_c, mixing, estimate))

        opt_state, vals = amsgrad_step(opt_state, vals, grad)

    return PretrainResult(best_vals, tuple(records))
