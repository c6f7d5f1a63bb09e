"""Optimizer, gradient augmentations, training loop, and pre-training."""

import numpy as np
import pytest

from bplab.circuit import Random, RegisterSpec, build_layout, init_params
from bplab.entanglement import collective_entropy
from bplab.errors import ConfigurationError, NumericError
from bplab.gradients import grad_cost, sample_components
from bplab.observables import CostFunction, pauli_string
from bplab.training import (
    AMSGradConfig,
    AMSGradState,
    LangevinConfig,
    RegularizationConfig,
    TrainReport,
    amsgrad_step,
    langevin_gradient,
    langevin_component_transform,
    pretrain_minimize_sc,
    regularized_component_transform,
    regularized_gradient,
    train,
)


class TestAMSGrad:
    def test_zero_gradient_keeps_theta(self):
        state = AMSGradState.fresh(4)
        new_state, theta = amsgrad_step(state, np.ones(4), np.zeros(4))
        np.testing.assert_array_equal(theta, np.ones(4))
        assert new_state.step == 1

    def test_single_step_hand_computed(self):
        cfg = AMSGradConfig(learning_rate=0.01, beta1=0.9, beta2=0.999, eps=1e-8)
        state = AMSGradState.fresh(1, cfg)
        _, theta = amsgrad_step(state, np.zeros(1), np.array([0.5]))
        m = 0.1 * 0.5
        v = 0.001 * 0.25
        expected = -0.01 * m / (np.sqrt(v) + 1e-8)
        assert theta[0] == pytest.approx(expected, rel=1e-12)
        assert theta[0] == pytest.approx(-0.0316227, abs=1e-6)

    def test_v_hat_never_decreases(self, rng):
        state = AMSGradState.fresh(6)
        theta = np.zeros(6)
        prev = state.v_hat.copy()
        for _ in range(100):
            state, theta = amsgrad_step(state, theta, rng.normal(size=6))
            assert np.all(state.v_hat >= prev - 1e-15)
            prev = state.v_hat.copy()

    def test_constant_gradient_moves_monotonically(self):
        state = AMSGradState.fresh(1)
        theta = np.zeros(1)
        history = [0.0]
        for _ in range(50):
            state, theta = amsgrad_step(state, theta, np.array([0.3]))
            history.append(theta[0])
        assert all(b < a for a, b in zip(history, history[1:]))

    def test_nonfinite_gradient_rejected(self):
        with pytest.raises(NumericError):
            amsgrad_step(AMSGradState.fresh(1), np.zeros(1), np.array([np.inf]))


class TestRegularizedGradient:
    def test_lambda_zero_is_plain_gradient(self):
        layout = build_layout(RegisterSpec(4, 0, 2), 4)
        theta = init_params(layout, Random(), 3)
        cost = CostFunction.raw(pauli_string("Z1 Z2"))
        reg, penalty = regularized_gradient(layout, theta, cost, RegularizationConfig(0.0))
        np.testing.assert_array_equal(reg.values, grad_cost(cost, layout, theta).values)
        assert penalty == 0.0

    def test_entangling_term_formula(self):
        layout = build_layout(RegisterSpec(4, 0, 2), 4)
        cfg = RegularizationConfig(1.0)
        idx = layout.entangling_param_indices[0]
        transform = regularized_component_transform(layout, cfg, idx)
        vals = np.zeros(layout.n_params)
        vals[idx] = np.pi / 2
        # base gradient 0, loss 1: only the additive term survives
        assert transform(vals, 0.0, 1.0) == pytest.approx(np.cos(np.pi / 2), abs=1e-12)
        vals[idx] = np.pi / 4
        assert transform(vals, 0.0, 1.0) == pytest.approx(np.sqrt(2) / 2, abs=1e-12)

    def test_multiplicative_factor_uniform_over_components(self):
        layout = build_layout(RegisterSpec(5, 0, 2), 6)
        theta = init_params(layout, Random(), 6)
        cost = CostFunction.raw(pauli_string("Z1 Z2"))
        plain = grad_cost(cost, layout, theta).values
        reg, _ = regularized_gradient(layout, theta, cost, RegularizationConfig(0.3))
        non_ent = ~layout.entangling_param_mask
        live = non_ent & (np.abs(plain) > 1e-9)
        ratios = reg.values[live] / plain[live]
        np.testing.assert_allclose(ratios, ratios[0], rtol=1e-9)

    def test_adaptive_schedule_relaxes(self):
        cfg = RegularizationConfig(0.4, schedule="adaptive")
        assert cfg.effective_lambda(1.0, 1.0) == pytest.approx(0.4)
        assert cfg.effective_lambda(0.25, 1.0) == pytest.approx(0.1)
        assert cfg.effective_lambda(2.0, 1.0) == pytest.approx(0.4)

    def test_requires_entangling_set(self):
        layout = build_layout(RegisterSpec(2, 0, 2), 2)
        cost = CostFunction.raw(pauli_string("Z1 Z2"))
        with pytest.raises(ConfigurationError):
            regularized_gradient(layout, np.zeros(layout.n_params), cost,
                                 RegularizationConfig(0.1))


class TestLangevinGradient:
    def test_lambda_zero_is_plain_gradient(self):
        layout = build_layout(RegisterSpec(3, 0, 2), 4)
        theta = init_params(layout, Random(), 2)
        cost = CostFunction.raw(pauli_string("Z1 Z2"))
        lang = langevin_gradient(layout, theta, cost, LangevinConfig(0.0, (0, 1)))
        np.testing.assert_array_equal(lang.values, grad_cost(cost, layout, theta).values)

    def test_subset_term_formula(self):
        cfg = LangevinConfig(0.25, (4,))
        transform = langevin_component_transform(cfg, 4)
        vals = np.zeros(10)
        vals[4] = np.pi
        # zero base gradient, loss 1: component = lambda * sign(pi) * 1
        assert transform(vals, 0.0, 1.0) == pytest.approx(0.25 * (1 + 0.25 * np.pi) * 0 + 0.25, abs=1e-12)

    def test_angles_wrapped(self):
        cfg = LangevinConfig(0.1, (0,))
        transform = langevin_component_transform(cfg, 0)
        a = transform(np.array([0.5]), 1.0, 1.0)
        b = transform(np.array([0.5 + 2 * np.pi]), 1.0, 1.0)
        assert a == pytest.approx(b, abs=1e-12)

    def test_subset_sampling(self):
        layout = build_layout(RegisterSpec(4, 0, 2), 5)
        cfg = LangevinConfig.sample_subset(layout, 0.1, size=7, seed=3, include=(2,))
        assert len(cfg.subset) == 7 and 2 in cfg.subset
        again = LangevinConfig.sample_subset(layout, 0.1, size=7, seed=3, include=(2,))
        assert cfg.subset == again.subset

    def test_out_of_range_subset(self):
        layout = build_layout(RegisterSpec(3, 0, 2), 2)
        cost = CostFunction.raw(pauli_string("Z1 Z2"))
        with pytest.raises(ValueError):
            langevin_gradient(layout, np.zeros(layout.n_params), cost,
                              LangevinConfig(0.1, (10_000,)))


class TestAugmentationVariance:
    def test_augmentations_do_not_shrink_variance(self):
        # 99% intervals: augmented variance is not below the plain variance
        layout = build_layout(RegisterSpec(4, 0, 2), 8)
        cost = CostFunction.raw(pauli_string("Z1 Z2"))
        from bplab.gradients import jackknife_variance_stderr

        for param in (3, layout.entangling_param_indices[0]):
            plain, _ = sample_components(layout, cost, Random(), param, 600, 77)
            reg_tr = regularized_component_transform(layout, RegularizationConfig(0.2), param)
            reg, _ = sample_components(layout, cost, Random(), param, 600, 77, transform=reg_tr)
            lang_cfg = LangevinConfig.sample_subset(layout, 0.05, size=10, seed=1, include=(param,))
            lang_tr = langevin_component_transform(lang_cfg, param)
            lang, _ = sample_components(layout, cost, Random(), param, 600, 77, transform=lang_tr)
            vp = plain.var(ddof=1)
            se = jackknife_variance_stderr(plain)
            assert reg.var(ddof=1) >= vp - 2.58 * se
            assert lang.var(ddof=1) >= vp - 2.58 * se


class TestTrain:
    def test_early_stop_when_already_optimal(self):
        layout = build_layout(RegisterSpec(3, 0, 3), 2)
        cost = CostFunction.raw(pauli_string("Z1 Z2 Z3"))
        report = train(layout, np.zeros(layout.n_params), cost, epochs=50,
                       loss_target=1.5)
        assert len(report.records) == 1 and report.records[0].epoch == 0

    def test_eigenstate_objective_trains(self):
        # minimize <Z1 Z2 Z3> toward its -1 eigenvalue on a 3-qubit chain
        layout = build_layout(RegisterSpec(3, 0, 3), 8)
        cost = CostFunction.raw(pauli_string("Z1 Z2 Z3"))
        successes = 0
        for seed in range(5):
            theta0 = init_params(layout, Random(), seed)
            report = train(layout, theta0, cost, epochs=2000, loss_target=-0.99)
            successes += report.records[-1].loss < -0.99
        assert successes >= 4

    def test_report_round_trip(self):
        layout = build_layout(RegisterSpec(3, 0, 2), 3)
        cost = CostFunction.absolute(pauli_string("Z1 Z2"))
        report = train(layout, init_params(layout, Random(), 1), cost, epochs=5)
        clone = TrainReport.from_json(report.to_json())
        assert clone.records == report.records
        np.testing.assert_array_equal(clone.final_theta, report.final_theta)
        assert clone.config == report.config

    def test_csv_columns(self, tmp_path):
        layout = build_layout(RegisterSpec(3, 0, 2), 3)
        cost = CostFunction.absolute(pauli_string("Z1 Z2"))
        report = train(layout, init_params(layout, Random(), 1), cost, epochs=3)
        path = tmp_path / "trace.csv"
        report.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,loss,S,mixing,grad_norm"
        assert len(lines) == 1 + len(report.records)

    def test_epochs_contiguous_from_zero(self):
        layout = build_layout(RegisterSpec(3, 0, 2), 3)
        cost = CostFunction.absolute(pauli_string("Z1 Z2"))
        report = train(layout, init_params(layout, Random(), 2), cost, epochs=7)
        assert [r.epoch for r in report.records] == list(range(len(report.records)))

    def test_unknown_mode_rejected(self):
        layout = build_layout(RegisterSpec(3, 0, 2), 2)
        cost = CostFunction.raw(pauli_string("Z1 Z2"))
        with pytest.raises(ConfigurationError):
            train(layout, np.zeros(layout.n_params), cost, epochs=2, mode="annealed")


class TestPretrain:
    def test_partitioned_start_stays_put(self):
        from bplab.circuit import Partitioned

        layout = build_layout(RegisterSpec(3, 0, 2), 6)
        theta0 = init_params(layout, Partitioned(), 4)
        result = pretrain_minimize_sc(layout, theta0, 10)
        assert all(r.collective_entropy < 1e-6 for r in result.records)
        assert collective_entropy(layout, result.theta) < 1e-6

    def test_objective_is_collective_not_output_entropy(self):
        # a |00>-plane boundary rotation leaves the |0> output a product
        # state (output entropy 0) while the unitary itself entangles;
        # pretraining must still see and reduce the collective entropy
        from bplab.entanglement import Partition, bipartite_entropy
        from bplab.circuit import apply_circuit
        from bplab.qcore import zero_state

        layout = build_layout(RegisterSpec(2, 0, 1), 1)
        theta0 = np.array([0.0, 0.0, 0.0, np.pi / 4, 0.0, 0.0])
        out = apply_circuit(layout, theta0, zero_state(2))
        assert bipartite_entropy(out, Partition.of((0,), 2)) < 1e-9
        s0 = collective_entropy(layout, theta0)
        assert s0 > 0.3
        result = pretrain_minimize_sc(layout, theta0, 120, AMSGradConfig(0.05))
        for step in (0, 3, 7):
            assert result.records[step].collective_entropy == pytest.approx(
                collective_entropy(layout, _last_theta(layout, theta0, step)), abs=1e-9
            )
        assert collective_entropy(layout, result.theta) < 0.5 * s0

    def test_trace_and_best_theta(self):
        layout = build_layout(RegisterSpec(3, 0, 2), 8)
        theta0 = init_params(layout, Random(), 9)
        result = pretrain_minimize_sc(layout, theta0, 60, var_every=59, var_samples=50)
        assert result.records[0].collective_entropy >= collective_entropy(layout, result.theta) - 1e-12
        estimates = [r.variance_estimate for r in result.records if r.variance_estimate is not None]
        assert len(estimates) == 2
        assert all(e >= 0 for e in estimates)

    def test_size_guard(self):
        layout = build_layout(RegisterSpec(8, 0, 2), 2)
        with pytest.raises(ConfigurationError):
            pretrain_minimize_sc(layout, np.zeros(layout.n_params), 2)


def _last_theta(layout, theta0, steps):
    """Independent replay of the pretraining updates (angles after `steps`)."""
    from bplab.circuit import theta_values
    from bplab.entanglement import collective_entropy_batch
    from bplab.training import AMSGradConfig, AMSGradState, amsgrad_step

    vals = theta_values(theta0).copy()
    state = AMSGradState.fresh(layout.n_params, AMSGradConfig(0.05))
    n_params = layout.n_params
    rows = np.arange(n_params)
    for _ in range(steps):
        batch = np.empty((2 * n_params + 1, n_params))
        batch[:] = vals
        batch[1 + rows, rows] += 1e-4
        batch[n_params + 1 + rows, rows] -= 1e-4
        es = collective_entropy_batch(layout, batch)
        grad = (es[1:n_params + 1] - es[n_params + 1:]) / 2e-4
        state, vals = amsgrad_step(state, vals, grad)
    return vals
