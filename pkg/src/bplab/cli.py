"""Named, seeded experiment runners.

Each subcommand merges its built-in desk-scale defaults (or the full-scale
defaults behind --full) with an optional JSON config, runs the experiment,
and writes a CSV plus a JSON metadata sidecar carrying the full resolved
config, the master seed, and the package version, so every run is
reproducible. Floats are printed with 17 significant digits and all
per-row/per-sample randomness is derived from the master seed, so identical
config and seed give byte-identical CSVs regardless of the thread count.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path


from . import __version__, seeding
from .circuit import (
    CircuitLayout,
    HardLimit,
    Partitioned,
    Random,
    RegisterSpec,
    build_layout,
    init_params,
)
from .entanglement import Partition, default_partition, state_entropy_raw
from .errors import ConfigurationError
from .gradients import (
    first_responsive_param,
    jackknife_variance_stderr,
    sample_components,
    sample_gradient_matrix,
)
from .groundstates import load_dataset, make_compressor_dataset, save_dataset
from .observables import CostFunction, pauli_string, x_magnetization
from .training import (
    AMSGradConfig,
    LangevinConfig,
    RegularizationConfig,
    pretrain_minimize_sc,
    train,
)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else _fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_sidecar(path: Path, command: str, config: dict, seed: int, extra: dict | None = None) -> None:
    doc = {
        "command": command,
        "package": "bplab",
        "version": __version__,
        "seed": seed,
        "config": config,
        "distribution_tags": {
            "angles": "uniform[0, 2pi)",
            "rng": "Philox 4x64 streams keyed by (seed, label, index)",
        },
    }
    if extra:
        doc.update(extra)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


class RunLog:
    """Warning collector: stderr plus a run.log file in the output dir."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / "run.log"
        self.lines: list[str] = []

    def warn(self, message: str) -> None:
        self.lines.append(f"WARNING {message}")
        print(f"warning: {message}", file=sys.stderr)

    def info(self, message: str) -> None:
        self.lines.append(message)

    def flush(self) -> None:
        self.path.write_text("\n".join(self.lines) + ("\n" if self.lines else ""))


def _merge(defaults: dict, override: dict | None) -> dict:
    cfg = copy.deepcopy(defaults)
    if override:
        for key, value in override.items():
            cfg[key] = value
    return cfg


def parse_scheme(spec):
    """Scheme entries in configs: "random", "partitioned", or
    {"hardlimit": {"entangling_layers": k, "placement": "last"}}."""
    if isinstance(spec, str):
        if spec == "random":
            return Random()
        if spec == "partitioned":
            return Partitioned()
        raise ConfigurationError(f"unknown scheme {spec!r}")
    if isinstance(spec, dict) and "hardlimit" in spec:
        body = spec["hardlimit"]
        return HardLimit(int(body["entangling_layers"]), body.get("placement", "last"))
    raise ConfigurationError(f"unknown scheme entry {spec!r}")


def parse_cost(spec: str, register: RegisterSpec, dataset_path=None) -> CostFunction:
    """Cost literals: "raw:Z1 Z2", "abs:Z1 Z2 Z3", "compressor" (with a
    dataset file)."""
    if spec.startswith("raw:"):
        return CostFunction.raw(pauli_string(spec[4:]))
    if spec.startswith("abs:"):
        return CostFunction.absolute(pauli_string(spec[4:]))
    if spec == "compressor":
        if dataset_path is None:
            raise ConfigurationError("compressor cost needs a dataset file")
        dataset = load_dataset(dataset_path)
        if dataset.n != register.n:
            raise ConfigurationError(
                f"dataset has n={dataset.n}, experiment has n={register.n}"
            )
        return CostFunction.compressor(dataset.samples, x_magnetization(register))
    raise ConfigurationError(f"unknown cost spec {spec!r}")


def _entropy_partition(register: RegisterSpec) -> Partition:
    if register.n >= 3:
        return default_partition(register)
    return Partition.of((0,), register.n)


def _layout_for(n: int, n_cost: int, cost_offset: int, layers: int) -> CircuitLayout:
    return build_layout(RegisterSpec(n, cost_offset, n_cost), layers)


# ---------------------------------------------------------------------------
# variance-sweep


VARIANCE_SWEEP_DEFAULTS = {
    "n": [3, 5, 7],
    "n_C": 2,
    "cost_offset": 0,
    "L": [60],
    "schemes": ["random"],
    "cost": "raw:Z1 Z2",
    "samples": 2000,
    "param_index": "first-responsive",
}

VARIANCE_SWEEP_FULL = {
    **VARIANCE_SWEEP_DEFAULTS,
    "n": [3, 5, 7, 9],
    "L": [10, 20, 40, 80, 120, 160, 200],
    "schemes": ["random", "partitioned"],
    "samples": 10000,
}


def run_variance_sweep(config: dict, out_dir: Path, seed: int, threads: int = 1) -> list[tuple]:
    out_dir.mkdir(parents=True, exist_ok=True)
    log = RunLog(out_dir)
    rows = []
    row_index = 0
    for n in config["n"]:
        for scheme_spec in config["schemes"]:
            for layers in config["L"]:
                row_index += 1
                try:
                    scheme = parse_scheme(scheme_spec)
                    layout = _layout_for(n, config["n_C"], config["cost_offset"], layers)
                    cost = parse_cost(config["cost"], layout.register)
                    if isinstance(scheme, Partitioned) and not layout.entangling_param_indices:
                        raise ConfigurationError("no entangling gates to partition")
                    param = config["param_index"]
                    if param == "first-responsive":
                        param = first_responsive_param(layout)
                    part = _entropy_partition(layout.register)
                    row_seed = seeding.substream_seed(seed, "variance-row", row_index)
                    comps, ents = sample_components(
                        layout, cost, scheme, param, config["samples"], row_seed,
                        entropy_fn=lambda psi: state_entropy_raw(psi, n, part.alpha),
                        threads=threads,
                    )
                    rows.append((
                        n, config["n_C"], scheme_label(scheme_spec), layers,
                        config["samples"], float(comps.mean()),
                        float(comps.var(ddof=1)), jackknife_variance_stderr(comps),
                        float(ents.mean()), row_seed,
                    ))
                except ConfigurationError as exc:
                    log.warn(f"skipping n={n} scheme={scheme_spec} L={layers}: {exc}")
    _write_csv(out_dir / "variance_sweep.csv",
               ["n", "n_C", "scheme", "L", "samples", "mean_O1", "var_O1",
                "var_stderr", "mean_S", "seed"], rows)
    _write_sidecar(out_dir / "variance_sweep.meta.json", "variance-sweep", config, seed,
                   {"param_index_convention":
                    "first angle of the first gate whose rotation moves the zero input",
                    "coefficient_distribution": "angles uniform on [0, 2pi)"})
    log.flush()
    return rows


def scheme_label(spec) -> str:
    return parse_scheme(spec).label


# ---------------------------------------------------------------------------
# variance-vs-entropy


VARIANCE_VS_ENTROPY_DEFAULTS = {
    "n": [5],
    "n_C": 2,
    "cost_offset": 0,
    "L": list(range(2, 41, 2)),
    "cost": "raw:Z1 Z2",
    "samples": 2000,
}

VARIANCE_VS_ENTROPY_FULL = {
    **VARIANCE_VS_ENTROPY_DEFAULTS,
    "n": [3, 5, 7, 9],
    "L": list(range(2, 121, 2)),
    "samples": 5000,
}


def run_variance_vs_entropy(config: dict, out_dir: Path, seed: int, threads: int = 1) -> list[tuple]:
    """Pairs each depth's pooled gradient variance (mean over all components
    of the per-component variance, the subscript-free sigma_O^2) with the
    mean output-state entropy over the same samples."""
    out_dir.mkdir(parents=True, exist_ok=True)
    log = RunLog(out_dir)
    rows = []
    row_index = 0
    for n in config["n"]:
        per_n = []
        for layers in config["L"]:
            row_index += 1
            try:
                layout = _layout_for(n, config["n_C"], config["cost_offset"], layers)
                cost = parse_cost(config["cost"], layout.register)
                part = _entropy_partition(layout.register)
                row_seed = seeding.substream_seed(seed, "entropy-row", row_index)
                grads, ents = sample_gradient_matrix(
                    layout, cost, Random(), config["samples"], row_seed,
                    entropy_fn=lambda psi: state_entropy_raw(psi, n, part.alpha),
                    threads=threads,
                )
                pooled = float(grads.var(axis=0, ddof=1).mean())
                per_n.append((layers, pooled, float(ents.mean())))
            except ConfigurationError as exc:
                log.warn(f"skipping n={n} L={layers}: {exc}")
        if per_n:
            s_0 = per_n[0][2]
            s_plateau = max(s for _, _, s in per_n)
            for layers, pooled, s_mean in per_n:
                rows.append((n, layers, pooled, s_mean, s_0, s_plateau))
    _write_csv(out_dir / "variance_vs_entropy.csv",
               ["n", "L", "var_O1", "S_mean", "S_0", "S_plateau_estimate"], rows)
    _write_sidecar(out_dir / "variance_vs_entropy.meta.json", "variance-vs-entropy",
                   config, seed,
                   {"variance_kind":
                    "pooled: per-component variance averaged over all angles",
                    "plateau_estimator": "max of per-L mean entropies"})
    log.flush()
    return rows


# ---------------------------------------------------------------------------
# train


TRAIN_DEFAULTS = {
    "n": 7,
    "n_C": 3,
    "cost_offset": 0,
    "L": 50,
    "costs": ["raw:Z1 Z2 X3", "abs:Z1 Z2 Z3"],
    "schemes": ["random"],
    "modes": ["plain"],
    "n_seeds": 5,
    "epochs": 1500,
    "learning_rate": 0.01,
    "loss_target": None,
    "threshold": None,
    "lambda0": 0.1,
    "reg_schedule": "adaptive",
    "langevin_lambda": 0.02,
    "langevin_subset": 60,
    "dataset": None,
}

TRAIN_FULL = {
    **TRAIN_DEFAULTS,
    "n": 9,
    "L": 200,
    "epochs": 10000,
    "costs": ["compressor", "abs:Z1 Z2 Z3", "raw:Z1 Z2 Z3"],
    "schemes": ["random", "partitioned"],
    "modes": ["plain", "regularized"],
}


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() else "-" for c in text).strip("-").lower()


def run_train(config: dict, out_dir: Path, seed: int, threads: int = 1) -> list[tuple]:
    out_dir.mkdir(parents=True, exist_ok=True)
    log = RunLog(out_dir)
    layout = _layout_for(config["n"], config["n_C"], config["cost_offset"], config["L"])
    optimizer = AMSGradConfig(learning_rate=config["learning_rate"])
    summary = []
    run_id = 0
    for cost_spec in config["costs"]:
        try:
            cost = parse_cost(cost_spec, layout.register, config.get("dataset"))
        except ConfigurationError as exc:
            log.warn(f"skipping cost {cost_spec!r}: {exc}")
            continue
        for scheme_spec in config["schemes"]:
            scheme = parse_scheme(scheme_spec)
            for mode in config["modes"]:
                reg_cfg = None
                lang_cfg = None
                if mode == "regularized":
                    reg_cfg = RegularizationConfig(config["lambda0"], config["reg_schedule"])
                if mode == "langevin":
                    lang_cfg = LangevinConfig.sample_subset(
                        layout, config["langevin_lambda"],
                        size=config["langevin_subset"],
                        seed=seeding.substream_seed(seed, "langevin-subset"),
                    )
                for seed_index in range(config["n_seeds"]):
                    run_id += 1
                    # identical inits across costs and modes for one
                    # (scheme, seed_index), so substitution runs compare
                    # from the same starting point
                    theta0 = init_params(
                        layout, scheme,
                        seeding.substream_seed(seed, f"train-init/{scheme.label}", seed_index),
                    )
                    report = train(
                        layout, theta0, cost, optimizer=optimizer, mode=mode,
                        epochs=config["epochs"],
                        regularization=reg_cfg, langevin=lang_cfg,
                        loss_target=config["loss_target"],
                        config_echo={"cost": cost_spec, "scheme": scheme.label,
                                     "mode": mode, "seed_index": seed_index,
                                     "master_seed": seed},
                    )
                    name = f"run{run_id:03d}_{_slug(cost_spec)}_{scheme.label}_{mode}_s{seed_index}"
                    report.to_csv(out_dir / f"{name}.csv")
                    (out_dir / f"{name}.json").write_text(report.to_json())
                    threshold = config["threshold"]
                    if isinstance(threshold, dict):
                        threshold = threshold.get(cost_spec)
                    epochs_to = None
                    if threshold is not None:
                        epochs_to = next(
                            (r.epoch for r in report.records if r.loss <= threshold), None
                        )
                    summary.append((
                        name, cost_spec, scheme.label, mode, seed_index,
                        report.records[-1].loss, epochs_to, report.records[-1].entropy,
                    ))
    _write_csv(out_dir / "train_summary.csv",
               ["run", "cost", "scheme", "mode", "seed", "final_loss",
                "epochs_to_threshold", "final_S"], summary)
    _write_sidecar(out_dir / "train_summary.meta.json", "train", config, seed)
    log.flush()
    return summary


# ---------------------------------------------------------------------------
# pretrain


PRETRAIN_DEFAULTS = {
    "n": 3,
    "n_C": 2,
    "cost_offset": 0,
    "L": 20,
    "steps": 600,
    "n_seeds": 5,
    "learning_rate": 0.01,
    "fd_step": 1e-4,
    "var_every": 100,
    "var_samples": 400,
    "cost": "raw:Z1 Z2",
}

PRETRAIN_FULL = {
    **PRETRAIN_DEFAULTS,
    "n": 5,
    "L": 100,
    "steps": 3000,
}


def run_pretrain(config: dict, out_dir: Path, seed: int, threads: int = 1) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    log = RunLog(out_dir)
    layout = _layout_for(config["n"], config["n_C"], config["cost_offset"], config["L"])
    cost = parse_cost(config["cost"], layout.register)
    optimizer = AMSGradConfig(learning_rate=config["learning_rate"])
    results = {}
    for seed_index in range(config["n_seeds"]):
        theta0 = init_params(
            layout, Random(), seeding.substream_seed(seed, "pretrain-init", seed_index)
        )
        result = pretrain_minimize_sc(
            layout, theta0, config["steps"], optimizer,
            fd_step=config["fd_step"],
            var_every=config["var_every"], var_samples=config["var_samples"],
            var_seed=seeding.substream_seed(seed, "pretrain-var", seed_index),
            var_cost=cost,
        )
        rows = [
            (r.step, r.collective_entropy, r.mixing, r.variance_estimate)
            for r in result.records
        ]
        _write_csv(out_dir / f"pretrain_seed{seed_index}.csv",
                   ["step", "S_C", "mixing", "var_O1_estimate"], rows)
        results[seed_index] = result
    _write_sidecar(out_dir / "pretrain.meta.json", "pretrain", config, seed, {
        "variance_protocol": (
            "variance of the first responsive component over uniform re-draws of "
            "all non-entangling angles with entangling angles held at their "
            "current pretrained values; one admissible mid-pretraining estimate"
        ),
    })
    log.flush()
    return results


# ---------------------------------------------------------------------------
# compressor-data


COMPRESSOR_DEFAULTS = {
    "n": 9,
    "N_g": 8,
    "scale": 1.0,
}

COMPRESSOR_FULL = dict(COMPRESSOR_DEFAULTS)


def run_compressor_data(config: dict, out_dir: Path, seed: int, threads: int = 1) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = make_compressor_dataset(config["n"], config["N_g"], seed, config["scale"])
    path = out_dir / "compressor_dataset.json"
    save_dataset(dataset, path)
    _write_sidecar(out_dir / "compressor_dataset.meta.json", "compressor-data",
                   config, seed, {"distribution": dataset.distribution})
    return path


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "variance-sweep": (run_variance_sweep, VARIANCE_SWEEP_DEFAULTS, VARIANCE_SWEEP_FULL),
    "variance-vs-entropy": (run_variance_vs_entropy, VARIANCE_VS_ENTROPY_DEFAULTS,
                            VARIANCE_VS_ENTROPY_FULL),
    "train": (run_train, TRAIN_DEFAULTS, TRAIN_FULL),
    "pretrain": (run_pretrain, PRETRAIN_DEFAULTS, PRETRAIN_FULL),
    "compressor-data": (run_compressor_data, COMPRESSOR_DEFAULTS, COMPRESSOR_FULL),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bplab",
        description="Seeded barren-plateau experiments on layered 1D circuits",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None,
                       help="JSON config merged over the built-in defaults")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--full", action="store_true",
                       help="full-scale defaults (hours of runtime)")
    args = parser.parse_args(argv)

    runner, defaults, full_defaults = _COMMANDS[args.command]
    override = None
    if args.config is not None:
        override = json.loads(args.config.read_text())
    config = _merge(full_defaults if args.full else defaults, override)
    try:
        runner(config, args.out, args.seed, threads=args.threads)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
