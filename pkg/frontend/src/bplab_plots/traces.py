"""Training and pretraining trace figures."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .spec import FigureSpec, Table, color_for


def render_loss_trace(spec: FigureSpec, tables: list[Table]) -> None:
    """Main panel: loss per epoch (one series per CSV). Secondary panel:
    the entropy column, when present."""
    with_entropy = any("S" in t.columns for t in tables)
    if with_entropy:
        fig, (ax, ax_s) = plt.subplots(
            2, 1, figsize=(6, 5.5), sharex=True,
            gridspec_kw={"height_ratios": [2.2, 1]},
        )
    else:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax_s = None
    for idx, table in enumerate(tables):
        label = table.path.stem
        epochs = table.floats("epoch")
        ax.plot(epochs, table.floats("loss"), color=color_for(idx), label=label)
        if ax_s is not None and "S" in table.columns:
            ax_s.plot(epochs, table.floats("S"), color=color_for(idx))
    ax.set_ylabel("loss")
    ax.legend(fontsize=7)
    if ax_s is not None:
        ax_s.set_ylabel("S (bits)")
        ax_s.set_xlabel("epoch")
    else:
        ax.set_xlabel("epoch")
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)


def render_pretrain_trace(spec: FigureSpec, tables: list[Table]) -> None:
    """Collective entropy and mixing metric per step; variance estimates
    (sparse column) on a twin axis when present."""
    fig, (ax, ax_mix) = plt.subplots(
        2, 1, figsize=(6, 5.5), sharex=True,
        gridspec_kw={"height_ratios": [2.2, 1]},
    )
    ax_var = None
    for idx, table in enumerate(tables):
        label = table.path.stem
        steps = table.floats("step")
        ax.plot(steps, table.floats("S_C"), color=color_for(idx), label=label)
        ax_mix.plot(steps, table.floats("mixing"), color=color_for(idx))
        if "var_O1_estimate" in table.columns:
            points = [
                (float(r["step"]), float(r["var_O1_estimate"]))
                for r in table.rows if r["var_O1_estimate"] not in ("", None)
            ]
            if points:
                if ax_var is None:
                    ax_var = ax.twinx()
                    ax_var.set_ylabel("variance estimate")
                ax_var.plot(*zip(*points), "s--", color=color_for(idx), alpha=0.6)
    ax.set_ylabel("collective entropy S_C (bits)")
    ax.legend(fontsize=7)
    ax_mix.set_ylabel("mixing")
    ax_mix.set_xlabel("pretraining step")
    ax_mix.axhline(2 / 3.141592653589793, color="gray", lw=0.6, ls=":")
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)
