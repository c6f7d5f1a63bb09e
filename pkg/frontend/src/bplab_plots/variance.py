"""Variance-curve figures: variance vs depth and variance vs entropy."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .spec import FigureSpec, Table, color_for

_STYLE_BY_SCHEME = {"random": "-", "partitioned": "--"}


def _series_key(row: dict) -> tuple:
    return (row["n"], row.get("n_C", ""), row.get("scheme", ""))


def render_variance_vs_depth(spec: FigureSpec, tables: list[Table]) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    series: dict[tuple, list[dict]] = {}
    for table in tables:
        for row in table.rows:
            series.setdefault(_series_key(row), []).append(row)
    for key in sorted(series):
        rows = sorted(series[key], key=lambda r: float(r["L"]))
        depths = [float(r["L"]) for r in rows]
        variances = [float(r["var_O1"]) for r in rows]
        n, n_c, scheme = key
        label = f"n={n}, n_C={n_c}, {scheme}" if scheme else f"n={n}"
        style = _STYLE_BY_SCHEME.get(scheme, "-")
        errors = None
        if rows and rows[0].get("var_stderr", "") not in ("", None):
            errors = [float(r["var_stderr"]) for r in rows]
        ax.errorbar(depths, variances, yerr=errors, fmt="o" + style,
                    color=color_for(int(n)), label=label, capsize=2, markersize=4)
    if spec.log_y is not False:
        ax.set_yscale("log")
    ax.set_xlabel("gate layers L")
    ax.set_ylabel("gradient variance")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)


def render_variance_vs_entropy(spec: FigureSpec, tables: list[Table]) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    series: dict[str, list[dict]] = {}
    for table in tables:
        for row in table.rows:
            series.setdefault(row["n"], []).append(row)
    for n in sorted(series, key=int):
        rows = sorted(series[n], key=lambda r: float(r["S_mean"]))
        entropy = [float(r["S_mean"]) for r in rows]
        variances = [float(r["var_O1"]) for r in rows]
        ax.plot(entropy, variances, "o-", color=color_for(int(n)),
                label=f"n={n}", markersize=4)
    if spec.log_y is not False:
        ax.set_yscale("log")
    ax.set_xlabel("mean bipartite entropy S (bits)")
    ax.set_ylabel("gradient variance")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output)
    plt.close(fig)
