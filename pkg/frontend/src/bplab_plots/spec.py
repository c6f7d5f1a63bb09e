"""Figure specifications and CSV loading for the documented schemas."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

FIGURE_KINDS = ("variance_vs_L", "variance_vs_S", "loss_trace", "pretrain_trace")

REQUIRED_COLUMNS = {
    "variance_vs_L": ("n", "n_C", "scheme", "L", "var_O1"),
    "variance_vs_S": ("n", "L", "var_O1", "S_mean"),
    "loss_trace": ("epoch", "loss"),
    "pretrain_trace": ("step", "S_C", "mixing"),
}


class PlotInputError(ValueError):
    """Raised for unusable inputs: missing columns, empty tables."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[Path, ...]
    output: Path
    log_y: bool | None = None  # None: per-kind default

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise PlotInputError(
                f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}"
            )
        if not self.inputs:
            raise PlotInputError("no input CSVs given")
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "output", Path(self.output))


@dataclass
class Table:
    """One parsed CSV: header plus string-valued rows."""

    path: Path
    columns: tuple[str, ...]
    rows: list[dict]

    def floats(self, column: str) -> list[float]:
        return [float(r[column]) for r in self.rows]


def load_table(path: Path, required: tuple[str, ...]) -> Table:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise PlotInputError(f"{path}: empty file, no header row")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise PlotInputError(
                f"{path}: missing required column(s) {', '.join(missing)} "
                f"for this figure kind (found: {', '.join(reader.fieldnames)})"
            )
        rows = list(reader)
    if not rows:
        raise PlotInputError(f"{path}: no data rows")
    return Table(path, tuple(reader.fieldnames), rows)


def load_inputs(spec: FigureSpec) -> list[Table]:
    return [load_table(p, REQUIRED_COLUMNS[spec.kind]) for p in spec.inputs]


# fixed color cycle keyed by qubit count for deterministic styling
_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f")


def color_for(n: int) -> str:
    return _COLORS[int(n) % len(_COLORS)]
