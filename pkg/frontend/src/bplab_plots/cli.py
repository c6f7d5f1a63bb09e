"""Dispatcher: bplab-plot <figure-kind> --in <csv...> --out <file>.

Exit code 0 exactly when an image file was written; unusable inputs
(missing columns, empty tables) leave no output file behind.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .spec import FIGURE_KINDS, FigureSpec, PlotInputError, load_inputs
from .traces import render_loss_trace, render_pretrain_trace
from .variance import render_variance_vs_depth, render_variance_vs_entropy

_RENDERERS = {
    "variance_vs_L": render_variance_vs_depth,
    "variance_vs_S": render_variance_vs_entropy,
    "loss_trace": render_loss_trace,
    "pretrain_trace": render_pretrain_trace,
}


def render(spec: FigureSpec) -> Path:
    """Validate inputs, draw the figure, and write the image file."""
    tables = load_inputs(spec)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    _RENDERERS[spec.kind](spec, tables)
    return spec.output


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bplab-plot",
                                     description="Render bplab experiment CSVs")
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True, type=Path)
    parser.add_argument("--out", dest="output", required=True, type=Path)
    parser.add_argument("--linear-y", action="store_true",
                        help="linear y axis on variance plots")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(args.kind, tuple(args.inputs),
                          args.output, log_y=not args.linear_y)
        render(spec)
    except (PlotInputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not args.output.exists():
        print("error: no image was written", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
