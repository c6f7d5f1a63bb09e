"""bplab-plots: figure rendering for bplab experiment CSVs."""

__version__ = "0.1.0"

from .cli import render
from .spec import FIGURE_KINDS, FigureSpec, PlotInputError
