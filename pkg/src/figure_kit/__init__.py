"""Plotting toolkit for the benchmark's CSV outputs.

Reads only the documented CSV schemas and renders static figures: bias curves
with error bars, boxplots of final gate weights, stacked intervention-case
ratios, per-case shift scatter plots with the zero-gap diagonal, and baseline
belief curves. Rendering is read-only and deterministic: a fixed style, no
randomness, headless file output.
"""

from .render import (
    FIGURE_KINDS,
    EmptyInputError,
    FigureSpec,
    MissingColumnError,
    render,
)

__all__ = [
    "FIGURE_KINDS",
    "EmptyInputError",
    "FigureSpec",
    "MissingColumnError",
    "render",
]
