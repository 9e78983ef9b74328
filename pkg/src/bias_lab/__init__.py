"""Bivariate categorical causal-bias laboratory.

Simulates two-variable categorical generators with controllable marginal
asymmetry (epsilon) and intervention-shift asymmetry (lambda), trains
gradient-based direction learners on them, and measures how the two biases
steer convergence.
"""

from .rng import SeededRng
from .scm import BivariateScm, DependencyState, InterventionCase, make_scm

__all__ = [
    "SeededRng",
    "BivariateScm",
    "DependencyState",
    "InterventionCase",
    "make_scm",
]

__version__ = "0.1.0"
