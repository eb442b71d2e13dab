"""Subadditive topological pressure and the variational principle on finite random subshifts."""
__version__ = "0.1.0"

from .core import BaseSystem, MetricParams, RandomSFT, Word
from .kernels import BACKEND
from .measures import RandomMarkovMeasure, fiber_entropy, phi_star
from .potentials import Additive, Constant, MatrixCocycle, Zero
from .pressure import PressureEstimate, estimate_pressure, partition_function

__all__ = [
    "BACKEND",
    "BaseSystem",
    "MetricParams",
    "RandomSFT",
    "Word",
    "Additive",
    "Constant",
    "MatrixCocycle",
    "Zero",
    "RandomMarkovMeasure",
    "fiber_entropy",
    "phi_star",
    "PressureEstimate",
    "estimate_pressure",
    "partition_function",
]
