"""Split-step solver for the 1D Gross-Pitaevskii equation with Bohmian post-processing.

Units throughout are micrometres and milliseconds with hbar set to one;
:mod:`gpebohm.units` converts from SI.
"""

from .grid import Grid, effective_frequency, effective_width, harmonic_trap, lattice
from .propagator import FrameSeries, PropagationError, StepperConfig, propagate, step
from .states import Wavefunction, gaussian_superposition
from .units import PhysicalParams, ScaledParams, rescale

__version__ = "0.1.0"

__all__ = [
    "FrameSeries",
    "Grid",
    "PhysicalParams",
    "PropagationError",
    "ScaledParams",
    "StepperConfig",
    "Wavefunction",
    "effective_frequency",
    "effective_width",
    "gaussian_superposition",
    "harmonic_trap",
    "lattice",
    "propagate",
    "rescale",
    "step",
]
