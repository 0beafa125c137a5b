"""Spectral simulation of the truncated cubic fractional NLS on the torus,
with Gaussian-measure transport, density formulas, quadruple-estimate
scans and two-point Monte Carlo."""

__version__ = "0.1.0"

from .dynamics import FlowParams, Trajectory, evolve, hamiltonian, linear_propagator, vector_field
from .errors import ConfigError, CutoffStarvation, DegenerateQuadruple, OverflowGuard, StepFailure
from .fourier import FourierState, bracket_multiplier, cubic_convolution, project, sobolev_norm
from .measures import MCEstimate, MeasureSpec, mc_expectation, partition_estimate, sample
from .rng import RandomStream

__all__ = [
    "ConfigError",
    "CutoffStarvation",
    "DegenerateQuadruple",
    "FlowParams",
    "FourierState",
    "MCEstimate",
    "MeasureSpec",
    "OverflowGuard",
    "RandomStream",
    "StepFailure",
    "Trajectory",
    "bracket_multiplier",
    "cubic_convolution",
    "evolve",
    "hamiltonian",
    "linear_propagator",
    "mc_expectation",
    "partition_estimate",
    "project",
    "sample",
    "sobolev_norm",
    "vector_field",
]
