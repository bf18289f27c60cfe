"""Constrained FIR filter design by projections onto convex sets."""

from .errors import (
    ConsistencyError,
    DegenerateFrequencyError,
    InfeasibleConstraintError,
    InvalidArgumentError,
    InvalidSpecError,
    NumericalError,
    PocsError,
)
from .projectors import (
    EnergyConstraint,
    FilterSpec,
    MagPhaseConstraint,
    NyquistConstraint,
    SoftLinearConstraint,
    band_residuals,
    project_mag_phase,
    project_nyquist,
    project_output_energy,
    project_passband,
    project_soft_linear,
    project_stopband,
    project_support,
    project_symmetry,
)
from .solver import ConvergenceReport, ProjectorChain, distance_to_set, make_chain, run

__version__ = "0.1.0"
