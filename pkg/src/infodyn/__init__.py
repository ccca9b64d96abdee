"""Entropic projections, divergence geometry and GNS tools for finite-dimensional quantum states."""

from .constraints import BlockDiagonal, Composite, Expectation, Normalize, Support
from .divergence import (
    classical_divergence,
    d_gamma,
    d_gamma_continuous,
    d_one,
    d_zero,
    ell_gamma,
    hilbert_distance_check,
)
from .dynamics import ConstraintSchedule, Trajectory, evolve, trajectory_summary, von_neumann_entropy
from .estimators import EntropicProjector
from .exceptions import (
    DimensionMismatchError,
    DomainError,
    EigenSolverError,
    InfeasibleError,
    InfodynError,
    NotCommutativeError,
    NotConvergedError,
    NotHermitianError,
    NotNormalizedError,
    NotPositiveError,
    StepUnderflowError,
    ZeroEvidenceError,
)
from .geometry import bkm_metric, connection, metric, norden_sen_residual, wyd_metric
from .gns import GnsRepresentation, gns_construct, l2_projection_correspondence, modular_flow
from .projection import (
    ArgumentOrder,
    ProjectionResult,
    bayes_update,
    luders_equivalence_check,
    luders_weak,
    project,
    pythagorean_residual,
)
from .states import KrausChannel, ProjectorFamily, StateOperator, make_state, pinch

__version__ = "0.1.0"
