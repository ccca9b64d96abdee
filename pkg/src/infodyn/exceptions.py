"""Exception hierarchy shared by all modules."""

import numpy as np


class InfodynError(Exception):
    """Base class for errors raised by infodyn."""


class DomainError(InfodynError, ValueError):
    """A spectral function was evaluated outside its domain."""


class DimensionMismatchError(InfodynError, ValueError):
    pass


class NotHermitianError(InfodynError, ValueError):
    pass


class NotPositiveError(InfodynError, ValueError):
    pass


class NotNormalizedError(InfodynError, ValueError):
    pass


class NotCommutativeError(InfodynError, ValueError):
    pass


class EigenSolverError(InfodynError, np.linalg.LinAlgError):
    pass


class StepUnderflowError(InfodynError, ArithmeticError):
    """No finite-difference step keeps the perturbed operators positive."""


class ZeroEvidenceError(InfodynError, ValueError):
    pass


class NotConvergedError(InfodynError, RuntimeError):
    """Solver hit ``max_iter`` with residual above tolerance.

    The partial solution and diagnostics are attached for inspection.
    """

    def __init__(self, message, *, residual=None, iterations=None, state=None, t=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.state = state
        self.t = t


class InfeasibleError(InfodynError, RuntimeError):
    def __init__(self, message, *, residual=None, iterations=None, t=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.t = t
