"""scikit-learn style wrapper around :func:`~infodyn.projection.project`."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .constraints import canonicalize
from .projection import project
from .validation import check_params, check_state_batch


class EntropicProjector(TransformerMixin, BaseEstimator):
    """Project each state of a batch onto a fixed constraint set.

    Parameters
    ----------
    gamma : float
        Member of the divergence family.
    constraints : constraint set or None
        Feasible set shared by all inputs.
    order : {"paper", "reverse"}
    tol, max_iter : optional
        Passed to the solver.

    Attributes
    ----------
    dim_ : int
        Matrix dimension seen in ``fit``.
    results_ : list of ProjectionResult
        Solver reports from the last ``transform``.
    """

    def __init__(self, gamma=0.0, constraints=None, order="paper", tol=None, max_iter=None):
        self.gamma = gamma
        self.constraints = constraints
        self.order = order
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        check_params(self.gamma, self.order, self.tol, self.max_iter)
        X = check_state_batch(X)
        self.dim_ = X.shape[1]
        canonicalize(self.constraints, self.dim_)
        return self

    def transform(self, X):
        check_is_fitted(self, "dim_")
        X = check_state_batch(X, self.dim_)
        self.results_ = [
            project(m, self.gamma, self.constraints, self.order, tol=self.tol, max_iter=self.max_iter) for m in X
        ]
        return np.array([r.state.matrix for r in self.results_])

    def divergences(self):
        """Divergence from each input to its projection, from the last ``transform``."""
        check_is_fitted(self, "results_")
        return np.array([r.divergence_at_solution for r in self.results_])
