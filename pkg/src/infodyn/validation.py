"""Input checks shared by the estimator and the command-line front end."""

import numpy as np

from .divergence import check_gamma
from .exceptions import DimensionMismatchError
from .projection import ArgumentOrder
from .states import StateOperator


def check_state_batch(x, dim=None):
    """Coerce ``x`` to a complex array of shape ``(n_states, d, d)``.

    A single ``(d, d)`` matrix is promoted to a batch of one.  Every entry
    must be a valid (Hermitian, positive semidefinite) state.
    """
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] == 0:
        raise ValueError(f"expected an array of square matrices, got shape {np.shape(x)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("states contain non-finite entries")
    if dim is not None and arr.shape[1] != dim:
        raise DimensionMismatchError(f"states have dim {arr.shape[1]}, expected {dim}")
    for m in arr:
        StateOperator(m)
    return arr


def check_order(order):
    try:
        return ArgumentOrder(order)
    except ValueError:
        raise ValueError(f"order must be 'paper' or 'reverse', got {order!r}") from None


def check_solver_params(tol, max_iter):
    if tol is not None and (not np.isfinite(tol) or tol <= 0):
        raise ValueError(f"tol must be positive, got {tol!r}")
    if max_iter is not None and (int(max_iter) != max_iter or max_iter < 1):
        raise ValueError(f"max_iter must be a positive integer, got {max_iter!r}")


def check_params(gamma, order, tol, max_iter):
    check_gamma(gamma)
    check_order(order)
    check_solver_params(tol, max_iter)
