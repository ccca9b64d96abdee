"""Finite-dimensional GNS representation, modular flow and the L2 picture of D_1/2.

The algebra of ``n x n`` matrices is identified with ``C^(n^2)`` by
column-stacking (``vec``).  In these coordinates the GNS inner product
``<x, y> = trace(rho y^dagger x)`` has Gram matrix ``rho^T (x) I`` and the
left-regular action is ``pi(a) = I (x) a``; the cyclic vector is ``vec(I)``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import optimize

from .constraints import Expectation, canonicalize
from .exceptions import DomainError, NotConvergedError, NotNormalizedError
from .matkernel import symmetrize, trace_distance
from .projection import ArgumentOrder, project
from .states import StateOperator, as_state

GRAM_RANK_TOL = 1e-12


def vec(x):
    return np.asarray(x, dtype=complex).reshape(-1, order="F")


def unvec(v, n):
    return np.asarray(v).reshape(n, n, order="F")


@dataclass
class GnsRepresentation:
    """GNS data of a state on the full matrix algebra."""

    dim: int
    density: np.ndarray
    gram: np.ndarray
    cyclic_vector: np.ndarray

    @property
    def quotient_dim(self):
        """Dimension of the GNS space, i.e. the rank of the Gram form."""
        w = np.linalg.eigvalsh(self.gram)
        return int(np.sum(w > GRAM_RANK_TOL * max(1.0, w[-1])))

    @property
    def rank(self):
        return self.quotient_dim

    def pi(self, a):
        """Left multiplication by ``a`` as an ``n^2 x n^2`` matrix."""
        return np.kron(np.eye(self.dim), np.asarray(a, dtype=complex))

    def inner(self, x, y):
        """``<x, y> = trace(rho y^dagger x)`` on vectorized algebra elements."""
        return complex(np.conj(y) @ self.gram @ x)

    def expectation(self, a):
        """``<Omega, pi(a) Omega>``, which reproduces ``trace(rho a)``."""
        omega = self.cyclic_vector
        return self.inner(self.pi(a) @ omega, omega)


def gns_construct(omega):
    """GNS representation of a normalized state ``omega``.

    Non-faithful states give a degenerate Gram form; see ``quotient_dim``.
    """
    omega = as_state(omega)
    if not omega.normalized:
        raise NotNormalizedError(f"GNS needs a normalized state, trace is {omega.trace:.12g}")
    n = omega.dim
    gram = np.kron(omega.matrix.T, np.eye(n))
    return GnsRepresentation(n, np.array(omega.matrix), gram, vec(np.eye(n)))


def modular_flow(omega, r, x):
    """``sigma_r(x) = rho^(ir) x rho^(-ir)``.

    Raises
    ------
    DomainError
        If ``omega`` is not faithful.
    """
    omega = as_state(omega)
    if not omega.is_faithful:
        raise DomainError("the modular group needs a faithful state")
    v = omega.eigenvectors
    phase = np.exp(1j * r * np.log(omega.eigenvalues))
    u = (v * phase) @ v.conj().T
    return u @ np.asarray(x, dtype=complex) @ u.conj().T


def _expectation_system(constraints, n):
    canon = canonicalize(constraints, n)
    if canon.family is not None or canon.support is not None:
        raise ValueError("the L2 correspondence is implemented for expectation constraints only")
    obs, targets = list(canon.observables), list(canon.targets)
    if canon.normalize:
        obs.insert(0, np.eye(n, dtype=complex))
        targets.insert(0, 1.0)
    return obs, np.asarray(targets, dtype=float)


def l2_nearest_point(omega, constraints, tol=1e-10):
    """Nearest point to ``2 omega^1/2`` in the Hilbert-Schmidt norm among ``2 phi^1/2``, ``phi`` feasible.

    Stationarity of ``||z - omega^1/2||^2`` under ``trace(z x_k z) = c_k``
    gives the Sylvester equation ``A z + z A = 2 omega^1/2`` with
    ``A = I + sum_k mu_k x_k``; the multipliers ``mu`` are root-found along
    a path of targets starting from the values at ``omega``.
    Returns ``phi = z^2``.
    """
    omega = as_state(omega)
    n = omega.dim
    obs, c = _expectation_system(constraints, n)
    s = omega.power(0.5)
    eye = np.eye(n)

    def solve(mu):
        a = eye + sum((m * x for m, x in zip(mu, obs)), np.zeros((n, n), dtype=complex))
        return a, symmetrize(sla.solve_sylvester(a, a, 2 * s))

    def values(mu):
        _, z = solve(mu)
        return np.array([np.sum((z @ x @ z) * eye).real for x in obs])

    if not obs:
        return omega
    # continuation from the unconstrained point mu = 0 keeps the root on the minimizing branch
    start = values(np.zeros(len(obs)))
    if np.max(np.abs(start - c)) <= tol:
        return omega
    mu = np.zeros(len(obs))
    for tau in np.linspace(0.0, 1.0, 21)[1:]:
        target = (1 - tau) * start + tau * c
        mu = optimize.root(lambda m: values(m) - target, mu, method="hybr", tol=1e-14).x
    res = float(np.max(np.abs(values(mu) - c)))
    _, z = solve(mu)
    if res > tol:
        raise NotConvergedError(f"multiplier root-finding stopped at residual {res:.3g}", residual=res)
    if np.linalg.eigvalsh(z)[0] < -1e-10:
        raise NotConvergedError("stationary point is not the square root of a state", residual=res)
    return StateOperator(symmetrize(z @ z))


def l2_projection_correspondence(omega, constraints, tol=1e-9):
    """Compare the gamma = 1/2 entropic projection with the L2 nearest point.

    Returns
    -------
    entropic, embedded_orthogonal : StateOperator
    trace_distance : float
    """
    omega = as_state(omega)
    if not isinstance(constraints, Expectation):
        _expectation_system(constraints, omega.dim)
    entropic = project(omega, 0.5, constraints, ArgumentOrder.PAPER).state
    orthogonal = l2_nearest_point(omega, constraints, tol=tol)
    return entropic, orthogonal, trace_distance(entropic.matrix, orthogonal.matrix)
