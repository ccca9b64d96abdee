"""Metric and dual connections induced by the divergence family.

Tangent vectors are Hermitian matrices (perturbations of the operator
entries).  All quantities are obtained by central finite differences of
:func:`~infodyn.divergence.d_gamma_continuous` with one Richardson step.

Sign conventions: the metric is ``g(u, v) = -d_a d_b D(phi + a u, phi + b v)``
(positive definite), and the connections follow Eguchi::

    g(nabla_u v, w)  = -d_u d_v d_w' D      (u, v on the first slot, w on the second)
    g(v, nabla*_u w) = -d_u' d_w' d_v D     (u, w on the second slot, v on the first)

so that ``g(nabla_u v, w) + g(v, nabla*_u w) = u(g(v, w))`` holds.
"""

import itertools

import numpy as np

from .divergence import check_gamma, d_gamma_continuous
from .exceptions import DomainError, StepUnderflowError
from .matkernel import as_hermitian, divided_differences, symmetrize
from .states import StateOperator, as_state

METRIC_STEP = 1e-3
CONNECTION_STEP = 1e-2
MIN_STEP = 1e-14


def tangent_vector(u, traceless=False, tol=1e-12):
    """Validate a Hermitian tangent direction; optionally require zero trace."""
    u = as_hermitian(u, name="tangent vector")
    if traceless and abs(np.trace(u)) > tol:
        raise ValueError(f"tangent vector has trace {np.trace(u).real:.3g}, expected 0")
    return u


def _opnorm(u):
    return float(np.max(np.abs(np.linalg.eigvalsh(u)), initial=0.0))


def _base_step(phi, directions, h, factor):
    """Pick a step keeping every stencil point positive definite.

    The default step is ``factor * lambda_min(phi)`` measured in units of the
    largest direction norm; a user-provided step is halved until safe.
    """
    if not phi.is_faithful:
        raise StepUnderflowError("base point is not faithful; no positive step exists")
    lam = float(phi.eigenvalues[0])
    # stencils combine up to two directions on one slot
    scale = sum(sorted((_opnorm(d) for d in directions), reverse=True)[:2])
    if scale == 0:
        return None
    safe = 0.5 * lam / scale
    if h is None:
        h = factor * lam / scale
    while h >= safe:
        h /= 2
        if h < MIN_STEP:
            raise StepUnderflowError(f"step fell below {MIN_STEP:g} while keeping the stencil positive")
    return h


class _Evaluator:
    """Caches perturbed states ``phi + sum c_i d_i`` across stencil points."""

    def __init__(self, gamma, phi):
        self.gamma = gamma
        self.phi = phi
        self.cache = {}

    def state(self, terms):
        key = tuple((id(d), c) for c, d in terms if c != 0)
        if key not in self.cache:
            m = self.phi.matrix + sum((c * d for c, d in terms), np.zeros_like(self.phi.matrix))
            self.cache[key] = StateOperator(symmetrize(m))
        return self.cache[key]

    def divergence(self, first, second):
        return d_gamma_continuous(self.state(first), self.state(second), self.gamma)


def _stencil(func, h, k):
    """Central difference for a k-th order mixed partial at the origin."""
    total = 0.0
    for signs in itertools.product((1, -1), repeat=k):
        total += np.prod(signs) * func(tuple(s * h for s in signs))
    return total / (2 * h) ** k


def _richardson(func, h, k):
    return (4 * _stencil(func, h / 2, k) - _stencil(func, h, k)) / 3


def metric(gamma, phi, u, v, h=None):
    """Divergence-induced metric ``g_phi(u, v)`` by mixed central differences.

    Parameters
    ----------
    gamma : float
        Member of the divergence family, in ``[0, 1]``.
    phi : StateOperator or array_like
        Faithful base point.
    u, v : array_like
        Hermitian tangent directions.
    h : float, optional
        Base step; defaults to ``1e-3 * lambda_min(phi)`` per unit direction norm.

    Raises
    ------
    StepUnderflowError
        If no step keeps the stencil inside the positive cone.
    """
    g = check_gamma(gamma)
    phi = as_state(phi)
    u, v = tangent_vector(u), tangent_vector(v)
    h = _base_step(phi, [u, v], h, METRIC_STEP)
    if h is None:
        return 0.0
    ev = _Evaluator(g, phi)
    mixed = _richardson(lambda s: ev.divergence([(s[0], u)], [(s[1], v)]), h, 2)
    return float(-mixed)


def connection(gamma, phi, u, v, w, h=None, dual=False):
    """Christoffel-type scalar ``g(nabla_u v, w)``, or ``g(v, nabla*_u w)`` when ``dual``."""
    g = check_gamma(gamma)
    phi = as_state(phi)
    u, v, w = (tangent_vector(x) for x in (u, v, w))
    h = _base_step(phi, [u, v, w], h, CONNECTION_STEP)
    if h is None:
        return 0.0
    ev = _Evaluator(g, phi)
    if dual:
        def f(s):
            return ev.divergence([(s[1], v)], [(s[0], u), (s[2], w)])
    else:
        def f(s):
            return ev.divergence([(s[0], u), (s[1], v)], [(s[2], w)])
    return float(-_richardson(f, h, 3))


def metric_derivative(gamma, phi, u, v, w, h=None):
    """Directional derivative ``u(g(v, w))`` of the metric field along constant ``u``.

    Moving the base point along ``u`` shifts both slots of the divergence, so
    this is ``-d_s d_t d_r D(phi + s u + t v, phi + s u + r w)``.
    """
    g = check_gamma(gamma)
    phi = as_state(phi)
    u, v, w = (tangent_vector(x) for x in (u, v, w))
    h = _base_step(phi, [u, v, w], h, CONNECTION_STEP)
    if h is None:
        return 0.0
    ev = _Evaluator(g, phi)

    def f(s):
        return ev.divergence([(s[0], u), (s[1], v)], [(s[0], u), (s[2], w)])

    return float(-_richardson(f, h, 3))


def norden_sen_residual(gamma, phi, u, v, w, h=None):
    """``|g(nabla_u v, w) + g(v, nabla*_u w) - u(g(v, w))|``."""
    primal = connection(gamma, phi, u, v, w, h)
    dual = connection(gamma, phi, u, v, w, h, dual=True)
    return abs(primal + dual - metric_derivative(gamma, phi, u, v, w, h))


def mean_connection(gamma, phi, u, v, w, h=None):
    """``g(nabla-bar_u v, w)`` for the mean connection ``(nabla + nabla*) / 2``.

    The dual term is ``g(nabla*_u v, w) = g(w, nabla*_u v)``, i.e. the dual
    scalar with its last two arguments swapped.
    """
    primal = connection(gamma, phi, u, v, w, h)
    dual = connection(gamma, phi, u, w, v, h, dual=True)
    return 0.5 * (primal + dual)


def compatibility_residual(gamma, phi, u, v, w, h=None):
    """Metric compatibility defect ``|u(g(v,w)) - g(nabla-bar_u v, w) - g(v, nabla-bar_u w)|``."""
    lhs = metric_derivative(gamma, phi, u, v, w, h)
    return abs(lhs - mean_connection(gamma, phi, u, v, w, h) - mean_connection(gamma, phi, u, w, v, h))


def bkm_kernel(a, b):
    """``(log a - log b) / (a - b)`` with confluent value ``1 / a``."""
    return divided_differences(np.array([a, b], dtype=float), np.log, lambda x: 1.0 / x)[0, 1]


def wyd_kernel(gamma, a, b):
    """``(a^g - b^g)(a^(1-g) - b^(1-g)) / (g (1-g) (a - b)^2)`` with confluent value ``1 / a``."""
    g = check_gamma(gamma, open_interval=True)
    return _wyd_matrix(g, np.array([a, b], dtype=float))[0, 1]


def _wyd_matrix(g, lam):
    k1 = divided_differences(lam, lambda x: x ** g, lambda x: g * x ** (g - 1))
    k2 = divided_differences(lam, lambda x: x ** (1 - g), lambda x: (1 - g) * x ** (-g))
    return k1 * k2 / (g * (1 - g))


def _kernel_form(phi, kernel, u, v):
    vecs = phi.eigenvectors
    uh = vecs.conj().T @ u @ vecs
    vh = vecs.conj().T @ v @ vecs
    return float(np.sum(np.conj(uh) * vh * kernel).real)


def _faithful(phi):
    phi = as_state(phi)
    if not phi.is_faithful:
        raise DomainError("closed-form metrics need a faithful base point")
    return phi


def bkm_metric(phi, u, v):
    """Bogolyubov-Kubo-Mori metric in the eigenbasis of ``phi``."""
    phi = _faithful(phi)
    u, v = tangent_vector(u), tangent_vector(v)
    lam = phi.eigenvalues
    k = divided_differences(lam, np.log, lambda x: 1.0 / x)
    return _kernel_form(phi, k, u, v)


def wyd_metric(gamma, phi, u, v):
    """Wigner-Yanase-Dyson metric for ``gamma`` in (0, 1)."""
    g = check_gamma(gamma, open_interval=True)
    phi = _faithful(phi)
    u, v = tangent_vector(u), tangent_vector(v)
    return _kernel_form(phi, _wyd_matrix(g, phi.eigenvalues), u, v)


def closed_form_metric(gamma, phi, u, v):
    """BKM at the endpoints, WYD in the interior."""
    g = check_gamma(gamma)
    if g in (0.0, 1.0):
        return bkm_metric(phi, u, v)
    return wyd_metric(g, phi, u, v)
