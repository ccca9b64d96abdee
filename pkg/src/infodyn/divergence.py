"""The gamma-family of quantum divergences, its endpoint limits and embeddings.

For ``0 < gamma < 1``::

    D_gamma(omega, phi) = tr[ omega/(1-gamma) + phi/gamma
                              - Re(omega^gamma phi^(1-gamma)) / (gamma (1-gamma)) ]

At ``gamma = 0`` the limit is the non-normalized Umegaki form
``tr(phi log phi - phi log omega + omega - phi)`` and ``D_1(omega, phi) =
D_0(phi, omega)``.  Support violations give ``+inf`` rather than an error.
"""

import numpy as np

from .matkernel import DomainError, check_same_dim, hs_inner
from .states import FAITHFUL_TOL, as_distribution, as_state

#: Roundoff negativity above this is clamped to zero; anything larger is returned as-is.
NEGATIVE_CLAMP = 1e-9
SUPPORT_TOL = 1e-10


def check_gamma(gamma, open_interval=False):
    """Validate ``gamma`` in ``[0, 1]`` (or ``(0, 1)`` when ``open_interval``)."""
    g = float(gamma)
    if not np.isfinite(g) or g < 0 or g > 1:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma!r}")
    if open_interval and (g == 0 or g == 1):
        raise ValueError(f"gamma must lie strictly inside (0, 1), got {gamma!r}")
    return g


def _clamp(value):
    if -NEGATIVE_CLAMP <= value < 0:
        return 0.0
    return float(value)


def _tr_product(a, b):
    return np.sum(a * b.T)


def d_gamma(omega, phi, gamma):
    """Interior member ``D_gamma(omega, phi)`` for ``gamma`` strictly in (0, 1)."""
    g = check_gamma(gamma, open_interval=True)
    omega, phi = as_state(omega), as_state(phi)
    check_same_dim(omega.matrix, phi.matrix)
    cross = _tr_product(omega.power(g), phi.power(1 - g)).real
    value = omega.trace / (1 - g) + phi.trace / g - cross / (g * (1 - g))
    return _clamp(value)


def support_contained(inner, outer, tol=SUPPORT_TOL):
    """True when the support of ``inner`` lies in the support of ``outer``."""
    if outer.is_faithful:
        return True
    kernel = np.eye(outer.dim) - outer.support_projector
    leak = _tr_product(inner.matrix, kernel).real
    return leak <= tol * max(1.0, inner.trace)


def d_zero(omega, phi):
    """``tr(phi log phi - phi log omega + omega - phi)``; ``inf`` unless supp phi is in supp omega."""
    omega, phi = as_state(omega), as_state(phi)
    check_same_dim(omega.matrix, phi.matrix)
    if not support_contained(phi, omega):
        return np.inf
    w = phi.eigenvalues
    pos = w > FAITHFUL_TOL
    entropy_term = float(np.sum(w[pos] * np.log(w[pos])))
    cross = _tr_product(phi.matrix, omega.log_on_support).real
    return _clamp(entropy_term - cross + omega.trace - phi.trace)


def d_one(omega, phi):
    """``D_1(omega, phi) = D_0(phi, omega)``."""
    return d_zero(phi, omega)


def d_gamma_continuous(omega, phi, gamma):
    """Evaluate the family on the closed interval, dispatching to the endpoint limits."""
    g = check_gamma(gamma)
    if g == 0:
        return d_zero(omega, phi)
    if g == 1:
        return d_one(omega, phi)
    return d_gamma(omega, phi, g)


divergence = d_gamma_continuous


def ell_gamma(phi, gamma):
    """Embedding ``phi -> phi^gamma / gamma``; ``log phi`` at ``gamma = 0``.

    Raises
    ------
    DomainError
        At ``gamma = 0`` when ``phi`` is not faithful.
    """
    g = check_gamma(gamma)
    phi = as_state(phi)
    if g == 0:
        if not phi.is_faithful:
            raise DomainError("the logarithmic embedding needs a faithful state")
        return phi.log
    return phi.power(g) / g


def hilbert_distance_check(omega, phi):
    """Return ``(D_1/2(omega, phi), 1/2 ||2 omega^1/2 - 2 phi^1/2||_2^2)``; the two agree."""
    omega, phi = as_state(omega), as_state(phi)
    check_same_dim(omega.matrix, phi.matrix)
    diff = 2 * omega.power(0.5) - 2 * phi.power(0.5)
    return d_gamma(omega, phi, 0.5), 0.5 * hs_inner(diff, diff).real


def classical_divergence(p, q, gamma):
    """Commutative-sector formula on weight vectors ``p`` (first slot) and ``q``.

    Uses ``0 log 0 = 0`` and returns ``inf`` on support violations, matching
    :func:`d_gamma_continuous` on ``diag(p)``, ``diag(q)``.
    """
    g = check_gamma(gamma)
    p, q = as_distribution(p), as_distribution(q)
    if p.shape != q.shape:
        raise ValueError("weight vectors differ in length")
    if g == 1:
        p, q, g = q, p, 0.0
    if g == 0:
        if np.any((q > 0) & (p == 0)):
            return np.inf
        m = q > 0
        return float(np.sum(q[m] * np.log(q[m] / p[m])) + p.sum() - q.sum())
    return float(np.sum(p / (1 - g) + q / g - p ** g * q ** (1 - g) / (g * (1 - g))))
