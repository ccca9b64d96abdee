"""Dense Hermitian spectral calculus and random test instances.

Everything here works on plain ``numpy`` arrays.  Hermitian operators are
stored as read-only complex arrays that have been symmetrized exactly, so that
long iterative computations never accumulate anti-Hermitian drift.
"""

from typing import NamedTuple

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    DomainError,
    EigenSolverError,
    NotHermitianError,
)

#: Eigenvalues in ``[-CLIP_TOL, 0)`` are treated as roundoff and clipped to 0.
CLIP_TOL = 1e-12
HERMITIAN_ATOL = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(a):
    a.setflags(write=False)
    return a


def symmetrize(a):
    """Return the exact Hermitian part ``(A + A^dagger) / 2``."""
    a = np.asarray(a, dtype=complex)
    return (a + a.conj().T) / 2


def as_matrix(a, name="matrix"):
    """Validate a square, finite complex matrix."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatchError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_hermitian(a, atol=HERMITIAN_ATOL, name="operator"):
    """Validate ``a`` as Hermitian and return its canonical (symmetrized, read-only) form.

    Parameters
    ----------
    a : array_like
        Square matrix.
    atol : float
        Largest tolerated entry of ``A - A^dagger``.

    Raises
    ------
    NotHermitianError
        If ``A`` differs from its adjoint by more than ``atol``.
    """
    a = as_matrix(a, name)
    err = np.max(np.abs(a - a.conj().T))
    if err > atol:
        raise NotHermitianError(f"{name} is not Hermitian (max |A - A^dagger| = {err:.3g})")
    return _frozen(symmetrize(a))


def check_same_dim(*mats):
    dims = {np.shape(m)[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatchError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


class SpectralDecomposition(NamedTuple):
    """Eigenvalues (ascending) and a unitary matrix of eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self, values=None):
        """Return ``V diag(values) V^dagger`` (``values`` defaults to the eigenvalues)."""
        w = self.eigenvalues if values is None else values
        v = self.eigenvectors
        return (v * w) @ v.conj().T


def eig_hermitian(h):
    """Eigen-decompose a Hermitian matrix.

    Raises
    ------
    EigenSolverError
        If LAPACK fails to converge, which only happens for numerically
        pathological input.
    """
    h = symmetrize(as_matrix(h))
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc
    return SpectralDecomposition(_frozen(w), _frozen(v))


class SpectralFunction:
    """Real function applied to eigenvalues, with an explicit domain check."""

    name = "f"

    def check_domain(self, w):
        pass

    def values(self, w):
        raise NotImplementedError

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        self.check_domain(w)
        return self.values(w)

    def __repr__(self):
        return f"{type(self).__name__}()"


def _clip_small_negative(w, clip_tol):
    if np.any(w < -clip_tol):
        raise DomainError(f"negative eigenvalue {w.min():.3g} below clipping threshold {clip_tol:g}")
    return np.where(w < 0, 0.0, w)


class Power(SpectralFunction):
    """``x ** exponent``; roundoff-negative eigenvalues are clipped to zero first."""

    def __init__(self, exponent, clip_tol=CLIP_TOL):
        self.exponent = float(exponent)
        self.clip_tol = clip_tol

    def check_domain(self, w):
        if not float(self.exponent).is_integer():
            _clip_small_negative(w, self.clip_tol)
        if self.exponent < 0 and np.any(np.abs(w) <= self.clip_tol):
            raise DomainError("negative power of a singular operator")

    def values(self, w):
        if float(self.exponent).is_integer():
            return w ** self.exponent
        return _clip_small_negative(w, self.clip_tol) ** self.exponent

    def __repr__(self):
        return f"Power({self.exponent:g})"


class Log(SpectralFunction):
    def __init__(self, clip_tol=CLIP_TOL):
        self.clip_tol = clip_tol

    def check_domain(self, w):
        if np.any(w <= self.clip_tol):
            raise DomainError(f"log of operator with eigenvalue {w.min():.3g} (support violation)")

    def values(self, w):
        return np.log(w)


class Exp(SpectralFunction):
    def values(self, w):
        return np.exp(w)


class InverseShift(SpectralFunction):
    """``1 / (x - shift)``, undefined when the shift touches the spectrum."""

    def __init__(self, shift, tol=CLIP_TOL):
        self.shift = float(shift)
        self.tol = tol

    def check_domain(self, w):
        if np.any(np.abs(w - self.shift) <= self.tol):
            raise DomainError(f"shift {self.shift:g} lies on the spectrum")

    def values(self, w):
        return 1.0 / (w - self.shift)

    def __repr__(self):
        return f"InverseShift({self.shift:g})"


def spectral_map(h, f):
    """Apply a real function to a Hermitian operator through its eigenbasis.

    Parameters
    ----------
    h : array_like or SpectralDecomposition
        Hermitian operator, or a precomputed decomposition of one.
    f : SpectralFunction
        One of :class:`Power`, :class:`Log`, :class:`Exp`, :class:`InverseShift`.

    Returns
    -------
    ndarray
        The Hermitian matrix ``V f(Lambda) V^dagger``.
    """
    dec = h if isinstance(h, SpectralDecomposition) else eig_hermitian(h)
    return _frozen(symmetrize(dec.reconstruct(f(dec.eigenvalues))))


def divided_differences(w, f, df, rtol=1e-6):
    """First divided differences ``(f(a) - f(b)) / (a - b)`` with confluent limit ``df``.

    This is the Daleckii-Krein kernel of the Frechet derivative of ``f`` at a
    Hermitian matrix with eigenvalues ``w``.
    """
    w = np.asarray(w, dtype=float)
    fw = f(w)
    a, b = np.meshgrid(w, w, indexing="ij")
    diff = a - b
    close = np.abs(diff) <= rtol * np.maximum(np.abs(a), np.abs(b)) + 1e-300
    safe = np.where(close, 1.0, diff)
    k = (fw[:, None] - fw[None, :]) / safe
    if np.any(close):
        mid = (a + b) / 2
        k = np.where(close, df(mid), k)
    return k


def frechet_derivative(dec, kernel, direction):
    """Apply ``V (K o (V^dagger E V)) V^dagger`` for a divided-difference kernel ``K``."""
    v = dec.eigenvectors
    e = v.conj().T @ direction @ v
    return symmetrize(v @ (kernel * e) @ v.conj().T)


def hs_inner(a, b):
    """Hilbert-Schmidt inner product ``trace(B^dagger A)``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} differ")
    return complex(np.vdot(b, a))


def trace_norm(a):
    return float(np.sum(np.abs(np.linalg.eigvalsh(symmetrize(a)))))


def trace_distance(a, b):
    """Half the trace norm of ``A - B``."""
    return 0.5 * trace_norm(np.asarray(a) - np.asarray(b))


def rng_from(seed):
    """Return a ``numpy`` Generator from an integer seed or pass a Generator through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _ginibre(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_hermitian(dim, seed=None):
    rng = rng_from(seed)
    return symmetrize(_ginibre(rng, dim, dim))


def random_state(dim, seed=None, faithful=True, rank=None):
    """Random density matrix ``G G^dagger / trace(G G^dagger)`` with Gaussian ``G``.

    With ``faithful=True`` the result has full rank almost surely.  With
    ``faithful=False`` it has rank ``rank`` (default ``dim - 1``, at least 1).
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = rng_from(seed)
    if rank is None:
        rank = dim if faithful else max(dim - 1, 1)
    g = _ginibre(rng, dim, rank)
    rho = g @ g.conj().T
    return _frozen(symmetrize(rho / np.trace(rho).real))


def random_unitary(dim, seed=None):
    """Haar-random unitary via QR of a Ginibre matrix with phase correction."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = rng_from(seed)
    q, r = np.linalg.qr(_ginibre(rng, dim, dim))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_isometry(dim_in, dim_out, seed=None):
    if dim_out < dim_in:
        raise ValueError("an isometry needs dim_out >= dim_in")
    return random_unitary(dim_out, seed)[:, :dim_in]


def random_kraus(dim_in, dim_out, k, seed=None):
    """Kraus operators of a random CPTP map, cut from a Haar isometry.

    A Haar isometry ``W`` of shape ``(k * dim_out, dim_in)`` is split into
    ``k`` stacked blocks ``K_i`` of shape ``(dim_out, dim_in)``, so that
    ``sum K_i^dagger K_i = W^dagger W = I``.
    """
    if k < 1 or dim_in < 1 or dim_out < 1:
        raise ValueError("dimensions and number of Kraus operators must be positive")
    if k * dim_out < dim_in:
        raise ValueError("k * dim_out must be at least dim_in")
    from .states import KrausChannel

    w = random_isometry(dim_in, k * dim_out, seed)
    return KrausChannel([w[i * dim_out:(i + 1) * dim_out] for i in range(k)])
