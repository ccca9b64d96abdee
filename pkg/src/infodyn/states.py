"""Positive operators, projector families, Kraus channels and the classical sector."""

from functools import cached_property

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    NotCommutativeError,
    NotNormalizedError,
    NotPositiveError,
)
from .matkernel import (
    CLIP_TOL,
    Log,
    Power,
    SpectralDecomposition,
    as_hermitian,
    as_matrix,
    check_same_dim,
    eig_hermitian,
    spectral_map,
    symmetrize,
)

NORMALIZATION_TOL = 1e-10
FAITHFUL_TOL = 1e-12
PROJECTOR_TOL = 1e-10


class StateOperator:
    """A positive semidefinite operator, normalized or not.

    Instances are immutable.  The eigendecomposition and faithfulness are
    computed once and cached, since nearly every divergence needs them.

    Parameters
    ----------
    matrix : array_like
        Hermitian matrix with no eigenvalue below ``-clip_tol``.
    require_normalized : bool
        Raise :class:`NotNormalizedError` unless ``|trace - 1| <= 1e-10``.
    clip_tol : float
        Eigenvalues in ``[-clip_tol, 0)`` are treated as roundoff and set to 0.
    """

    def __init__(self, matrix, require_normalized=False, clip_tol=CLIP_TOL):
        if isinstance(matrix, StateOperator):
            matrix = matrix.matrix
        h = as_hermitian(matrix, atol=max(1e-12, 1e-12 * float(np.max(np.abs(matrix), initial=1.0))), name="state")
        dec = eig_hermitian(h)
        w = dec.eigenvalues
        if w[0] < -clip_tol:
            raise NotPositiveError(f"state has negative eigenvalue {w[0]:.6g}")
        if w[0] < 0:
            w = np.where(w < 0, 0.0, w)
            w.setflags(write=False)
            dec = SpectralDecomposition(w, dec.eigenvectors)
            h = symmetrize(dec.reconstruct())
            h.setflags(write=False)
        self._matrix = h
        self._dec = dec
        self.clip_tol = clip_tol
        if require_normalized and not self.normalized:
            raise NotNormalizedError(f"trace {self.trace:.12g} differs from 1")

    def __repr__(self):
        return f"StateOperator(dim={self.dim}, trace={self.trace:.6g}, faithful={self.is_faithful})"

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._matrix, dtype=dtype)

    @property
    def matrix(self):
        return self._matrix

    @property
    def dim(self):
        return self._matrix.shape[0]

    @property
    def decomposition(self):
        return self._dec

    @property
    def eigenvalues(self):
        return self._dec.eigenvalues

    @property
    def eigenvectors(self):
        return self._dec.eigenvectors

    @cached_property
    def trace(self):
        return float(np.trace(self._matrix).real)

    @property
    def normalized(self):
        return abs(self.trace - 1.0) <= NORMALIZATION_TOL

    @cached_property
    def is_faithful(self):
        return bool(self.eigenvalues[0] > FAITHFUL_TOL)

    @cached_property
    def rank(self):
        return int(np.sum(self.eigenvalues > FAITHFUL_TOL))

    @cached_property
    def support_projector(self):
        v = self.eigenvectors[:, self.eigenvalues > FAITHFUL_TOL]
        return v @ v.conj().T

    def power(self, exponent):
        """Spectral power; eigenvalue 0 maps to 0 for positive exponents."""
        cache = self.__dict__.setdefault("_powers", {})
        key = float(exponent)
        if key not in cache:
            cache[key] = spectral_map(self._dec, Power(exponent, self.clip_tol))
        return cache[key]

    @cached_property
    def log(self):
        """``log`` of the state; raises :class:`DomainError` unless faithful."""
        return spectral_map(self._dec, Log(FAITHFUL_TOL))

    @cached_property
    def log_on_support(self):
        """``log`` restricted to the support (zero on the kernel)."""
        w = self.eigenvalues
        pos = w > FAITHFUL_TOL
        vals = np.zeros_like(w)
        vals[pos] = np.log(w[pos])
        return symmetrize(self._dec.reconstruct(vals))

    def normalize(self):
        return StateOperator(self._matrix / self.trace)


def make_state(h, require_normalized=False):
    """Validate a Hermitian matrix as a (possibly non-normalized) state."""
    return StateOperator(h, require_normalized=require_normalized)


def as_state(rho):
    return rho if isinstance(rho, StateOperator) else StateOperator(rho)


class ProjectorFamily:
    """Orthogonal projectors ``P_i`` resolving the identity.

    Raises ``ValueError`` unless every ``P_i`` is a Hermitian idempotent,
    the projectors are mutually orthogonal, and they sum to the identity,
    all within ``1e-10``.
    """

    def __init__(self, projectors, tol=PROJECTOR_TOL):
        ps = [as_hermitian(p, atol=tol, name="projector") for p in projectors]
        if not ps:
            raise ValueError("projector family is empty")
        n = check_same_dim(*ps)
        for i, p in enumerate(ps):
            if np.max(np.abs(p @ p - p)) > tol:
                raise ValueError(f"P_{i} is not idempotent")
            for j in range(i):
                if np.max(np.abs(p @ ps[j])) > tol:
                    raise ValueError(f"P_{i} and P_{j} are not orthogonal")
        if np.max(np.abs(sum(ps) - np.eye(n))) > tol:
            raise ValueError("projectors do not sum to the identity")
        self.projectors = tuple(ps)
        self.dim = n

    def __iter__(self):
        return iter(self.projectors)

    def __len__(self):
        return len(self.projectors)

    def __repr__(self):
        ranks = [int(round(np.trace(p).real)) for p in self.projectors]
        return f"ProjectorFamily(dim={self.dim}, ranks={ranks})"

    @classmethod
    def from_blocks(cls, sizes):
        """Coordinate projectors onto consecutive blocks of the given sizes."""
        n = int(sum(sizes))
        ps, start = [], 0
        for s in sizes:
            p = np.zeros((n, n), dtype=complex)
            idx = np.arange(start, start + s)
            p[idx, idx] = 1
            ps.append(p)
            start += s
        return cls(ps)

    @classmethod
    def from_index_sets(cls, index_sets, dim):
        ps = []
        for idx in index_sets:
            p = np.zeros((dim, dim), dtype=complex)
            p[list(idx), list(idx)] = 1
            ps.append(p)
        return cls(ps)

    @classmethod
    def computational(cls, dim):
        return cls.from_blocks([1] * dim)

    @classmethod
    def from_unitary(cls, u, sizes):
        """Block projectors expressed in the basis given by the columns of ``u``."""
        u = np.asarray(u, dtype=complex)
        base = cls.from_blocks(sizes)
        return cls([u @ p @ u.conj().T for p in base])

    def commutes_with(self, a, tol=PROJECTOR_TOL):
        a = np.asarray(a)
        return all(np.max(np.abs(p @ a - a @ p)) <= tol for p in self.projectors)


class KrausChannel:
    """CPTP map ``rho -> sum_i K_i rho K_i^dagger``.

    Raises ``ValueError`` unless ``sum_i K_i^dagger K_i`` equals the identity
    within ``1e-10``.
    """

    def __init__(self, operators, tol=1e-10):
        ks = [np.asarray(k, dtype=complex) for k in operators]
        if not ks:
            raise ValueError("Kraus family is empty")
        shapes = {k.shape for k in ks}
        if len(shapes) != 1 or ks[0].ndim != 2:
            raise DimensionMismatchError(f"Kraus operators have inconsistent shapes {sorted(shapes)}")
        self.dim_out, self.dim_in = ks[0].shape
        total = sum(k.conj().T @ k for k in ks)
        err = np.max(np.abs(total - np.eye(self.dim_in)))
        if err > tol:
            raise ValueError(f"Kraus family is not trace preserving (error {err:.3g})")
        for k in ks:
            k.setflags(write=False)
        self.operators = tuple(ks)

    def __len__(self):
        return len(self.operators)

    def __repr__(self):
        return f"KrausChannel({self.dim_in} -> {self.dim_out}, {len(self)} operators)"

    def __call__(self, rho):
        return apply_channel(self, rho)

    @classmethod
    def identity(cls, dim):
        return cls([np.eye(dim)])

    @classmethod
    def from_projectors(cls, family):
        return cls(list(family))


def _state_matrix(rho):
    return rho.matrix if isinstance(rho, StateOperator) else as_matrix(rho, "state")


def pinch(rho, family):
    """Return ``sum_i P_i rho P_i``."""
    m = _state_matrix(rho)
    if m.shape[0] != family.dim:
        raise DimensionMismatchError(f"state dim {m.shape[0]} != projector dim {family.dim}")
    return StateOperator(sum(p @ m @ p for p in family))


def apply_channel(channel, rho):
    """Return ``sum_i K_i rho K_i^dagger``."""
    m = _state_matrix(rho)
    if m.shape[0] != channel.dim_in:
        raise DimensionMismatchError(f"state dim {m.shape[0]} != channel input dim {channel.dim_in}")
    out = sum(k @ m @ k.conj().T for k in channel.operators)
    return StateOperator(out)


def as_distribution(p, normalized=False, tol=1e-12):
    """Validate a finite non-negative weight vector."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("a distribution is a non-empty 1-d array")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("distribution weights must be finite and non-negative")
    if normalized and abs(p.sum() - 1.0) > tol:
        raise NotNormalizedError(f"weights sum to {p.sum():.15g}")
    return p


def embed_classical(p):
    """Embed a weight vector as the diagonal state ``diag(p)``."""
    p = as_distribution(p)
    return StateOperator(np.diag(p.astype(complex)))


def extract_classical(rho, tol=1e-10):
    """Return the diagonal of a diagonal state.

    Raises
    ------
    NotCommutativeError
        If an off-diagonal entry exceeds ``tol`` in magnitude.
    """
    m = _state_matrix(rho)
    off = m - np.diag(np.diagonal(m))
    if np.max(np.abs(off), initial=0.0) > tol:
        raise NotCommutativeError("state has off-diagonal entries; it is not in the commutative sector")
    return np.diagonal(m).real.copy()


def expectation(rho, x):
    """Non-normalized expectation value ``trace(rho x)``."""
    m = _state_matrix(rho)
    x = np.asarray(x, dtype=complex)
    check_same_dim(m, x)
    val = np.sum(m * x.T)
    return float(val.real)
