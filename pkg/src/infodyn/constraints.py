"""Declarative constraint sets for entropic projection.

A constraint set is one of :class:`Expectation`, :class:`BlockDiagonal`,
:class:`Support`, or a :class:`Composite` conjunction of them.  Lagrange
multipliers are never part of the description; the solvers find them.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatchError
from .matkernel import as_hermitian
from .states import PROJECTOR_TOL, ProjectorFamily, StateOperator


@dataclass(frozen=True, eq=False)
class Expectation:
    """Linear constraints ``trace(phi x_k) = c_k``, optionally with ``trace(phi) = 1``."""

    observables: tuple = ()
    targets: tuple = ()
    normalize: bool = False

    def __post_init__(self):
        obs = tuple(as_hermitian(x, atol=1e-10, name="observable") for x in self.observables)
        targets = tuple(float(c) for c in self.targets)
        if len(obs) != len(targets):
            raise ValueError(f"{len(obs)} observables but {len(targets)} targets")
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "targets", targets)


def Normalize():
    """The single constraint ``trace(phi) = 1``."""
    return Expectation(normalize=True)


@dataclass(frozen=True, eq=False)
class BlockDiagonal:
    """``phi = sum_i P_i phi P_i`` for a projector family."""

    family: ProjectorFamily

    def __post_init__(self):
        if not isinstance(self.family, ProjectorFamily):
            object.__setattr__(self, "family", ProjectorFamily(self.family))


@dataclass(frozen=True, eq=False)
class Support:
    """``phi = P phi P``: the support of ``phi`` lies in the range of ``P``."""

    projector: np.ndarray

    def __post_init__(self):
        p = as_hermitian(self.projector, atol=PROJECTOR_TOL, name="support projector")
        if np.max(np.abs(p @ p - p)) > PROJECTOR_TOL:
            raise ValueError("support projector is not idempotent")
        object.__setattr__(self, "projector", p)


@dataclass(frozen=True, eq=False)
class Composite:
    """Conjunction of constraint sets; nested composites are flattened."""

    parts: tuple = field(default_factory=tuple)

    def __post_init__(self):
        flat = []
        for p in self.parts:
            if p is None:
                continue
            if isinstance(p, Composite):
                flat.extend(p.parts)
            elif isinstance(p, (Expectation, BlockDiagonal, Support)):
                flat.append(p)
            else:
                raise TypeError(f"not a constraint set: {p!r}")
        object.__setattr__(self, "parts", tuple(flat))


def as_composite(q):
    if q is None:
        return Composite(())
    if isinstance(q, Composite):
        return q
    return Composite((q,))


@dataclass(frozen=True, eq=False)
class CanonicalConstraints:
    """Flattened view used by the solvers."""

    dim: int
    normalize: bool
    observables: tuple
    targets: tuple
    family: object  # ProjectorFamily or None
    support: object  # projector ndarray or None

    @property
    def is_empty(self):
        return not (self.normalize or self.observables or self.family is not None or self.support is not None)


def _intersect_projectors(ps):
    n = ps[0].shape[0]
    stacked = np.vstack([np.eye(n) - p for p in ps])
    _, s, vh = np.linalg.svd(stacked)
    rank = int(np.sum(s > 1e-9))
    basis = vh[rank:].conj().T
    return basis @ basis.conj().T


def _refine(families):
    """Common refinement of commuting projector families."""
    current = list(families[0])
    for fam in families[1:]:
        nxt = []
        for p in current:
            for q in fam:
                if np.max(np.abs(p @ q - q @ p)) > PROJECTOR_TOL:
                    raise ValueError("block structures in a composite must commute")
                r = p @ q
                if np.trace(r).real > 0.5:
                    nxt.append(r)
        current = nxt
    return ProjectorFamily(current)


def canonicalize(q, dim):
    """Flatten a constraint set and check every operator has dimension ``dim``."""
    q = as_composite(q)
    normalize = False
    obs, targets, fams, sups = [], [], [], []
    for part in q.parts:
        if isinstance(part, Expectation):
            normalize = normalize or part.normalize
            obs.extend(part.observables)
            targets.extend(part.targets)
        elif isinstance(part, BlockDiagonal):
            fams.append(part.family)
        else:
            sups.append(part.projector)
    for m in obs + [f.projectors[0] for f in fams] + sups:
        if m.shape[0] != dim:
            raise DimensionMismatchError(f"constraint operator has dim {m.shape[0]}, state has {dim}")
    family = _refine(fams) if fams else None
    support = _intersect_projectors(sups) if sups else None
    return CanonicalConstraints(dim, normalize, tuple(obs), tuple(targets), family, support)


def constraint_residual(phi, q):
    """Largest violation of any constraint in ``q`` at ``phi``."""
    m = phi.matrix if isinstance(phi, StateOperator) else np.asarray(phi, dtype=complex)
    c = q if isinstance(q, CanonicalConstraints) else canonicalize(q, m.shape[0])
    res = 0.0
    if c.normalize:
        res = max(res, abs(np.trace(m).real - 1.0))
    for x, target in zip(c.observables, c.targets):
        res = max(res, abs(np.sum(m * x.T).real - target))
    if c.family is not None:
        pinched = sum(p @ m @ p for p in c.family)
        res = max(res, float(np.max(np.abs(m - pinched))))
    if c.support is not None:
        p = c.support
        res = max(res, float(np.max(np.abs(m - p @ m @ p))))
    return res


def satisfies(phi, q, tol=1e-9):
    return constraint_residual(phi, q) <= tol
