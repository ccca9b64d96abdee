"""Temporal evolution as a sequence of constrained projections."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .constraints import constraint_residual
from .exceptions import InfeasibleError, NotConvergedError
from .projection import ArgumentOrder, ordered_divergence, project
from .states import FAITHFUL_TOL, as_state, expectation


class ScheduleMode(str, Enum):
    FROM_INITIAL = "from-initial"
    CHAINED = "chained"


@dataclass
class ConstraintSchedule:
    """Times ``t_k`` with constraint sets ``Q_k``.

    ``FROM_INITIAL`` projects the initial state at every step;
    ``CHAINED`` projects the previous output.
    """

    entries: list = field(default_factory=list)
    mode: ScheduleMode = ScheduleMode.FROM_INITIAL

    def __post_init__(self):
        self.mode = ScheduleMode(self.mode)
        self.entries = [(float(t), q) for t, q in self.entries]
        times = [t for t, _ in self.entries]
        if any(not np.isfinite(t) for t in times):
            raise ValueError("schedule times must be finite")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("schedule times must be strictly increasing")

    def __len__(self):
        return len(self.entries)

    @property
    def times(self):
        return [t for t, _ in self.entries]


@dataclass
class TrajectoryStep:
    t: float
    state: object
    divergence_step: float
    constraint_residual: float


@dataclass
class Trajectory:
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __getitem__(self, i):
        return self.steps[i]

    @property
    def times(self):
        return [s.t for s in self.steps]

    @property
    def states(self):
        return [s.state for s in self.steps]


def evolve(omega0, gamma, schedule, order=ArgumentOrder.PAPER, tol=None, max_iter=None):
    """Run ``schedule`` from ``omega0``.

    ``divergence_step`` is the divergence between the state that was
    projected and its projection.  Solver errors are re-raised with the
    failing time stored in their ``t`` attribute.
    """
    omega0 = as_state(omega0)
    if not isinstance(schedule, ConstraintSchedule):
        schedule = ConstraintSchedule(schedule)
    traj = Trajectory()
    current = omega0
    for t, q in schedule.entries:
        source = omega0 if schedule.mode is ScheduleMode.FROM_INITIAL else current
        try:
            res = project(source, gamma, q, order, tol=tol, max_iter=max_iter)
        except (NotConvergedError, InfeasibleError) as exc:
            exc.t = t
            exc.args = (f"{exc.args[0] if exc.args else exc} (at t={t:g})",)
            raise
        current = res.state
        traj.steps.append(
            TrajectoryStep(t, current, ordered_divergence(source, current, gamma, order), constraint_residual(current, q))
        )
    return traj


def von_neumann_entropy(rho):
    """``-trace(rho log rho)`` with ``0 log 0 = 0``."""
    w = as_state(rho).eigenvalues
    w = w[w > FAITHFUL_TOL]
    return float(-np.sum(w * np.log(w)))


def trajectory_summary(traj, observables=()):
    """Rows ``(t, eigenvalues ascending, entropy, expectations of observables)``."""
    rows = []
    for step in traj:
        rows.append(
            {
                "t": step.t,
                "eigenvalues": np.array(step.state.eigenvalues, dtype=float),
                "entropy": von_neumann_entropy(step.state),
                "expectations": [expectation(step.state, x) for x in observables],
            }
        )
    return rows
