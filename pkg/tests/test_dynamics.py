import numpy as np
import pytest

from infodyn.constraints import Expectation
from infodyn.dynamics import ConstraintSchedule, evolve, trajectory_summary, von_neumann_entropy
from infodyn.exceptions import InfeasibleError
from infodyn.matkernel import PAULI_Z, random_state, trace_distance
from infodyn.projection import project
from infodyn.states import StateOperator


def z_target(c):
    return Expectation((PAULI_Z,), (c,), normalize=True)


def test_empty_constraints_constant():
    rho = random_state(3, 1)
    traj = evolve(rho, 0.5, ConstraintSchedule([(0.0, None), (1.0, None)]))
    assert all(np.array_equal(s.state.matrix, rho) for s in traj)


@pytest.mark.parametrize("mode", ["chained", "from-initial"])
def test_gibbs_steps(mode):
    traj = evolve(np.eye(2) / 2, 0.0, ConstraintSchedule([(1, z_target(0.2)), (2, z_target(0.4)), (3, z_target(0.6))], mode))
    for step, c in zip(traj, (0.2, 0.4, 0.6)):
        assert np.max(np.abs(step.state.matrix - np.diag([(1 + c) / 2, (1 - c) / 2]))) < 1e-8
        assert step.constraint_residual <= 1e-9


def test_single_entry_equals_project():
    rho = random_state(2, 5)
    traj = evolve(rho, 0.3, ConstraintSchedule([(0.0, z_target(0.1))]))
    assert np.array_equal(traj[0].state.matrix, project(rho, 0.3, z_target(0.1)).state.matrix)


def test_from_initial_permutation_covariance():
    rho = random_state(2, 3)
    entries = [(1, z_target(0.1)), (2, z_target(-0.3)), (3, z_target(0.5))]
    a = evolve(rho, 0.5, ConstraintSchedule(entries))
    swapped = [(1, entries[2][1]), (2, entries[0][1]), (3, entries[1][1])]
    b = evolve(rho, 0.5, ConstraintSchedule(swapped))
    for i, j in ((0, 1), (1, 2), (2, 0)):
        assert trace_distance(a[i].state.matrix, b[j].state.matrix) < 1e-12


def test_chained_repeat_is_stationary():
    rho = random_state(3, 4)
    x = np.diag([1.0, 0.0, -1.0])
    q = Expectation((x,), (0.2,), normalize=True)
    traj = evolve(rho, 0.5, ConstraintSchedule([(1, q), (2, q), (3, q)], "chained"))
    assert trace_distance(traj[1].state.matrix, traj[2].state.matrix) <= 1e-8
    for step in traj:
        StateOperator(step.state.matrix)


def test_schedule_validation():
    with pytest.raises(ValueError):
        ConstraintSchedule([(1.0, None), (1.0, None)])
    with pytest.raises(ValueError):
        ConstraintSchedule([], mode="sideways")


def test_error_carries_time():
    with pytest.raises(InfeasibleError) as info:
        evolve(np.eye(2) / 2, 0.0, ConstraintSchedule([(1.0, z_target(0.2)), (2.5, z_target(3.0))]))
    assert info.value.t == 2.5


def test_entropy_values():
    assert von_neumann_entropy(np.diag([1.0, 0.0])) == 0.0
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(0.693147, abs=1e-6)


def test_summary_rows():
    traj = evolve(np.eye(2) / 2, 0.0, ConstraintSchedule([(0.0, None), (1.0, None)]))
    rows = trajectory_summary(traj, [PAULI_Z])
    assert rows[0]["entropy"] == rows[1]["entropy"] == pytest.approx(np.log(2))
    assert rows[0]["expectations"] == [0.0]
