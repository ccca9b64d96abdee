import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from infodyn.constraints import (
    BlockDiagonal,
    Composite,
    Expectation,
    Normalize,
    Support,
    canonicalize,
    constraint_residual,
)
from infodyn.exceptions import InfeasibleError, NotConvergedError, ZeroEvidenceError
from infodyn.matkernel import PAULI_X, PAULI_Z, random_hermitian, random_state, trace_distance
from infodyn.projection import (
    ArgumentOrder,
    bayes_update,
    log_pinched_state,
    luders_equivalence_check,
    luders_weak,
    project,
    pythagorean_residual,
)
from infodyn.states import ProjectorFamily, pinch
from infodyn.verify import grid_minimizer

GIBBS = Expectation((PAULI_Z,), (0.5,), normalize=True)


def test_gibbs_closed_form():
    # tanh(lambda) = 0.5 for the two-level Gibbs state
    lam = np.arctanh(0.5)
    expected = np.diag(np.exp([lam, -lam])) / (2 * np.cosh(lam))
    res = project(np.eye(2) / 2, 0.0, GIBBS)
    assert np.max(np.abs(res.state.matrix - expected)) < 1e-8
    assert np.allclose(expected, np.diag([0.75, 0.25]))
    assert res.residual <= 1e-9


def test_fixed_point():
    rho = np.diag([0.75, 0.25])
    res = project(rho, 0.5, Normalize())
    assert np.array_equal(res.state.matrix, rho)
    assert res.divergence_at_solution == 0.0 and res.iterations == 0


def test_exponential_family_certificate():
    omega = random_state(3, 4)
    x = random_hermitian(3, 5)
    q = Expectation((x,), (np.trace(x).real / 3 + 0.1,), normalize=True)
    res = project(omega, 0.0, q)
    lam0, lam1 = res.multipliers
    expected = sla.expm(sla.logm(omega) + lam0 * np.eye(3) + lam1 * x)
    assert np.max(np.abs(res.state.matrix - expected)) < 1e-8
    assert constraint_residual(res.state, q) <= 1e-9


def test_infeasible_target():
    with pytest.raises(InfeasibleError):
        project(np.eye(2) / 2, 0.0, Expectation((PAULI_Z,), (2.0,), normalize=True))


def test_inconsistent_constraints():
    q = Composite((Expectation((PAULI_Z,), (0.5,)), Expectation((2 * PAULI_Z,), (0.3,)), Normalize()))
    with pytest.raises(InfeasibleError):
        project(np.eye(2) / 2, 0.3, q)


def test_not_converged_reports_diagnostics():
    omega = random_state(3, 2)
    q = Expectation((random_hermitian(3, 3),), (0.1,), normalize=True)
    with pytest.raises(NotConvergedError) as info:
        project(omega, 0.3, q, max_iter=1, tol=1e-14)
    assert info.value.iterations == 1 and info.value.residual > 0


def test_redundant_constraints_are_handled():
    q = Composite((GIBBS, Expectation((2 * PAULI_Z,), (1.0,))))
    res = project(np.eye(2) / 2, 0.0, q)
    assert np.allclose(res.state.matrix, np.diag([0.75, 0.25]), atol=1e-8)
    assert res.multipliers.shape == (3,)


@pytest.mark.parametrize("g", [0.0, 0.3, 0.5, 0.7, 1.0])
@pytest.mark.parametrize("order", ["paper", "reverse"])
def test_brute_force_grid(g, order):
    omega = np.array([[0.7, 0.2], [0.2, 0.3]])
    c = 0.1
    res = project(omega, g, Expectation((PAULI_Z,), (c,), normalize=True), order)
    assert trace_distance(res.state.matrix, grid_minimizer(omega, g, c, order)) < 2e-4


def test_order_duality():
    omega = random_state(3, 9)
    q = Expectation((random_hermitian(3, 1),), (0.2,), normalize=True)
    a = project(omega, 0.3, q, ArgumentOrder.PAPER).state
    b = project(omega, 0.7, q, ArgumentOrder.REVERSE).state
    assert trace_distance(a.matrix, b.matrix) < 1e-7


def test_pythagoras_psi_equals_projection():
    omega = random_state(3, 1)
    q = Expectation((random_hermitian(3, 2),), (0.1,), normalize=True)
    p = project(omega, 0.0, q).state
    assert pythagorean_residual(p, omega, 0.0, q, projection=p) == 0.0


def test_pythagoras_gamma_zero_qubit():
    q = Expectation((PAULI_Z,), (0.3,), normalize=True)
    omega = random_state(2, 17)
    for seed in range(3):
        psi = (np.eye(2) + 0.3 * PAULI_Z + np.random.default_rng(seed).uniform(-0.9, 0.9) * PAULI_X) / 2
        assert pythagorean_residual(psi, omega, 0.0, q) < 1e-6


def test_pythagoras_half_block():
    fam = ProjectorFamily.from_blocks([2, 2])
    omega = random_state(4, 3)
    psi = pinch(random_state(4, 4), fam)
    assert pythagorean_residual(psi, omega, 0.5, BlockDiagonal(fam)) < 1e-6


def test_half_block_projection_closed_form():
    fam = ProjectorFamily.from_blocks([1, 2])
    omega = random_state(3, 8)
    half = pinch(sla.sqrtm(omega), fam).matrix
    res = project(omega, 0.5, BlockDiagonal(fam))
    assert np.max(np.abs(res.state.matrix - half @ half)) < 1e-7


def test_support_constraint():
    p = np.diag([1.0, 1.0, 0.0])
    res = project(random_state(3, 2), 0.0, Composite((Support(p), Normalize())))
    assert abs(res.state.matrix[2, 2]) < 1e-12
    assert abs(np.trace(res.state.matrix) - 1) < 1e-9


def test_luders_examples():
    fam = ProjectorFamily.computational(2)
    assert np.allclose(luders_weak(np.array([[0.5, 0.3], [0.3, 0.5]]), fam).matrix, np.diag([0.5, 0.5]))
    rho = random_state(4, 6)
    fam = ProjectorFamily.from_blocks([2, 2])
    projected, pinched, dist = luders_equivalence_check(rho, fam, "reverse")
    assert dist < 1e-6
    projected, _, _ = luders_equivalence_check(rho, fam, "paper")
    assert trace_distance(projected.matrix, log_pinched_state(rho, fam).matrix) < 1e-6
    # the two rules differ when rho does not commute with the blocks
    assert trace_distance(projected.matrix, pinched.matrix) > 1e-4


def test_luders_commuting_both_orders():
    fam = ProjectorFamily.from_blocks([1, 2])
    rho = pinch(random_state(3, 1), fam)
    for order in ArgumentOrder:
        assert luders_equivalence_check(rho, fam, order)[2] < 1e-8


def test_bayes_examples():
    joint = np.array([[0.4, 0.2], [0.1, 0.3]])
    assert np.max(np.abs(bayes_update(joint, 0) - [2 / 3, 1 / 3])) < 1e-10
    flat = np.array([[0.3, 0.3], [0.2, 0.2]])
    assert np.allclose(bayes_update(flat, 1), [0.5, 0.5], atol=1e-10)
    certain = np.array([[0.5, 0.0], [0.0, 0.5]])
    assert np.allclose(bayes_update(certain, 0), [1.0, 0.0], atol=1e-10)
    with pytest.raises(ZeroEvidenceError):
        bayes_update(np.array([[1.0, 0.0], [0.0, 0.0]]), 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_bayes_is_conditioning(nx, nt, seed):
    rng = np.random.default_rng(seed)
    joint = rng.dirichlet(np.ones(nx * nt)).reshape(nx, nt)
    b = int(rng.integers(nx))
    assert np.max(np.abs(bayes_update(joint, b) - joint[b] / joint[b].sum())) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 4), st.integers(0, 2**32 - 1), st.sampled_from([0.0, 0.5, 1.0]))
def test_idempotence(n, seed, g):
    rng = np.random.default_rng(seed)
    x = random_hermitian(n, rng)
    w = np.linalg.eigvalsh(x)
    q = Expectation((x,), ((w[0] + w[-1]) / 2,), normalize=True)
    first = project(random_state(n, rng), g, q).state
    second = project(first, g, q).state
    assert trace_distance(first.matrix, second.matrix) <= 1e-8


def test_canonicalize_checks_dimensions():
    with pytest.raises(Exception):
        canonicalize(Expectation((np.eye(3),), (1.0,)), 2)
