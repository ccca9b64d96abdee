"""Constrained entropic projection and its classical and measurement-rule special cases.

``project`` minimizes ``D_gamma(omega, phi)`` (or ``D_gamma(phi, omega)``)
over the states ``phi`` allowed by a constraint set.  Two regimes are used:

* ``gamma = 0`` with expectation constraints: the minimizer is the
  exponential family ``exp(log omega + sum_k lambda_k x_k)``; the multipliers
  are found by damped Newton ascent on the concave dual.
* everything else: projected gradient descent over the affine constraint
  set, with Barzilai-Borwein steps, a non-monotone Armijo line search and
  backtracking that keeps the iterate strictly positive definite.

Before solving, faces of the positive cone forced by the constraints are
removed (e.g. ``trace(phi) = 1`` together with ``trace(phi P) = 1`` forces
``phi = P phi P``), so that boundary solutions such as exact conditioning
are computed in a reduced space where they are interior.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constraints import (
    BlockDiagonal,
    Composite,
    Expectation,
    canonicalize,
    constraint_residual,
)
from .divergence import check_gamma, d_gamma_continuous
from .exceptions import InfeasibleError, NotConvergedError, ZeroEvidenceError
from .matkernel import divided_differences, symmetrize, trace_distance
from .states import (
    FAITHFUL_TOL,
    StateOperator,
    as_distribution,
    as_state,
    extract_classical,
    pinch,
)

NEWTON_TOL = 1e-9
GRADIENT_TOL = 1e-7
NEWTON_MAX_ITER = 200
GRADIENT_MAX_ITER = 5000
FACE_TOL = 1e-12
NONMONOTONE_MEMORY = 10


class ArgumentOrder(str, Enum):
    """Which slot of the divergence is minimized over.

    ``PAPER`` minimizes ``D_gamma(omega, phi)`` over ``phi``; ``REVERSE``
    minimizes ``D_gamma(phi, omega)``, which equals ``D_(1-gamma)(omega, phi)``.
    """

    PAPER = "paper"
    REVERSE = "reverse"


def effective_gamma(gamma, order):
    g = check_gamma(gamma)
    return g if ArgumentOrder(order) is ArgumentOrder.PAPER else 1.0 - g


def ordered_divergence(omega, phi, gamma, order):
    """Divergence in the slot order selected by ``order``."""
    if ArgumentOrder(order) is ArgumentOrder.PAPER:
        return d_gamma_continuous(omega, phi, gamma)
    return d_gamma_continuous(phi, omega, gamma)


@dataclass
class ProjectionResult:
    state: StateOperator
    multipliers: np.ndarray
    iterations: int
    residual: float
    divergence_at_solution: float
    method: str = ""
    constraint_residual: float = 0.0


# ---------------------------------------------------------------------------
# reduction to the face of the positive cone selected by the constraints


def _range_basis(p, tol=0.5):
    w, v = np.linalg.eigh(symmetrize(p))
    return v[:, w > tol]


def _intersect_ranges(w, p):
    """Orthonormal basis of ``range(W) ∩ range(P)`` for an isometry ``W``."""
    w_, v = np.linalg.eigh(symmetrize(w.conj().T @ p @ w))
    return w @ v[:, w_ > 1 - 1e-9]


def _face_from_expectation(xr, target, normalize):
    """Eigenvector basis of the face forced by one expectation constraint, or None."""
    w, v = np.linalg.eigh(symmetrize(xr))
    tol = FACE_TOL * max(1.0, float(np.max(np.abs(w))))
    if normalize:
        if target > w[-1] + 1e-9 * max(1.0, abs(w[-1])) or target < w[0] - 1e-9 * max(1.0, abs(w[0])):
            raise InfeasibleError(f"target {target:g} outside the spectrum range [{w[0]:g}, {w[-1]:g}]")
        if target >= w[-1] - tol:
            return v[:, w >= w[-1] - 1e-9]
        if target <= w[0] + tol:
            return v[:, w <= w[0] + 1e-9]
    elif abs(target) <= tol:
        if w[0] >= -tol:
            return v[:, w <= 1e-9]
        if w[-1] <= tol:
            return v[:, w >= -1e-9]
    return None


class _Reduction:
    """Isometry ``W`` onto the face, with block index sets in reduced coordinates."""

    def __init__(self, omega, canon, gamma_e):
        n = canon.dim
        w = np.eye(n, dtype=complex)
        if canon.support is not None:
            w = _range_basis(canon.support)
        if gamma_e == 0 and not omega.is_faithful:
            w = _intersect_ranges(w, omega.support_projector)
        changed = True
        while changed and w.shape[1] > 0:
            changed = False
            for x, c in zip(canon.observables, canon.targets):
                face = _face_from_expectation(w.conj().T @ x @ w, c, canon.normalize)
                if face is not None and face.shape[1] < w.shape[1]:
                    w = w @ face
                    changed = True
        if w.shape[1] == 0:
            raise InfeasibleError("the constraints leave no admissible support")
        if gamma_e == 1:
            outside = omega.matrix - w @ (w.conj().T @ omega.matrix @ w) @ w.conj().T
            if np.max(np.abs(outside)) > 1e-10 * max(1.0, omega.trace):
                raise InfeasibleError("divergence is infinite on the whole feasible set (support of omega not admissible)")
        self.blocks = None
        if canon.family is not None:
            pw = w @ w.conj().T
            parts, blocks, start = [], [], 0
            for p in canon.family:
                if np.max(np.abs(p @ pw - pw @ p)) > 1e-9:
                    raise ValueError("support restriction must commute with the block structure")
                b = _range_basis(pw @ p @ pw)
                if b.shape[1]:
                    parts.append(b)
                    blocks.append(np.arange(start, start + b.shape[1]))
                    start += b.shape[1]
            w = np.hstack(parts)
            self.blocks = blocks
        self.w = w
        self.dim = w.shape[1]

    def compress(self, a):
        return symmetrize(self.w.conj().T @ a @ self.w)

    def lift(self, y):
        return symmetrize(self.w @ y @ self.w.conj().T)


def _hermitian_basis(r, blocks=None):
    """HS-orthonormal basis of (block-diagonal) Hermitian r x r matrices, shape (m, r, r)."""
    if blocks is None:
        blocks = [np.arange(r)]
    basis = []
    for idx in blocks:
        for a_pos, a in enumerate(idx):
            e = np.zeros((r, r), dtype=complex)
            e[a, a] = 1
            basis.append(e)
            for b in idx[a_pos + 1:]:
                e = np.zeros((r, r), dtype=complex)
                e[a, b] = e[b, a] = 1 / np.sqrt(2)
                basis.append(e)
                e = np.zeros((r, r), dtype=complex)
                e[a, b] = -1j / np.sqrt(2)
                e[b, a] = 1j / np.sqrt(2)
                basis.append(e)
    return np.array(basis)


class _AffineChart:
    """Feasible affine set ``{t : a t = c}`` in coordinates of an orthonormal basis."""

    def __init__(self, basis, mats, targets):
        self.basis = basis
        m, r, _ = basis.shape
        self.r = r
        self._bt = basis.transpose(0, 2, 1).reshape(m, r * r)
        a = np.array([self.coords(x) for x in mats]).reshape(len(mats), m)
        c = np.asarray(targets, dtype=float)
        if len(mats):
            u, s, vt = np.linalg.svd(a)
            rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
        else:
            u, s, vt = np.zeros((0, 0)), np.zeros(0), np.eye(m)
            rank = 0
        self.u = u[:, :rank]
        self.t0 = vt[:rank].T @ ((self.u.T @ c) / s[:rank]) if rank else np.zeros(m)
        if len(mats) and np.max(np.abs(a @ self.t0 - c)) > 1e-9 * max(1.0, np.max(np.abs(c))):
            raise InfeasibleError("inconsistent linear constraints")
        self.null = vt[rank:].T
        self.a = a
        self.c = c

    def coords(self, y):
        return (self._bt @ np.asarray(y, dtype=complex).ravel()).real

    def matrix(self, t):
        return symmetrize(np.tensordot(t, self.basis, axes=1))

    def project(self, t):
        return self.t0 + self.null @ (self.null.T @ (t - self.t0))


# ---------------------------------------------------------------------------
# objectives in reduced coordinates


class _Objective:
    """``Y -> D_gamma_e(omega, W Y W^dagger)`` and its Hermitian gradient."""

    def __init__(self, gamma_e, omega, red):
        self.g = gamma_e
        self.trace_omega = omega.trace
        r = red.dim
        self.eye = np.eye(r)
        if gamma_e == 0:
            self.ref = red.compress(omega.log_on_support)
        elif gamma_e == 1:
            self.ref = red.compress(omega.matrix)
            w = omega.eigenvalues
            pos = w > FAITHFUL_TOL
            self.entropy = float(np.sum(w[pos] * np.log(w[pos])))
        else:
            self.ref = red.compress(omega.power(gamma_e))

    def __call__(self, y, need_grad=True):
        w, v = np.linalg.eigh(y)
        if w[0] <= 0:
            return np.inf, None
        g = self.g
        ref = self.ref
        if g == 0:
            logy = (v * np.log(w)) @ v.conj().T
            f = float(np.sum(w * np.log(w)) - np.sum(y * ref.T).real + self.trace_omega - np.sum(w))
            grad = symmetrize(logy - ref) if need_grad else None
            return f, grad
        ref_hat = v.conj().T @ ref @ v
        if g == 1:
            f = float(self.entropy - np.sum(np.diag(ref_hat).real * np.log(w)) + np.sum(w) - self.trace_omega)
            if not need_grad:
                return f, None
            k = divided_differences(w, np.log, lambda x: 1.0 / x)
            return f, symmetrize(self.eye - v @ (k * ref_hat) @ v.conj().T)
        p = 1.0 - g
        f = float(self.trace_omega / p + np.sum(w) / g - np.sum(np.diag(ref_hat).real * w ** p) / (g * p))
        if not need_grad:
            return f, None
        k = divided_differences(w, lambda x: x ** p, lambda x: p * x ** (p - 1))
        return f, symmetrize(self.eye / g - v @ (k * ref_hat) @ v.conj().T / (g * p))


# ---------------------------------------------------------------------------
# solvers


def _dual_newton(ref, mats, targets, tol, max_iter):
    """Find ``lambda`` with ``trace(exp(ref + sum lambda_i A_i) A_i) = c_i``.

    Returns ``(Y, lambda, iterations, residual)``.
    """
    k = len(mats)
    c = np.asarray(targets, dtype=float)
    lam = np.zeros(k)

    def evaluate(lam):
        h = ref + sum((li * a for li, a in zip(lam, mats)), np.zeros_like(ref))
        w, v = np.linalg.eigh(symmetrize(h))
        with np.errstate(over="ignore", invalid="ignore"):
            e = np.exp(w)
            y = (v * e) @ v.conj().T
            expect = np.array([np.sum(y * a.T).real for a in mats])
            dual = -np.sum(e) + lam @ c
        if not np.isfinite(dual) or not np.all(np.isfinite(expect)):
            return None
        return y, w, v, expect, dual

    cur = evaluate(lam)
    if cur is None:
        raise InfeasibleError("reference operator overflows the exponential family")
    for it in range(max_iter + 1):
        y, w, v, expect, dual = cur
        grad = c - expect
        res = float(np.max(np.abs(grad), initial=0.0))
        if res <= tol:
            return y, lam, it, res
        if it == max_iter:
            break
        kern = divided_differences(w, np.exp, np.exp)
        hats = [v.conj().T @ a @ v for a in mats]
        jac = np.array([[np.sum(np.conj(hi) * hj * kern).real for hj in hats] for hi in hats])
        try:
            step = np.linalg.solve(jac, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, grad, rcond=None)[0]
        s = 1.0
        while True:
            new = evaluate(lam + s * step)
            if new is not None:
                new_res = np.max(np.abs(c - new[3]))
                if new[4] >= dual + 1e-4 * s * (grad @ step) or new_res < (1 - 1e-4 * s) * res:
                    break
            s /= 2
            if s < 1e-14:
                raise InfeasibleError(
                    "dual Newton stalled; the constraint targets are likely unattainable",
                    residual=res,
                    iterations=it,
                )
        lam = lam + s * step
        cur = new
        if np.max(np.abs(lam)) > 1e8:
            raise InfeasibleError("multipliers diverge", residual=res, iterations=it)
    raise NotConvergedError(f"dual Newton did not reach tol={tol:g}", residual=res, iterations=max_iter)


def _projected_gradient(objective, chart, t_start, tol, max_iter):
    """Minimize ``objective`` over the affine chart from a strictly feasible start."""
    null = chart.null
    z = np.zeros(null.shape[1])

    def at(z):
        return chart.matrix(chart.t0 + null @ z + null @ (null.T @ (t_start - chart.t0)))

    f, gmat = objective(at(z))
    if not np.isfinite(f):
        raise InfeasibleError("starting point is not positive definite")
    g = null.T @ chart.coords(gmat)
    hist = [f]
    alpha = 1.0 / max(1.0, np.linalg.norm(g))
    gnorm = np.linalg.norm(g)
    for it in range(max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            return at(z), gmat, it, gnorm
        if it == max_iter:
            break
        fref = max(hist[-NONMONOTONE_MEMORY:])
        step = alpha
        while True:
            z_new = z - step * g
            f_new, g_new_mat = objective(at(z_new))
            if np.isfinite(f_new) and f_new <= fref - 1e-4 * step * gnorm ** 2:
                break
            step /= 2
            if step < 1e-30:
                raise NotConvergedError(
                    f"line search failed at gradient norm {gnorm:.3g}", residual=gnorm, iterations=it
                )
        g_new = null.T @ chart.coords(g_new_mat)
        s, yv = z_new - z, g_new - g
        sy = s @ yv
        alpha = float(np.clip((s @ s) / sy, 1e-10, 1e10)) if sy > 0 else 1e3 * step
        z, g, gmat = z_new, g_new, g_new_mat
        hist.append(f_new)
    raise NotConvergedError(f"projected gradient did not reach tol={tol:g}", residual=gnorm, iterations=max_iter)


def _strictly_feasible_start(chart, candidates, mats, targets, tol):
    for y in candidates:
        t = chart.project(chart.coords(y))
        if np.linalg.eigvalsh(chart.matrix(t))[0] > 1e-10:
            return t
    # phase I: maximum-entropy point of the feasible set
    proj = [chart.matrix(chart.coords(a)) for a in mats]
    y, _, _, _ = _dual_newton(np.zeros((chart.r, chart.r), dtype=complex), proj, targets, 1e-12, NEWTON_MAX_ITER)
    return chart.project(chart.coords(y))


def project(omega, gamma, constraints, order=ArgumentOrder.PAPER, tol=None, max_iter=None):
    """Entropic projection of ``omega`` onto a constraint set.

    Parameters
    ----------
    omega : StateOperator or array_like
        Prior state (not necessarily normalized).
    gamma : float
        Member of the divergence family, in ``[0, 1]``.
    constraints : Expectation, BlockDiagonal, Support, Composite or None
        The feasible set; ``None`` means no constraint.
    order : ArgumentOrder or {"paper", "reverse"}
        Minimize ``D(omega, phi)`` (paper) or ``D(phi, omega)`` (reverse).
    tol, max_iter : optional
        Solver tolerance and iteration cap; defaults depend on the regime
        (1e-9 / 200 for dual Newton, 1e-7 / 5000 for projected gradient).

    Returns
    -------
    ProjectionResult

    Raises
    ------
    NotConvergedError
        Residual above ``tol`` after ``max_iter`` iterations.
    InfeasibleError
        Inconsistent constraints, or multipliers diverging.
    """
    omega = as_state(omega)
    order = ArgumentOrder(order)
    gamma = check_gamma(gamma)
    gamma_e = effective_gamma(gamma, order)
    canon = canonicalize(constraints, omega.dim)
    labels_n = int(canon.normalize) + len(canon.observables)

    def finish(state, lam, iters, res, method):
        return ProjectionResult(
            state=state,
            multipliers=np.asarray(lam, dtype=float),
            iterations=iters,
            residual=float(res),
            divergence_at_solution=0.0 if state is omega else ordered_divergence(omega, state, gamma, order),
            method=method,
            constraint_residual=constraint_residual(state, canon),
        )

    feas_tol = NEWTON_TOL if tol is None else tol
    if constraint_residual(omega, canon) <= feas_tol:
        return finish(omega, np.zeros(labels_n), 0, constraint_residual(omega, canon), "fixed-point")

    red = _Reduction(omega, canon, gamma_e)
    mats, targets = [], []
    if canon.normalize:
        mats.append(np.eye(red.dim, dtype=complex))
        targets.append(1.0)
    for x, c in zip(canon.observables, canon.targets):
        mats.append(red.compress(x))
        targets.append(c)
    chart = _AffineChart(_hermitian_basis(red.dim, red.blocks), mats, targets)
    # independent combinations of the constraints; multipliers map back through chart.u
    indep = [sum(chart.u[k, i] * mats[k] for k in range(len(mats))) for i in range(chart.u.shape[1])]
    indep_targets = chart.u.T @ np.asarray(targets, dtype=float) if mats else np.zeros(0)

    if gamma_e == 0 and canon.family is None:
        tol_ = NEWTON_TOL if tol is None else tol
        it_ = NEWTON_MAX_ITER if max_iter is None else max_iter
        objective = _Objective(0.0, omega, red)
        y, lam, iters, res = _dual_newton(objective.ref, indep, indep_targets, tol_, it_)
        state = StateOperator(red.lift(y))
        return finish(state, chart.u @ lam, iters, res, "dual-newton")

    tol_ = GRADIENT_TOL if tol is None else tol
    it_ = GRADIENT_MAX_ITER if max_iter is None else max_iter
    objective = _Objective(gamma_e, omega, red)
    start = red.compress(omega.matrix)
    if red.blocks is not None:
        start = symmetrize(chart.matrix(chart.coords(start)))
    candidates = []
    tr = np.trace(start).real
    if tr > 0:
        candidates.append(start / tr if canon.normalize else start)
    candidates.append(np.eye(red.dim) / (red.dim if canon.normalize else 1.0))
    t_start = _strictly_feasible_start(chart, candidates, indep, indep_targets, tol_)
    if chart.null.shape[1] == 0:
        y = chart.matrix(t_start)
        state = StateOperator(red.lift(y))
        return finish(state, np.zeros(labels_n), 0, 0.0, "unique-feasible-point")
    y, gmat, iters, res = _projected_gradient(objective, chart, t_start, tol_, it_)
    # multipliers: least-squares fit of the gradient by the constraint normals
    g_t = chart.coords(gmat)
    lam = np.linalg.lstsq(chart.a.T, g_t, rcond=None)[0] if mats else np.zeros(0)
    state = StateOperator(red.lift(y))
    return finish(state, lam, iters, res, "projected-gradient")


def pythagorean_residual(psi, omega, gamma, constraints, order=ArgumentOrder.PAPER, projection=None, **solver):
    """Defect of the Pythagorean relation at the projection ``P`` of ``omega``.

    In the slot order where the minimized argument is second,
    ``D(omega, psi) = D(omega, P) + D(P, psi)`` for every ``psi`` in the
    constraint set whose embedded image is affine.  Returns the absolute
    defect of that identity.
    """
    omega, psi = as_state(omega), as_state(psi)
    if projection is None:
        projection = project(omega, gamma, constraints, order, **solver).state
    g = effective_gamma(gamma, order)
    lhs = d_gamma_continuous(omega, psi, g)
    rhs = d_gamma_continuous(omega, projection, g) + d_gamma_continuous(projection, psi, g)
    return abs(lhs - rhs)


def luders_weak(rho, family):
    """The weak von Neumann-Lueders update ``rho -> sum_i P_i rho P_i``."""
    return pinch(rho, family)


def luders_equivalence_check(rho, family, order=ArgumentOrder.REVERSE, tol=None):
    """Compare the ``gamma = 0`` block-diagonal projection of ``rho`` with its pinching.

    The trace is held at ``trace(rho)``; pinching preserves it, and without it
    the ``PAPER``-order minimizer would be an unnormalized ``exp(pinch(log rho))``.

    Returns
    -------
    projected, pinched : StateOperator
    trace_distance : float
    """
    rho = as_state(rho)
    q = Composite((BlockDiagonal(family), Expectation((np.eye(rho.dim),), (rho.trace,))))
    projected = project(rho, 0.0, q, order, tol=tol).state
    pinched = luders_weak(rho, family)
    return projected, pinched, trace_distance(projected.matrix, pinched.matrix)


def log_pinched_state(rho, family):
    """``exp(pinch(log rho))`` rescaled to the trace of ``rho``."""
    rho = as_state(rho)
    lp = sum(p @ rho.log @ p for p in family)
    w, v = np.linalg.eigh(symmetrize(lp))
    m = (v * np.exp(w)) @ v.conj().T
    return StateOperator(m * rho.trace / np.trace(m).real)


def bayes_update(joint, evidence, tol=1e-13):
    """Posterior over ``Theta`` from a joint table ``joint[x, theta]`` after observing ``x = b``.

    The update is computed as an entropic projection at ``gamma = 0`` of
    ``diag(joint)`` onto the normalized states whose ``X = b`` indicator has
    expectation one; the ``Theta`` marginal of the projection is returned.

    Raises
    ------
    ZeroEvidenceError
        If the marginal probability of ``b`` is below ``1e-12``.
    """
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 2:
        raise ValueError("joint must be a 2-d table indexed [x, theta]")
    as_distribution(joint.ravel(), normalized=True, tol=1e-10)
    nx, nt = joint.shape
    if not 0 <= evidence < nx:
        raise IndexError(f"evidence index {evidence} out of range for |X| = {nx}")
    if joint[evidence].sum() < 1e-12:
        raise ZeroEvidenceError(f"evidence x={evidence} has probability {joint[evidence].sum():.3g}")
    omega = StateOperator(np.diag(joint.ravel().astype(complex)))
    indicator = np.zeros((nx, nt))
    indicator[evidence] = 1.0
    q = Composite((Expectation(normalize=True), Expectation((np.diag(indicator.ravel()),), (1.0,))))
    result = project(omega, 0.0, q, ArgumentOrder.PAPER, tol=tol)
    return extract_classical(result.state).reshape(nx, nt).sum(axis=0)
