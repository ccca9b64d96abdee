"""Seeded property suites behind ``infodyn verify``.

Each suite draws its instances from ``default_rng([seed, suite_index])``, so
a suite gives the same report whether it runs alone or inside ``all``.
Reports print one line per property with the number of cases, the number
of failures and the worst observed defect.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import geometry
from .constraints import BlockDiagonal, Expectation, Support
from .divergence import classical_divergence, d_gamma_continuous, d_zero, hilbert_distance_check
from .exceptions import InfodynError
from .gns import gns_construct, l2_projection_correspondence, modular_flow
from .matkernel import (
    PAULI_X,
    PAULI_Z,
    random_hermitian,
    random_kraus,
    random_state,
    random_unitary,
    trace_distance,
)
from .projection import (
    ArgumentOrder,
    bayes_update,
    log_pinched_state,
    luders_equivalence_check,
    project,
    pythagorean_residual,
)
from .states import ProjectorFamily, StateOperator, pinch

SUITES = ("divergence", "geometry", "projection", "luders", "bayes", "gns")
GAMMAS = (0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0)


@dataclass
class PropertyReport:
    suite: str
    name: str
    cases: int = 0
    failures: int = 0
    worst: float = 0.0
    bound: float = 0.0

    def record(self, defect, ok=None):
        """Count one case; ``ok`` defaults to ``defect <= bound``."""
        self.cases += 1
        if defect is not None and np.isfinite(defect):
            self.worst = max(self.worst, float(defect))
        if ok is None:
            ok = defect is not None and defect <= self.bound
        if not ok:
            self.failures += 1

    @property
    def passed(self):
        return self.cases > 0 and self.failures == 0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.suite}.{self.name}: cases={self.cases} failures={self.failures} "
            f"worst={self.worst:.3e} bound={self.bound:.1e}"
        )


def _rng(seed, suite):
    return np.random.default_rng([seed, SUITES.index(suite)])


def _dim(rng, lo, hi):
    return int(rng.integers(lo, hi + 1))


def _state(rng, n, faithful=True):
    if faithful or n == 1:
        return random_state(n, rng)
    return random_state(n, rng, faithful=False, rank=int(rng.integers(1, n)))


def _conditioned(rng, n):
    return StateOperator(0.8 * random_state(n, rng) + 0.2 * np.eye(n) / n)


def _direction(rng, n):
    h = random_hermitian(n, rng)
    return h / np.linalg.norm(h)


def _random_blocks(rng, n):
    cuts = sorted(rng.choice(np.arange(1, n), size=int(rng.integers(1, n)), replace=False))
    sizes = np.diff([0, *cuts, n]).tolist()
    return sizes


def _random_family(rng, n, rotate=True):
    sizes = _random_blocks(rng, n)
    if rotate:
        return ProjectorFamily.from_unitary(random_unitary(n, rng), sizes)
    return ProjectorFamily.from_blocks(sizes)


# ---------------------------------------------------------------------------


def suite_divergence(seed, n_pairs=1000, n_classical=200, n_hilbert=500, n_channels=1000):
    rng = _rng(seed, "divergence")
    nonneg = PropertyReport("divergence", "non_negativity", bound=1e-9)
    indisc = PropertyReport("divergence", "identity_of_indiscernibles", bound=1e-4)
    for i in range(n_pairs):
        n = _dim(rng, 2, 8)
        omega = _state(rng, n, faithful=i % 4 != 0) * rng.uniform(0.5, 2.0)
        if i % 3 == 0:
            eps = 10.0 ** rng.uniform(-6, -1)
            phi = (1 - eps) * omega + eps * random_state(n, rng)
        else:
            phi = _state(rng, n, faithful=i % 5 != 0) * rng.uniform(0.5, 2.0)
        pairs = [(omega, phi), (omega, omega)] if i % 10 == 0 else [(omega, phi)]
        for (a, b), g in itertools.product(pairs, GAMMAS):
            d = d_gamma_continuous(a, b, g)
            nonneg.record(max(0.0, -d), ok=d >= -1e-9)
            if d <= 1e-9:
                indisc.record(trace_distance(a, b))
    classical = PropertyReport("divergence", "classical_reduction", bound=1e-10)
    for _ in range(n_classical):
        n = _dim(rng, 2, 8)
        p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n)) * rng.uniform(0.5, 2.0)
        for g in GAMMAS:
            exact = classical_divergence(p, q, g)
            value = d_gamma_continuous(np.diag(p), np.diag(q), g)
            classical.record(abs(value - exact) / max(1.0, abs(exact)))
    pinned = PropertyReport("divergence", "kl_pinned_0.143841", bound=1e-6)
    pinned.record(abs(d_zero(np.diag([0.75, 0.25]), np.diag([0.5, 0.5])) - 0.143841))
    hilbert = PropertyReport("divergence", "hilbert_half_norm", bound=1e-10)
    for _ in range(n_hilbert):
        n = _dim(rng, 2, 8)
        d, half = hilbert_distance_check(_state(rng, n), _state(rng, n))
        hilbert.record(abs(d - half))
    mono = PropertyReport("divergence", "cptp_monotonicity", bound=1e-9)
    for _ in range(n_channels):
        n_in, n_out = _dim(rng, 2, 5), _dim(rng, 2, 5)
        k = max(_dim(rng, 1, 4), -(-n_in // n_out))
        channel = random_kraus(n_in, n_out, k, rng)
        omega, phi = _state(rng, n_in), _state(rng, n_in)
        t_omega, t_phi = channel(omega), channel(phi)
        for g in (0.0, 0.3, 0.5, 0.7, 1.0):
            gap = d_gamma_continuous(t_omega, t_phi, g) - d_gamma_continuous(omega, phi, g)
            mono.record(max(0.0, gap))
    return [nonneg, indisc, classical, pinned, hilbert, mono]


def suite_geometry(seed, n_metric=100, n_duality=100):
    rng = _rng(seed, "geometry")
    reports = []
    for g in (0.0, 0.3, 0.5, 0.7):
        rep = PropertyReport("geometry", f"metric_closed_form_gamma={g}", bound=1e-4)
        for _ in range(n_metric):
            n = _dim(rng, 2, 4)
            phi = _conditioned(rng, n)
            u, v = _direction(rng, n), _direction(rng, n)
            exact = geometry.closed_form_metric(g, phi, u, v)
            fd = geometry.metric(g, phi, u, v)
            scale = np.sqrt(geometry.closed_form_metric(g, phi, u, u) * geometry.closed_form_metric(g, phi, v, v))
            rep.record(abs(fd - exact) / scale)
        reports.append(rep)
    pos = PropertyReport("geometry", "metric_positivity", bound=0.0)
    for g in GAMMAS:
        for _ in range(20):
            n = _dim(rng, 2, 4)
            phi, u = _conditioned(rng, n), _direction(rng, n)
            val = geometry.metric(g, phi, u, u)
            pos.record(max(0.0, -val), ok=val > 0)
    reports.append(pos)
    for g in (0.0, 0.5):
        rep = PropertyReport("geometry", f"norden_sen_gamma={g}", bound=1e-3)
        for _ in range(n_duality):
            n = _dim(rng, 2, 4)
            phi = _conditioned(rng, n)
            u, v, w = (_direction(rng, n) for _ in range(3))
            rep.record(geometry.norden_sen_residual(g, phi, u, v, w))
        reports.append(rep)
    return reports


def _random_expectation(rng, n, normalize=True):
    x = random_hermitian(n, rng)
    # target strictly inside the attainable range
    w = np.linalg.eigvalsh(x)
    c = w[0] + (w[-1] - w[0]) * rng.uniform(0.2, 0.8)
    return Expectation((x,), (c,), normalize=normalize)


def grid_minimizer(omega, gamma, c, order, spacing=1e-4):
    """Scan ``phi = (I + a X + c Z)/2`` over the feasible ``a`` grid; returns the best ``phi``.

    Eigenvalues are taken with a vectorized ``eigh`` on the stacked 2 x 2
    candidates, independently of the library's spectral code.
    """
    omega = np.asarray(omega, dtype=complex)
    r = np.sqrt(1 - c * c)
    a = np.arange(-r + spacing, r, spacing)
    eye, x, z = np.eye(2), PAULI_X, PAULI_Z
    phis = (eye + a[:, None, None] * x + c * z) / 2
    wp, vp = np.linalg.eigh(phis)
    wo, vo = np.linalg.eigh(omega)
    g = gamma if ArgumentOrder(order) is ArgumentOrder.PAPER else 1 - gamma
    tr_o = wo.sum()
    if g == 0:
        lo = (vo * np.log(wo)) @ vo.conj().T
        ent = np.sum(wp * np.log(wp), axis=1)
        vals = ent - np.einsum("kij,ji->k", phis, lo).real + tr_o - 1
    elif g == 1:
        logp = np.einsum("kij,kj,klj->kil", vp, np.log(wp), vp.conj())
        vals = np.sum(wo * np.log(wo)) - np.einsum("ij,kji->k", omega, logp).real + 1 - tr_o
    else:
        og = (vo * wo ** g) @ vo.conj().T
        pp = np.einsum("kij,kj,klj->kil", vp, wp ** (1 - g), vp.conj())
        vals = tr_o / (1 - g) + 1 / g - np.einsum("ij,kji->k", og, pp).real / (g * (1 - g))
    return phis[int(np.argmin(vals))]


def suite_projection(seed, n_pythagoras=100, n_grid=6):
    rng = _rng(seed, "projection")
    gibbs = PropertyReport("projection", "gibbs_qubit", bound=1e-8)
    res = project(np.eye(2) / 2, 0.0, Expectation((PAULI_Z,), (0.5,), normalize=True))
    gibbs.record(float(np.max(np.abs(res.state.matrix - np.diag([0.75, 0.25])))))
    reports = [gibbs]

    pyth0 = PropertyReport("projection", "pythagoras_gamma=0_expectation", bound=1e-6)
    for _ in range(n_pythagoras):
        n = _dim(rng, 2, 5)
        omega, q = _state(rng, n), _random_expectation(rng, n)
        psi = project(_state(rng, n), 0.0, q).state
        pyth0.record(pythagorean_residual(psi, omega, 0.0, q))
    reports.append(pyth0)

    pyth_half = PropertyReport("projection", "pythagoras_gamma=0.5_block_support", bound=1e-6)
    for i in range(n_pythagoras):
        n = _dim(rng, 2, 5)
        omega = _state(rng, n)
        if i % 2:
            fam = _random_family(rng, n)
            q = BlockDiagonal(fam)
            psi = pinch(_state(rng, n), fam)
        else:
            v = random_unitary(n, rng)[:, : _dim(rng, 1, n - 1)]
            p = v @ v.conj().T
            q = Support(p)
            psi = p @ _state(rng, n) @ p
        pyth_half.record(pythagorean_residual(psi, omega, 0.5, q))
    reports.append(pyth_half)

    idem = PropertyReport("projection", "idempotence", bound=1e-8)
    for g in (0.0, 0.5, 1.0):
        for _ in range(5):
            n = _dim(rng, 2, 4)
            q = _random_expectation(rng, n)
            first = project(_state(rng, n), g, q).state
            second = project(first, g, q).state
            idem.record(trace_distance(first.matrix, second.matrix))
    reports.append(idem)

    grid = PropertyReport("projection", "brute_force_grid", bound=2e-4)
    for _ in range(n_grid):
        m = random_hermitian(2, rng).real
        m = m @ m.T + 0.1 * np.eye(2)
        omega = m / np.trace(m)
        c = rng.uniform(-0.6, 0.6)
        q = Expectation((PAULI_Z,), (c,), normalize=True)
        for g, order in itertools.product((0.0, 0.5, 1.0), ("paper", "reverse")):
            solved = project(omega, g, q, order).state.matrix
            grid.record(trace_distance(solved, grid_minimizer(omega, g, c, order)))
    reports.append(grid)
    return reports


def suite_luders(seed, n_instances=100):
    rng = _rng(seed, "luders")
    rev = PropertyReport("luders", "reverse_order_equals_pinching", bound=1e-6)
    paper = PropertyReport("luders", "paper_order_equals_log_pinching", bound=1e-6)
    commuting = PropertyReport("luders", "commuting_instances_both_orders", bound=1e-6)
    for i in range(n_instances):
        n = _dim(rng, 3, 6)
        fam = _random_family(rng, n, rotate=bool(i % 2))
        rho = _state(rng, n)
        rev.record(luders_equivalence_check(rho, fam, ArgumentOrder.REVERSE)[2])
        projected = luders_equivalence_check(rho, fam, ArgumentOrder.PAPER)[0]
        paper.record(trace_distance(projected.matrix, log_pinched_state(rho, fam).matrix))
        if i % 5 == 0:
            commuting_rho = pinch(rho, fam)
            for order in ArgumentOrder:
                commuting.record(luders_equivalence_check(commuting_rho, fam, order)[2])
    return [rev, paper, commuting]


def suite_bayes(seed, n_joints=200):
    rng = _rng(seed, "bayes")
    pinned = PropertyReport("bayes", "pinned_two_thirds", bound=1e-10)
    joint = np.array([[0.5 * 0.8, 0.5 * 0.4], [0.5 * 0.2, 0.5 * 0.6]])
    pinned.record(float(np.max(np.abs(bayes_update(joint, 0) - [2 / 3, 1 / 3]))))
    exact = PropertyReport("bayes", "conditioning", bound=1e-10)
    for i in range(n_joints):
        nx, nt = _dim(rng, 2, 6), _dim(rng, 2, 6)
        joint = rng.dirichlet(np.ones(nx * nt)).reshape(nx, nt)
        if i % 4 == 0:
            joint[rng.random(joint.shape) < 0.3] = 0.0
            joint[0, 0] += 1e-3
            joint /= joint.sum()
        b = int(np.argmax(joint.sum(axis=1))) if i % 2 else int(rng.integers(nx))
        if joint[b].sum() < 1e-12:
            b = int(np.argmax(joint.sum(axis=1)))
        post = bayes_update(joint, b)
        exact.record(float(np.max(np.abs(post - joint[b] / joint[b].sum()))))
    return [pinned, exact]


def suite_gns(seed, n_instances=200, n_l2=10):
    rng = _rng(seed, "gns")
    repro = PropertyReport("gns", "reproduction", bound=1e-12)
    hom = PropertyReport("gns", "representation_multiplicative", bound=1e-12)
    inv = PropertyReport("gns", "modular_invariance", bound=1e-10)
    law = PropertyReport("gns", "modular_group_law", bound=1e-10)
    for i in range(n_instances):
        n = _dim(rng, 2, 4)
        omega = StateOperator(_state(rng, n, faithful=i % 4 != 0))
        rep = gns_construct(omega)
        worst = 0.0
        for a, b in itertools.product(range(n), repeat=2):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = 1
            worst = max(worst, abs(rep.expectation(e) - omega.matrix[b, a]))
        repro.record(worst)
        x, y = random_hermitian(n, rng), random_hermitian(n, rng)
        hom.record(float(np.max(np.abs(rep.pi(x @ y) - rep.pi(x) @ rep.pi(y)))))
        if not omega.is_faithful:
            omega = StateOperator(_state(rng, n))
        r, s = rng.normal(size=2)
        flowed = modular_flow(omega, r, x)
        inv.record(abs(np.trace(omega.matrix @ flowed) - np.trace(omega.matrix @ x)))
        law.record(float(np.max(np.abs(modular_flow(omega, r + s, x) - modular_flow(omega, r, modular_flow(omega, s, x))))))
    l2 = PropertyReport("gns", "l2_correspondence_gamma=0.5", bound=1e-6)
    for _ in range(n_l2):
        n = _dim(rng, 2, 4)
        omega = _state(rng, n) * rng.uniform(0.5, 2.0)
        l2.record(l2_projection_correspondence(omega, _random_expectation(rng, n))[2])
    return [repro, hom, inv, law, l2]


RUNNERS = {
    "divergence": suite_divergence,
    "geometry": suite_geometry,
    "projection": suite_projection,
    "luders": suite_luders,
    "bayes": suite_bayes,
    "gns": suite_gns,
}


def run_suite(name, seed):
    """Run one suite (or ``"all"``); solver exceptions count as a failed case."""
    names = SUITES if name == "all" else (name,)
    reports = []
    for s in names:
        if s not in RUNNERS:
            raise ValueError(f"unknown suite {s!r}; choose from {', '.join(SUITES)} or all")
        try:
            reports.extend(RUNNERS[s](seed))
        except (InfodynError, np.linalg.LinAlgError) as exc:
            err = PropertyReport(s, f"raised_{type(exc).__name__}")
            err.record(None, ok=False)
            reports.append(err)
    return reports


def format_report(reports, seed, suite):
    lines = [f"infodyn verify suite={suite} seed={seed}"]
    lines += [r.line() for r in reports]
    failed = sum(not r.passed for r in reports)
    lines.append(f"properties={len(reports)} failed={failed} cases={sum(r.cases for r in reports)}")
    return "\n".join(lines) + "\n"
