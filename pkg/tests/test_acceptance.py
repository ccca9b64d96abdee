"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) for the bare report, or
through pytest, where the lines are repeated in the terminal summary.
"""

import itertools
import subprocess
import sys
import time

import numpy as np
import scipy.linalg as sla

from infodyn import geometry
from infodyn.constraints import BlockDiagonal, Expectation, Support
from infodyn.divergence import d_gamma_continuous, d_zero
from infodyn.gns import gns_construct, modular_flow
from infodyn.matkernel import PAULI_Z, random_hermitian, random_kraus, random_state, random_unitary
from infodyn.projection import ArgumentOrder, bayes_update, luders_equivalence_check, project, pythagorean_residual
from infodyn.states import ProjectorFamily, pinch
from infodyn.verify import grid_minimizer

GAMMAS = (0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0)
RESULTS = []


def report(number, title, ok, detail):
    line = f"CRITERION {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def tdist(a, b):
    return 0.5 * np.sum(np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b))))


def psd_power(m, p):
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0, None)
    return (v * w**p) @ v.conj().T


def some_state(rng, n, faithful=True):
    if faithful:
        return random_state(n, rng)
    return random_state(n, rng, faithful=False, rank=int(rng.integers(1, n)))


def test_criterion_01_divergence_axioms():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst_neg, worst_td, small = 0.0, 0.0, 0
    ok = True
    for i in range(1000):
        n = int(rng.integers(2, 9))
        omega = some_state(rng, n, i % 4 != 0) * rng.uniform(0.5, 2)
        if i % 3 == 0:
            eps = 10 ** rng.uniform(-7, -1)
            phi = (1 - eps) * omega + eps * random_state(n, rng)
        elif i % 3 == 1:
            phi = omega.copy()
        else:
            phi = some_state(rng, n, i % 5 != 0) * rng.uniform(0.5, 2)
        for g in GAMMAS:
            d = d_gamma_continuous(omega, phi, g)
            worst_neg = min(worst_neg, d)
            ok &= d >= -1e-9
            if d <= 1e-9:
                small += 1
                td = tdist(omega, phi)
                worst_td = max(worst_td, td)
                ok &= td <= 1e-4
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    report(1, "divergence axioms", ok,
           f"7000 evaluations, min value {worst_neg:.2e}, {small} pairs with d<=1e-9 "
           f"max trace distance {worst_td:.2e}, {elapsed:.1f}s")


def test_criterion_02_classical_reduction():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n)) * rng.uniform(0.5, 2)
        for g in GAMMAS:
            if g == 0:
                exact = np.sum(q * np.log(q / p)) + p.sum() - q.sum()
            elif g == 1:
                exact = np.sum(p * np.log(p / q)) + q.sum() - p.sum()
            else:
                exact = np.sum(p / (1 - g) + q / g - p**g * q ** (1 - g) / (g * (1 - g)))
            worst = max(worst, abs(d_gamma_continuous(np.diag(p), np.diag(q), g) - exact))
    pinned = d_zero(np.diag([0.75, 0.25]), np.diag([0.5, 0.5]))
    ok = worst <= 1e-10 and abs(pinned - 0.143841) <= 1e-6
    report(2, "classical reduction", ok, f"1400 comparisons max error {worst:.2e}; pinned KL {pinned:.6f}")


def test_criterion_03_hilbert_correspondence():
    rng = np.random.default_rng(103)
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 9))
        omega, phi = random_state(n, rng) * rng.uniform(0.5, 2), random_state(n, rng)
        diff = 2 * np.real_if_close(sla.sqrtm(omega)) - 2 * np.real_if_close(sla.sqrtm(phi))
        half = 0.5 * np.linalg.norm(diff, "fro") ** 2
        worst = max(worst, abs(d_gamma_continuous(omega, phi, 0.5) - half))
    report(3, "Hilbert correspondence at gamma=1/2", worst <= 1e-10, f"500 pairs max error {worst:.2e}")


def test_criterion_04_cptp_monotonicity():
    rng = np.random.default_rng(104)
    violations, worst = 0, -np.inf
    for _ in range(1000):
        n_in, n_out = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        k = max(int(rng.integers(1, 5)), -(-n_in // n_out))
        ch = random_kraus(n_in, n_out, k, rng)
        omega, phi = random_state(n_in, rng), random_state(n_in, rng)
        to, tp = ch(omega), ch(phi)
        for g in (0.0, 0.3, 0.5, 0.7, 1.0):
            gap = d_gamma_continuous(to, tp, g) - d_gamma_continuous(omega, phi, g)
            worst = max(worst, gap)
            violations += gap > 1e-9
    report(4, "CPTP monotonicity", violations == 0, f"5000 cases, {violations} violations, max gap {worst:.2e}")


def independent_metric(g, phi, u, v):
    lam, vecs = np.linalg.eigh(phi)
    uh, vh = vecs.conj().T @ u @ vecs, vecs.conj().T @ v @ vecs
    total = 0.0
    for i, j in itertools.product(range(len(lam)), repeat=2):
        a, b = lam[i], lam[j]
        if abs(a - b) < 1e-9 * a:
            k = 1 / a
        elif g in (0.0, 1.0):
            k = (np.log(a) - np.log(b)) / (a - b)
        else:
            k = (a**g - b**g) * (a ** (1 - g) - b ** (1 - g)) / (g * (1 - g) * (a - b) ** 2)
        total += (np.conj(uh[i, j]) * vh[i, j]).real * k
    return total


def conditioned(rng, n):
    return 0.8 * random_state(n, rng) + 0.2 * np.eye(n) / n


def unit_direction(rng, n):
    h = random_hermitian(n, rng)
    return h / np.linalg.norm(h)


def test_criterion_05_metric_cross_checks():
    rng = np.random.default_rng(105)
    worst = 0.0
    for g in (0.0, 0.3, 0.5, 0.7):
        for _ in range(100):
            n = int(rng.integers(2, 5))
            phi = conditioned(rng, n)
            u, v = unit_direction(rng, n), unit_direction(rng, n)
            exact = independent_metric(g, phi, u, v)
            scale = np.sqrt(independent_metric(g, phi, u, u) * independent_metric(g, phi, v, v))
            worst = max(worst, abs(geometry.metric(g, phi, u, v) - exact) / scale)
    report(5, "metric vs BKM/WYD closed forms", worst <= 1e-4, f"400 instances max relative error {worst:.2e}")


def test_criterion_06_norden_sen():
    rng = np.random.default_rng(106)
    worst = {}
    for g in (0.0, 0.5):
        worst[g] = 0.0
        for _ in range(100):
            n = int(rng.integers(2, 5))
            phi = conditioned(rng, n)
            u, v, w = (unit_direction(rng, n) for _ in range(3))
            worst[g] = max(worst[g], geometry.norden_sen_residual(g, phi, u, v, w))
    ok = max(worst.values()) <= 1e-3
    report(6, "Norden-Sen duality", ok, f"100 instances per gamma, max residual {worst[0.0]:.2e} (0), {worst[0.5]:.2e} (1/2)")


def test_criterion_07_pythagorean_equality():
    rng = np.random.default_rng(107)
    worst = {0.0: 0.0, 0.5: 0.0}
    for i in range(100):
        n = int(rng.integers(2, 6))
        omega = random_state(n, rng)
        # gamma = 0: expectation sets are affine in the embedding
        x = random_hermitian(n, rng)
        lo, hi = np.linalg.eigvalsh(x)[[0, -1]]
        q = Expectation((x,), (lo + (hi - lo) * rng.uniform(0.2, 0.8),), normalize=True)
        psi = project(random_state(n, rng), 0.0, q).state
        worst[0.0] = max(worst[0.0], pythagorean_residual(psi, omega, 0.0, q))
        # gamma = 1/2: block-diagonal and support sets are affine in the square-root embedding
        if i % 2:
            fam = ProjectorFamily.from_unitary(random_unitary(n, rng), [1, n - 1])
            q, psi = BlockDiagonal(fam), pinch(random_state(n, rng), fam)
        else:
            v = random_unitary(n, rng)[:, : int(rng.integers(1, n))]
            p = v @ v.conj().T
            q, psi = Support(p), p @ random_state(n, rng) @ p
        worst[0.5] = max(worst[0.5], pythagorean_residual(psi, omega, 0.5, q))
    ok = max(worst.values()) <= 1e-6
    report(7, "Pythagorean equality on affine sets", ok, f"100 instances per gamma, max residual {worst[0.0]:.2e} (0), {worst[0.5]:.2e} (1/2)")


def test_criterion_08_gibbs():
    res = project(np.eye(2) / 2, 0.0, Expectation((PAULI_Z,), (0.5,), normalize=True))
    lam = np.arctanh(0.5)
    expected = np.diag([np.exp(lam), np.exp(-lam)]) / (2 * np.cosh(lam))
    err = float(np.max(np.abs(res.state.matrix - expected)))
    report(8, "Gibbs projection", err <= 1e-8, f"max entry error vs tanh closed form {err:.2e}")


def test_criterion_09_luders():
    rng = np.random.default_rng(109)
    worst_rev = worst_paper = worst_comm = 0.0
    for i in range(100):
        n = int(rng.integers(3, 7))
        cuts = sorted(rng.choice(np.arange(1, n), size=int(rng.integers(1, n)), replace=False))
        sizes = np.diff([0, *cuts, n]).tolist()
        fam = ProjectorFamily.from_unitary(random_unitary(n, rng), sizes) if i % 2 else ProjectorFamily.from_blocks(sizes)
        rho = random_state(n, rng)
        projected, _, _ = luders_equivalence_check(rho, fam, ArgumentOrder.REVERSE)
        direct = sum(p @ rho @ p for p in fam)
        worst_rev = max(worst_rev, tdist(projected.matrix, direct))
        projected, _, _ = luders_equivalence_check(rho, fam, ArgumentOrder.PAPER)
        logp = sla.expm(sum(p @ sla.logm(rho) @ p for p in fam))
        worst_paper = max(worst_paper, tdist(projected.matrix, logp / np.trace(logp)))
        if i % 4 == 0:
            for order in ArgumentOrder:
                projected, _, _ = luders_equivalence_check(direct, fam, order)
                worst_comm = max(worst_comm, tdist(projected.matrix, direct))
    ok = max(worst_rev, worst_paper, worst_comm) <= 1e-6
    report(9, "Luders recovery", ok,
           f"reverse vs pinching {worst_rev:.2e}, PAPER order vs exp(pinch log) {worst_paper:.2e}, commuting {worst_comm:.2e}")


def test_criterion_10_bayes():
    rng = np.random.default_rng(110)
    worst = 0.0
    for _ in range(200):
        nx, nt = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        joint = rng.dirichlet(np.ones(nx * nt)).reshape(nx, nt)
        b = int(rng.integers(nx))
        worst = max(worst, float(np.max(np.abs(bayes_update(joint, b) - joint[b] / joint[b].sum()))))
    prior, like = np.array([0.5, 0.5]), np.array([0.8, 0.4])
    joint = np.vstack([prior * like, prior * (1 - like)])
    pinned = bayes_update(joint, 0)
    err = float(np.max(np.abs(pinned - [2 / 3, 1 / 3])))
    report(10, "Bayes recovery", worst <= 1e-10 and err <= 1e-10, f"200 joints max error {worst:.2e}; pinned error {err:.2e}")


def test_criterion_11_gns_modular():
    rng = np.random.default_rng(111)
    repro = inv = law = oracle = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 5))
        rho = random_state(n, rng)
        rep = gns_construct(rho)
        for a, b in itertools.product(range(n), repeat=2):
            e = np.zeros((n, n))
            e[a, b] = 1
            repro = max(repro, abs(rep.expectation(e) - np.trace(rho @ e)))
        x = random_hermitian(n, rng)
        r, s = rng.normal(size=2)
        inv = max(inv, abs(np.trace(rho @ modular_flow(rho, r, x)) - np.trace(rho @ x)))
        # independent oracle for the flow: scipy matrix exponential of i r log rho
        u = sla.expm(1j * r * sla.logm(rho))
        oracle = max(oracle, float(np.max(np.abs(modular_flow(rho, r, x) - u @ x @ u.conj().T))))
        law = max(law, float(np.max(np.abs(modular_flow(rho, r + s, x) - modular_flow(rho, r, modular_flow(rho, s, x))))))
    ok = repro <= 1e-12 and inv <= 1e-10 and law <= 1e-10 and oracle <= 1e-9
    report(11, "GNS reproduction and modular flow", ok,
           f"200 instances: reproduction {repro:.2e}, invariance {inv:.2e}, group law {law:.2e}, vs expm oracle {oracle:.2e}")


def test_criterion_12_brute_force():
    rng = np.random.default_rng(112)
    worst = 0.0
    for _ in range(4):
        m = rng.normal(size=(2, 2))
        m = m @ m.T + 0.1 * np.eye(2)
        omega = m / np.trace(m)
        c = rng.uniform(-0.6, 0.6)
        q = Expectation((PAULI_Z,), (c,), normalize=True)
        for g in (0.0, 0.5, 1.0):
            solved = project(omega, g, q).state.matrix
            worst = max(worst, tdist(solved, grid_minimizer(omega, g, c, "paper")))
    report(12, "brute-force grid equivalence", worst <= 2e-4, f"12 projections max trace distance {worst:.2e}")


def test_criterion_13_end_to_end():
    cmd = [sys.executable, "-m", "infodyn", "verify", "all", "--seed", "42"]
    start = time.perf_counter()
    first = subprocess.run(cmd, capture_output=True)
    elapsed = time.perf_counter() - start
    second = subprocess.run(cmd, capture_output=True)
    ok = first.returncode == 0 and second.returncode == 0 and first.stdout == second.stdout and elapsed < 300
    report(13, "verify all --seed 42", ok,
           f"exit codes {first.returncode}/{second.returncode}, identical={first.stdout == second.stdout}, {elapsed:.1f}s")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
