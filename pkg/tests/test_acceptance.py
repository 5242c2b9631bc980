"""Acceptance criteria 1-10.

Each test records a one-line verdict through ``conftest.record``; the lines
are printed together in the terminal summary.
"""
import time

import numpy as np
import pytest
from scipy.integrate import simpson

from conftest import LINEAR_GRID as G
from conftest import record
from mbhalf.core import GridSpec, LinearSolution, MBParams, ProblemData, relative_l2
from mbhalf.estimates_lab import calculus_sweep, counterexample_scaling, design_alpha4
from mbhalf.nonlinear import (DEFAULT_COUPLING, MB_COUPLING, IterationConfig,
                              conserved_quantities, picard_solve)
from mbhalf.norms import (SpaceTimeSample, bourgain_norm, modified_bourgain_norm, sobolev_norm,
                          temporal_norm)
from mbhalf.oracle import oracle_linear, oracle_mb
from mbhalf.profiles import Gaussian, SinePulse
from mbhalf.resonance import critical_exponent, d_alpha, d_tilde_alpha, geometry, roots, v_roots
from mbhalf.utm_linear import (LinearProblem, UTMSolver, global_relation_residual,
                               solve_forced_by_superposition)

ZX, ZT = np.zeros(G.nx), np.zeros(G.nt)
PULSE = Gaussian(0.1, 0.02, 1.0)(G.t)


# 1 -------------------------------------------------------------------------


def test_criterion_1_critical_exponent_table():
    alphas = [0.3, 0.999, 1, 1.001, 2, 3.999, 4, 4.001, 9]
    expected = [(0.0, True), (0.0, True), (-0.75, False), (0.0, True), (0.0, True),
                (0.0, True), (0.75, True), (-0.75, False), (-0.75, False)]
    got = [tuple(critical_exponent(a)) for a in alphas]
    bad = [a for a, g, e in zip(alphas, got, expected) if g != e]
    ok = record(1, not bad, f"9 alphas exact, mismatches {bad}")
    assert ok


# 2 -------------------------------------------------------------------------


def test_criterion_2_resonance_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    xi, xi1 = rng.uniform(-10, 10, (2, 10_000))
    worst = 0.0

    def check(lhs, rhs, degree):
        nonlocal worst
        scale = (np.abs(xi) + np.abs(xi1)) ** degree
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))

    for a in (0.5, 2.0, 4.0, 9.0):
        d = d_alpha(xi, xi1, a)
        r1, r2 = roots(a)
        check(d, 3 * a * xi * (xi1 - r1 * xi) * (xi1 - r2 * xi), 3)
        check(d, 3 * a * xi * ((xi1 - xi / 2) ** 2 + (a - 4) / (12 * a) * xi**2), 3)
        check(d, (a - 1) * xi * ((xi - 3 * a * xi1 / (2 * (a - 1))) ** 2
                                 + 3 * a * (a - 4) / (4 * (a - 1) ** 2) * xi1**2), 3)
        # derivatives in expanded form against their factored forms
        p1, p2, q = geometry(a).require_critical_points()
        d_xi1 = 3 * a * xi1**2 - 3 * a * (xi - xi1) ** 2
        check(d_xi1, 6 * a * xi * (xi1 - xi / 2), 2)
        d_xi = -3 * xi**2 + 3 * a * (xi - xi1) ** 2
        check(d_xi, 3 * (a - 1) * (xi - p1 * xi1) * (xi - p2 * xi1), 2)
        check(6 * (a - 1) * xi - 6 * a * xi1, 6 * (a - 1) * (xi - q * xi1), 1)
        # the v-equation quantity
        y1, y2 = v_roots(a)
        check(d_tilde_alpha(xi, xi1, a), (1 - a) * xi1 * (xi1 - y1 * xi) * (xi1 - y2 * xi), 3)
        check(d_tilde_alpha(xi, xi1, a), -d_alpha(xi1, xi, a), 3)
    check(d_alpha(xi, xi1, 1.0), 3 * xi * xi1 * (xi1 - xi), 3)
    elapsed = time.perf_counter() - t0
    ok = record(2, worst <= 1e-12 and elapsed < 5,
                f"worst scaled relative defect {worst:.1e} (tol 1e-12), {elapsed:.2f}s")
    assert ok


# 3 -------------------------------------------------------------------------

N_NORM = (16, 64, 256)


def test_criterion_3_indicator_norm_area():
    got = [design_alpha4(N).cf_norm_sq for N in N_NORM]
    exact = [2 * N**-0.5 * 2 * 10 * 5**3 for N in N_NORM]
    ok = np.allclose(got, exact, rtol=1e-6, atol=0)
    record(3, ok, "||c_f||^2 = 5000 N^-1/2 (area of the stated set) for N in {16, 64, 256}")
    assert ok


@pytest.mark.xfail(strict=True, reason="the stated set has area 5000 N^-1/2; the quoted "
                                       "2500 N^-1/2 is off by a factor 2 (see decision ledger)")
def test_criterion_3_quoted_norm_value():
    got = [design_alpha4(N).cf_norm_sq for N in N_NORM]
    quoted = [2500 * N**-0.5 for N in N_NORM]
    ok = np.allclose(got, quoted, rtol=1e-6, atol=0)
    record(3, ok, f"quoted 2500 N^-1/2 vs computed {got[0] * 16**0.5:.0f} N^-1/2")
    assert ok


@pytest.mark.parametrize("s", [0.0, 0.5])
def test_criterion_3_theta_slope(s):
    t0 = time.perf_counter()
    res = counterexample_scaling("4", s, list(N_NORM))
    elapsed = time.perf_counter() - t0
    ok = abs(res.slope - (0.25 - s)) <= 0.1 and elapsed < 60
    record(3, ok, f"s={s}: slope {res.slope:.4f} vs {0.25 - s} +- 0.1 ({elapsed:.0f}s)")
    assert ok


# 4 -------------------------------------------------------------------------


def test_criterion_4_linear_traces():
    t0 = time.perf_counter()
    u0 = Gaussian(6.0, 1.0, 1.0)(G.x)
    p = LinearProblem(1.0, 0.0, "dirichlet", G, u0, PULSE)
    s = UTMSolver(p)
    sol = s.solve()
    e_bd = relative_l2(s.trace(sol, 0), PULSE)
    e_init = relative_l2(sol.values[:, 0], u0)
    worst_robin = 0.0
    for kind, g in (("neumann", 0.0), ("robin", -1.0), ("robin", 1.0)):
        pr = LinearProblem(1.0, g, kind, G, u0, PULSE)
        sr = UTMSolver(pr)
        sol_r = sr.solve()
        worst_robin = max(worst_robin,
                          relative_l2(sr.trace(sol_r, 1) + g * sr.trace(sol_r, 0), PULSE))
    pn = LinearProblem(2.5, 0.0, "neumann", G, u0, PULSE)
    a = UTMSolver(pn, formula="neumann").solve().values
    b = UTMSolver(pn, formula="robin").solve().values
    e_rn = float(np.max(np.abs(a - b)) / np.max(np.abs(a)))
    elapsed = time.perf_counter() - t0
    ok = e_bd <= 1e-3 and e_init <= 1e-3 and worst_robin <= 1e-2 and e_rn <= 1e-10
    record(4, ok, f"Dirichlet trace {e_bd:.1e}, initial {e_init:.1e} (tol 1e-3); "
                  f"Neumann/Robin trace {worst_robin:.1e} (tol 1e-2); "
                  f"Robin(0) vs Neumann {e_rn:.1e} (tol 1e-10); {elapsed:.0f}s")
    assert ok and elapsed < 120


# 5 -------------------------------------------------------------------------


def test_criterion_5_global_relation():
    alpha = 1.7
    X, T = np.meshgrid(G.x, G.t, indexing="ij")
    Y = X - 1
    g = np.exp(-(Y**2))
    u = (1 + T + T**2) * g
    f = (1 + 2 * T) * g + alpha * (1 + T + T**2) * (-8 * Y**3 + 12 * Y) * g
    p = LinearProblem(alpha, 0.0, "dirichlet", G, u[:, 0], u[0], f)
    probes = np.array([0, 0.5, -1, 2, -3, 5, 1 - 1j, -2 - 0.5j, -4j, 3 - 2j])
    good = max(global_relation_residual(LinearSolution(G.x, G.t, u), p, probes, t)
               for t in (0.1, 0.2))
    bad = min(global_relation_residual(LinearSolution(G.x, G.t, 1.1 * u), p, probes, t)
              for t in (0.1, 0.2))
    ok = record(5, good <= 1e-4 and bad > 1e-2,
                f"manufactured residual {good:.1e} (tol 1e-4); scaled by 1.1 {bad:.1e} (> 1e-2)")
    assert ok


# 6 -------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [1.0, 2.5])
@pytest.mark.parametrize("kind,gamma", [("dirichlet", 0.0), ("robin", -1.0)])
def test_criterion_6_superposition(alpha, kind, gamma):
    u0 = Gaussian(6.0, 1.0, 1.0)(G.x)
    f = np.outer(Gaussian(8.0, 1.0, 1.0)(G.x), SinePulse(0.0, 0.2, 1.0)(G.t))
    p = LinearProblem(alpha, gamma, kind, G, u0, PULSE, f)
    one_shot = UTMSolver(p).solve().values
    err = relative_l2(solve_forced_by_superposition(p).values, one_shot)
    ok = record(6, err <= 1e-2, f"alpha={alpha} {kind}: {err:.1e} (tol 1e-2)")
    assert ok


# 7 -------------------------------------------------------------------------


@pytest.mark.parametrize("alpha", [1.0, 2.5])
@pytest.mark.parametrize("kind,gamma", [("dirichlet", 0.0), ("neumann", 0.0), ("robin", -1.0)])
def test_criterion_7_utm_vs_oracle(alpha, kind, gamma):
    g = GridSpec(L=20, nx=401, T=0.2, nt=41, R=10, nq=1600)
    t0 = time.perf_counter()
    p = LinearProblem(alpha, gamma, kind, g, Gaussian(8.0, 1.0, 1.0)(g.x), np.zeros(g.nt))
    err = relative_l2(oracle_linear(p).values, UTMSolver(p).solve().values)
    elapsed = time.perf_counter() - t0
    ok = record(7, err <= 1e-2 and elapsed < 300,
                f"alpha={alpha} {kind}: {err:.1e} (tol 1e-2)")
    assert ok


# 8 -------------------------------------------------------------------------

G8 = GridSpec(L=30, nx=601, T=0.1, nt=21, R=10, nq=1600)


@pytest.fixture(scope="module")
def interior_data():
    # wide gaussians far from x = 0: their dispersive tails stay off the boundary
    return ProblemData.from_profiles(G8, u0="gaussian(center=15,width=2,amp=0.5)",
                                     v0="gaussian(center=16,width=2,amp=0.5)")


@pytest.mark.parametrize("kind,gamma", [("dirichlet", 0.0), ("robin", -1.0)])
def test_criterion_8_picard_vs_oracle(interior_data, kind, gamma):
    t0 = time.perf_counter()
    p = MBParams(2.5, gamma, gamma, kind)
    sol = picard_solve(p, interior_data, IterationConfig(T_star=0.1, coupling=DEFAULT_COUPLING), G8)
    o = oracle_mb(p, interior_data, G8, coupling=DEFAULT_COUPLING)
    err = relative_l2(np.r_[sol.u, sol.v], np.r_[o.u, o.v])
    m = sol.meta
    ratio = max(m["contraction_ratios"])
    elapsed = time.perf_counter() - t0
    ok = m["converged"] and m["iterations"] <= 25 and ratio <= 0.5 and err <= 5e-2
    record(8, ok, f"{kind}: {m['iterations']} iterations, max ratio {ratio:.3f}, "
                  f"vs oracle {err:.1e} (tol 5e-2)")
    assert ok and elapsed < 600


def test_criterion_8_conservation(interior_data):
    # E is invariant for the coupling (1/2, 1); masses for any coupling
    p = MBParams(2.5, 0.0, 0.0, "dirichlet")
    sol = picard_solve(p, interior_data, IterationConfig(T_star=0.1, coupling=MB_COUPLING), G8)
    q = conserved_quantities(sol, 2.5)
    e_drift = float(np.max(np.abs(q["E"] - q["E"][0])) / q["E"][0])
    m_drift = max(float(np.max(np.abs(q[k] - q[k][0]))) for k in ("mass_u", "mass_v"))
    ok = sol.meta["converged"] and e_drift <= 1e-4 and m_drift <= 1e-6
    record(8, ok, f"E drift {e_drift:.1e} (tol 1e-4), mass drift {m_drift:.1e} (tol 1e-6)")
    assert ok


# 9 -------------------------------------------------------------------------


def test_criterion_9_norms():
    rng = np.random.default_rng(9)
    dx, dt = 0.1, 0.02
    worst_parseval = 0.0
    for _ in range(10):
        f = rng.standard_normal(200)
        l2 = np.sqrt(dx * np.sum(f * f))
        worst_parseval = max(worst_parseval, abs(sobolev_norm(f, 0.0, dx) - l2) / l2)
        w = rng.standard_normal((40, 30))
        l2 = np.sqrt(dx * dt * np.sum(w * w))
        worst_parseval = max(worst_parseval,
                             abs(bourgain_norm(SpaceTimeSample(w, dx, dt), 0, 0, 2.0) - l2) / l2)
    worst_bin = 0.0
    nx, nt = 32, 24
    x, t = dx * np.arange(nx), dt * np.arange(nt)
    for jx, jt in ((3, 5), (-7, 2), (11, -9)):
        for s, b, a in ((0.5, 0.45, 1.0), (-0.3, 0.4, 2.5)):
            xi, tau = 2 * np.pi * jx / (nx * dx), 2 * np.pi * jt / (nt * dt)
            w = np.exp(1j * (xi * x[:, None] + tau * t[None, :]))
            expected = np.sqrt(nx * dx * nt * dt) * (1 + abs(xi)) ** s \
                * (1 + abs(tau - a * xi**3)) ** b
            got = bourgain_norm(SpaceTimeSample(w, dx, dt), s, b, a)
            worst_bin = max(worst_bin, abs(got - expected) / expected)
    homog = mono = 0
    for _ in range(1000):
        q = SpaceTimeSample(rng.uniform(-10, 10, (12, 10)), dx, dt)
        lam = rng.uniform(-5, 5)
        ql = SpaceTimeSample(lam * q.values, dx, dt)
        s, b = rng.uniform(-1, 1), rng.uniform(0, 0.5)
        for fn in (lambda z: bourgain_norm(z, s, b, 1.5), lambda z: temporal_norm(z, s, b, 1.5),
                   lambda z: modified_bourgain_norm(z, s, b, 0.6, 1.5)):
            homog += abs(fn(ql) - abs(lam) * fn(q)) > 1e-12 * abs(lam) * fn(q)
        ds, db = rng.uniform(0, 1), rng.uniform(0, 0.5 - b)
        tol = 1 + 1e-12
        mono += bourgain_norm(q, s, b, 1.5) > bourgain_norm(q, s + ds, b, 1.5) * tol
        mono += bourgain_norm(q, s, b, 1.5) > bourgain_norm(q, s, b + db, 1.5) * tol
    ok = worst_parseval <= 1e-10 and worst_bin <= 1e-6 and homog == 0 and mono == 0
    record(9, ok, f"Parseval {worst_parseval:.1e} (tol 1e-10), single bin {worst_bin:.1e} "
                  f"(tol 1e-6), homogeneity/monotonicity violations {homog}/{mono} in 1000 fields")
    assert ok


# 10 ------------------------------------------------------------------------


@pytest.mark.parametrize("kind,l,lp", [("conv_decay", 0.75, 0.6), ("sqrt_kernel", 0.75, 0.0),
                                       ("subhalf_conv", 0.4, 0.35)])
def test_criterion_10_calculus_sweeps(kind, l, lp):
    t0 = time.perf_counter()
    r = calculus_sweep(kind, l, lp, n=1000, seed=10)
    spread = float(r.max() / np.median(r))
    elapsed = time.perf_counter() - t0
    ok = record(10, spread <= 3 and elapsed < 60,
                f"{kind}: max/median {spread:.2f} (tol 3), {elapsed:.1f}s")
    assert ok
