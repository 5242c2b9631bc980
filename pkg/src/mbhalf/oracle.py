"""Finite-difference reference solver (method of lines) on [0, L].

Fourth-order centred differences in the interior.  Near x = 0 the
third-derivative rows use a 7-point biased stencil (node 1) and the centred
5-point stencil (node 2); wider high-order closures there have eigenvalues
with large positive real part, this pair does not.  The right end carries two
homogeneous Dirichlet rows behind a smooth sponge layer.  Time stepping is
Crank-Nicolson on the linear part (one sparse LU, reused every step) with
second-order Adams-Bashforth for the nonlinear terms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import splu

from .core import BoundaryKind, GridSpec, LinearSolution, MBParams, ProblemData, SolutionField
from .errors import SingularOperator, StepRejected
from .utm_linear import LinearProblem, fd_weights

DEFAULT_COUPLING = (0.5, 0.5)


@dataclass(frozen=True)
class StencilScheme:
    order: int = 4
    dt_max: float = 2.5e-4  # accuracy bound on the internal step
    dt_ratio: float = 1.0
    sponge_fraction: float = 1 / 8
    sponge_strength: float = 20.0

    def __post_init__(self):
        if self.order != 4:
            raise ValueError("only the fourth-order scheme is implemented")

    @property
    def interior_d3(self):
        return fd_weights(np.arange(-3, 4), 3)

    @property
    def interior_d1(self):
        return fd_weights(np.arange(-2, 3), 1)


def third_derivative_matrix(n, dx, scheme: StencilScheme = StencilScheme()):
    rows, cols, vals = [], [], []

    def put(i, offsets, w):
        rows.extend([i] * len(offsets))
        cols.extend(i + np.asarray(offsets))
        vals.extend(w)

    c = scheme.interior_d3
    for i in range(3, n - 3):
        put(i, range(-3, 4), c)
    put(1, range(-1, 6), fd_weights(np.arange(-1, 6), 3))
    put(2, range(-2, 3), fd_weights(np.arange(-2, 3), 3))
    put(n - 3, range(-2, 3), fd_weights(np.arange(-2, 3), 3))
    return sparse.csr_matrix((np.array(vals) / dx**3, (rows, cols)), shape=(n, n))


def first_derivative_matrix(n, dx, scheme: StencilScheme = StencilScheme()):
    rows, cols, vals = [], [], []
    c = scheme.interior_d1
    for i in range(n):
        if i < 2:
            offs = np.arange(5) - i
        elif i > n - 3:
            offs = np.arange(-4, 1) + (n - 1 - i)
        else:
            offs = np.arange(-2, 3)
        w = c if (2 <= i <= n - 3) else fd_weights(offs, 1)
        rows.extend([i] * 5)
        cols.extend(i + offs)
        vals.extend(w)
    return sparse.csr_matrix((np.array(vals) / dx, (rows, cols)), shape=(n, n))


def sponge(x, L, scheme: StencilScheme):
    width = scheme.sponge_fraction * L
    s = np.clip((x - (L - width)) / width, 0.0, 1.0)
    return scheme.sponge_strength * s**2 * (3 - 2 * s)


class _Stepper:
    """Crank-Nicolson for v_t = A v + rhs with boundary rows replaced."""

    def __init__(self, grid: GridSpec, alpha, gamma, kind: BoundaryKind, dt, scheme):
        n, dx = grid.nx, grid.dx
        self.n = n
        D3 = third_derivative_matrix(n, dx, scheme)
        A = (-alpha * D3 - sparse.diags(sponge(grid.x, grid.L, scheme))).tolil()
        for i in (0, n - 2, n - 1):
            A[i, :] = 0
        self.A = A.tocsr()
        I = sparse.identity(n, format="lil")
        for i in (0, n - 2, n - 1):
            I[i, i] = 0
        I = I.tocsr()
        lhs = (I - 0.5 * dt * self.A).tolil()
        self.B = (I + 0.5 * dt * self.A).tocsr()
        # boundary rows
        lhs[0, :] = 0
        if kind is BoundaryKind.DIRICHLET:
            lhs[0, 0] = 1.0
        else:
            w = fd_weights(np.arange(5), 1) / dx
            for j in range(5):
                lhs[0, j] = w[j]
            lhs[0, 0] += gamma
        lhs[n - 2, n - 2] = 1.0
        lhs[n - 1, n - 1] = 1.0
        try:
            self.lu = splu(lhs.tocsc())
        except RuntimeError as exc:
            raise SingularOperator(str(exc)) from exc
        self.interior = np.ones(n, dtype=bool)
        self.interior[[0, n - 2, n - 1]] = False
        self.dt = dt

    def step(self, v, src, bc_value):
        rhs = self.B @ v + self.dt * src
        rhs[~self.interior] = 0.0
        rhs[0] = bc_value
        return self.lu.solve(rhs)


def _substeps(grid: GridSpec, scheme: StencilScheme):
    m = max(1, int(np.ceil(grid.dt / scheme.dt_max)))
    return m, grid.dt / m


def _interp_time(samples, t):
    samples = np.asarray(samples, dtype=float)
    if not np.any(samples):
        return lambda s: np.zeros(samples.shape[:-1]) if samples.ndim > 1 else 0.0
    cs = CubicSpline(t, samples, axis=-1)
    return cs


def oracle_linear(p: LinearProblem, scheme: StencilScheme = StencilScheme()) -> LinearSolution:
    grid = p.grid
    m, dt = _substeps(grid, scheme)
    st = _Stepper(grid, p.alpha, p.gamma, p.kind, dt, scheme)
    f = p.forcing if p.forcing is not None else np.zeros((grid.nx, grid.nt))
    fi = _interp_time(f, grid.t)
    bi = _interp_time(p.boundary, grid.t)
    v = np.array(p.initial, dtype=float)
    out = np.empty((grid.nx, grid.nt))
    out[:, 0] = v
    tk = 0.0
    f_old = fi(tk)
    for j in range(1, grid.nt):
        for _ in range(m):
            f_new = fi(tk + dt)
            v = st.step(v, 0.5 * (f_old + f_new), float(bi(tk + dt)))
            f_old, tk = f_new, tk + dt
        out[:, j] = v
    meta = {"solver": "fd_oracle", "alpha": p.alpha, "gamma": p.gamma,
            "substeps": m, "dt": dt, "order": scheme.order}
    return LinearSolution(grid.x, grid.t, out, meta)


def oracle_mb(p: MBParams, data: ProblemData, grid: GridSpec,
              scheme: StencilScheme = StencilScheme(), coupling=DEFAULT_COUPLING,
              growth_limit=1e3) -> SolutionField:
    """u_t + u_xxx + c_u (v^2)_x = f1,  v_t + alpha v_xxx + c_v (u v)_x = f2."""
    cu, cv = coupling
    m, dt = _substeps(grid, scheme)
    su = _Stepper(grid, 1.0, p.gamma1, p.boundary_kind, dt, scheme)
    sv = _Stepper(grid, p.alpha, p.gamma2, p.boundary_kind, dt, scheme)
    D1 = first_derivative_matrix(grid.nx, grid.dx, scheme)
    f1, f2 = _interp_time(data.f1, grid.t), _interp_time(data.f2, grid.t)
    b1, b2 = _interp_time(data.bdry_u, grid.t), _interp_time(data.bdry_v, grid.t)
    u = np.array(data.u0, dtype=float)
    v = np.array(data.v0, dtype=float)

    def nonlinear(u, v):
        return -cu * (D1 @ (v * v)), -cv * (D1 @ (u * v))

    U = np.empty((grid.nx, grid.nt))
    V = np.empty((grid.nx, grid.nt))
    U[:, 0], V[:, 0] = u, v
    n_old = nonlinear(u, v)
    start = max(np.max(np.abs(u)), np.max(np.abs(v)), 1e-300)
    tk = 0.0
    first = True
    for j in range(1, grid.nt):
        for _ in range(m):
            n_now = nonlinear(u, v)
            if first:
                ab_u, ab_v = n_now
                first = False
            else:
                ab_u = 1.5 * n_now[0] - 0.5 * n_old[0]
                ab_v = 1.5 * n_now[1] - 0.5 * n_old[1]
            fu = 0.5 * (f1(tk) + f1(tk + dt))
            fv = 0.5 * (f2(tk) + f2(tk + dt))
            u = su.step(u, ab_u + fu, float(b1(tk + dt)))
            v = sv.step(v, ab_v + fv, float(b2(tk + dt)))
            n_old, tk = n_now, tk + dt
        size = max(np.max(np.abs(u)), np.max(np.abs(v)))
        if not np.isfinite(size) or size > growth_limit * max(start, 1.0):
            raise StepRejected(f"solution grew to {size:.3g} by t = {tk:.4g}")
        U[:, j], V[:, j] = u, v
    meta = {"solver": "fd_oracle_mb", "alpha": p.alpha, "gamma1": p.gamma1,
            "gamma2": p.gamma2, "coupling": list(coupling), "substeps": m, "dt": dt}
    return SolutionField(grid.x, grid.t, U, V, meta)
