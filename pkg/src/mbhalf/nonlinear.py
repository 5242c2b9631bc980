"""Contraction iteration for the coupled system on the half-line.

The iteration map solves two forced linear problems,

    u <- S_1[u0, bdry_u;  f1 - c_u psi_{2T*}(t) (v^2)_x]
    v <- S_alpha[v0, bdry_v; f2 - c_v psi_{2T*}(t) (u v)_x]

with c_u = c_v = 1/2 by default, so a fixed point solves
u_t + u_xxx + c_u (v^2)_x = f1 and v_t + alpha v_xxx + c_v (u v)_x = f2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .core import BoundaryKind, GridSpec, MBParams, ProblemData, SolutionField, time_localizer
from .errors import InvariantViolation, NoContraction
from .norms import sobolev_norm
from .oracle import DEFAULT_COUPLING, StencilScheme, first_derivative_matrix
from .utm_linear import LinearProblem, UTMSolver

# coefficients for which E and H below are exact invariants
MB_COUPLING = (0.5, 1.0)


@dataclass(frozen=True)
class IterationConfig:
    T_star: float
    max_iters: int = 25
    tol: float = 1e-8
    c0: float = 0.1
    coupling: tuple = DEFAULT_COUPLING

    def __post_init__(self):
        if not 0 < self.T_star < 0.5:
            raise InvariantViolation("T_star", "need 0 < T_star < 1/2")
        if not self.tol > 0:
            raise InvariantViolation("tol", "must be positive")
        if self.max_iters < 1:
            raise InvariantViolation("max_iters", "must be at least 1")


def restrict(grid: GridSpec, data: ProblemData, T_star: float):
    """Grid and data on [0, T_star], keeping the time step of ``grid``."""
    if T_star > grid.T * (1 + 1e-12):
        raise InvariantViolation("T_star", "must not exceed the grid horizon T")
    nt = int(round(T_star / grid.dt)) + 1
    if abs((nt - 1) * grid.dt - T_star) > 1e-9 * grid.T:
        raise InvariantViolation("T_star", "must be a multiple of the grid time step")
    if nt == grid.nt:
        return grid, data
    sub = GridSpec(L=grid.L, nx=grid.nx, T=(nt - 1) * grid.dt, nt=nt, R=grid.R, nq=grid.nq)
    d = ProblemData.build(sub, data.u0, data.v0, data.bdry_u[:nt], data.bdry_v[:nt],
                          data.f1[:, :nt], data.f2[:, :nt])
    return sub, d


class _Context:
    """Reusable linear solvers and difference matrix for one (params, grid)."""

    def __init__(self, p: MBParams, data: ProblemData, grid: GridSpec, cfg: IterationConfig):
        self.p, self.data, self.grid, self.cfg = p, data, grid, cfg
        self.su = UTMSolver(LinearProblem.u_equation(p, data, grid))
        self.sv = UTMSolver(LinearProblem.v_equation(p, data, grid))
        self.D1 = first_derivative_matrix(grid.nx, grid.dx, StencilScheme())
        self.psi = time_localizer(grid.t, 2 * cfg.T_star)

    def forcings(self, u, v):
        cu, cv = self.cfg.coupling
        g1 = -cu * self.psi[None, :] * (self.D1 @ (v * v))
        g2 = -cv * self.psi[None, :] * (self.D1 @ (u * v))
        return self.data.f1 + g1, self.data.f2 + g2

    def linear(self, f1, f2):
        d = self.data
        su = self.su.solve(d.u0, d.bdry_u, f1)
        sv = self.sv.solve(d.v0, d.bdry_v, f2)
        return su.values, sv.values


def iteration_map(state: SolutionField, p: MBParams, data: ProblemData, cfg: IterationConfig,
                  grid: GridSpec, *, context: _Context | None = None) -> SolutionField:
    grid, data = restrict(grid, data, cfg.T_star)
    ctx = context or _Context(p, data, grid, cfg)
    f1, f2 = ctx.forcings(state.u, state.v)
    u, v = ctx.linear(f1, f2)
    return SolutionField(grid.x, grid.t, u, v, {"solver": "iteration_map"})


def _joint_norm(u, v):
    return float(np.sqrt(np.sum(u * u) + np.sum(v * v)))


def picard_solve(p: MBParams, data: ProblemData, cfg: IterationConfig, grid: GridSpec,
                 *, s: float = 0.0) -> SolutionField:
    grid, data = restrict(grid, data, cfg.T_star)
    ctx = _Context(p, data, grid, cfg)
    u, v = ctx.linear(data.f1, data.f2)
    diffs, ratios = [], []
    converged = False
    bad_streak = 0
    for k in range(1, cfg.max_iters + 1):
        f1, f2 = ctx.forcings(u, v)
        un, vn = ctx.linear(f1, f2)
        size = _joint_norm(un, vn)
        d = _joint_norm(un - u, vn - v)
        rel = d / size if size > 0 else d
        if diffs:
            ratio = d / diffs[-1] if diffs[-1] > 0 else 0.0
            ratios.append(ratio)
            bad_streak = bad_streak + 1 if ratio >= 1 else 0
        diffs.append(d)
        u, v = un, vn
        if rel <= cfg.tol:
            converged = True
            break
        if bad_streak >= 3:
            hint = suggest_lifespan(data, s, cfg.c0, boundary_kind=p.boundary_kind, dx=grid.dx,
                                    dt=grid.dt)
            raise NoContraction(
                f"successive differences grew for 3 iterations (ratios {ratios[-3:]}); "
                f"try T_star <= {hint:.3g}", ratios, hint)
    meta = {
        "solver": "picard",
        "alpha": p.alpha, "gamma1": p.gamma1, "gamma2": p.gamma2,
        "boundary": p.boundary_kind.value,
        "T_star": cfg.T_star, "tol": cfg.tol, "coupling": list(cfg.coupling),
        "iterations": k, "converged": converged,
        "successive_differences": diffs, "contraction_ratios": ratios,
    }
    return SolutionField(grid.x, grid.t, u, v, meta)


def suggest_lifespan(data: ProblemData, s: float, c0: float = 0.1, beta: float | None = None,
                     *, boundary_kind=BoundaryKind.ROBIN, dx=None, dt=None) -> float:
    """c0 [1 + |u0|_{H^s} + |v0|_{H^s} + |g1| + |g2|]^(-4/beta).

    Boundary data are measured in H^{s/3} (Robin/Neumann) or H^{(s+1)/3}
    (Dirichlet).  ``beta`` defaults to the contraction exponent for ``s``.
    """
    from .core import beta1

    if beta is None:
        beta = min(beta1(s), (3 - s) / 36)
    nx, nt = data.f1.shape
    dx = dx if dx is not None else 1.0 / (nx - 1)
    dt = dt if dt is not None else 1.0 / (nt - 1)
    sb = (s + 1) / 3 if BoundaryKind(boundary_kind) is BoundaryKind.DIRICHLET else s / 3
    bracket = (1 + sobolev_norm(data.u0, s, dx) + sobolev_norm(data.v0, s, dx)
               + sobolev_norm(data.bdry_u, sb, dt) + sobolev_norm(data.bdry_v, sb, dt))
    return float(c0 * bracket ** (-4.0 / beta))


def conserved_quantities(sol: SolutionField, alpha: float):
    """Time series of mass_u, mass_v, E = int u^2 + v^2, H = int u_x^2 + alpha v_x^2 - u v^2."""
    x = sol.x
    dx = x[1] - x[0]
    D1 = first_derivative_matrix(x.size, dx)
    u, v = sol.u, sol.v
    ux, vx = D1 @ u, D1 @ v

    def integ(f):
        return simpson(f, x=x, axis=0)

    return {
        "t": np.asarray(sol.t),
        "mass_u": integ(u),
        "mass_v": integ(v),
        "E": integ(u * u + v * v),
        "H": integ(ux * ux + alpha * vx * vx - u * v * v),
    }
