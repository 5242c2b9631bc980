"""Transform-method solution formulas for the forced linear equation

    v_t + alpha v_xxx = f,   x > 0, 0 < t < T,

with Dirichlet, Neumann or Robin data at x = 0, plus the whole-line solvers
used by the superposition representation.

All four boundary-value formulas (u or v equation, Dirichlet or Robin) share
one implementation: the u-equation is the alpha = 1, gamma = gamma1 case.

Evaluation layout: with GL abscissae r_n on (0, R] the solution is

    v(x, t) = (1/2pi) sum_sets  E_set(x) @ C_set(t)

where the four node sets are the real line at +r and -r and the two rays
a r, a^2 r.  Data transforms are needed at r * {1, -1, e^{-i pi/3}, e^{-2i pi/3}}
(the images of the ray nodes under xi -> sigma xi, sigma^2 xi), all with
Im <= 0, so no analytic continuation beyond the truncated data is used.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contour import (A, SIGMA, build_contour, check_pole_clearance, make_residue_transforms,
                      residue_nodes, residue_term)
from .core import BoundaryKind, GridSpec, LinearSolution, MBParams, ProblemData, relative_l2
from .errors import AliasingDetected, DivergentIntegrand, InvariantViolation
from .transforms import SampledQuadrature, oscillatory_cumulative

TWO_PI = 2 * np.pi
_XI_BLOCK = 1024


@dataclass(frozen=True)
class LinearProblem:
    """One scalar forced linear problem on [0, L] x [0, T]."""

    alpha: float
    gamma: float
    kind: BoundaryKind
    grid: GridSpec
    initial: np.ndarray
    boundary: np.ndarray
    forcing: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BoundaryKind(self.kind))
        if not self.alpha > 0:
            raise InvariantViolation("alpha", "must be positive")
        if self.kind is BoundaryKind.NEUMANN and self.gamma != 0:
            raise InvariantViolation("gamma", "Neumann problem has gamma = 0")
        if np.shape(self.initial) != (self.grid.nx,):
            raise InvariantViolation("initial", "shape must be (nx,)")
        if np.shape(self.boundary) != (self.grid.nt,):
            raise InvariantViolation("boundary", "shape must be (nt,)")
        if self.forcing is not None and np.shape(self.forcing) != (self.grid.nx, self.grid.nt):
            raise InvariantViolation("forcing", "shape must be (nx, nt)")

    @classmethod
    def u_equation(cls, params: MBParams, data: ProblemData, grid: GridSpec, forcing=None):
        return cls(1.0, params.gamma1, params.boundary_kind, grid, data.u0, data.bdry_u,
                   data.f1 if forcing is None else forcing)

    @classmethod
    def v_equation(cls, params: MBParams, data: ProblemData, grid: GridSpec, forcing=None):
        return cls(params.alpha, params.gamma2, params.boundary_kind, grid, data.v0,
                   data.bdry_v, data.f2 if forcing is None else forcing)

    def replace(self, **changes):
        kw = dict(alpha=self.alpha, gamma=self.gamma, kind=self.kind, grid=self.grid,
                  initial=self.initial, boundary=self.boundary, forcing=self.forcing)
        kw.update(changes)
        return LinearProblem(**kw)


# finite-difference helpers -------------------------------------------------

def fd_weights(offsets, deriv):
    """Weights w with sum_j w_j f(x0 + offsets_j h) ~ h^deriv f^(deriv)(x0)."""
    offsets = np.asarray(offsets, dtype=float)
    n = offsets.size
    V = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv] = np.prod(np.arange(1, deriv + 1))
    return np.linalg.solve(V, rhs)


_ONE_SIDED = {1: fd_weights(np.arange(5), 1), 2: fd_weights(np.arange(6), 2),
              3: fd_weights(np.arange(7), 3)}


def boundary_derivative(values, h, deriv):
    """One-sided derivative at the first row of ``values`` (axis 0 = space).

    Order-4 accurate: 5 points for the first derivative, 6 for the second,
    7 for the third."""
    if deriv == 0:
        return np.asarray(values[0])
    w = _ONE_SIDED[deriv]
    return np.tensordot(w, np.asarray(values[: w.size]), axes=(0, 0)) / h**deriv


def trace_from_grid(values, dx, deriv=0):
    return boundary_derivative(values, dx, deriv)


# the transform-method evaluator -------------------------------------------

@dataclass
class _NodeSets:
    r: np.ndarray
    w: np.ndarray
    xi: np.ndarray  # transform nodes: r*{1, -1, e^{-i pi/3}, e^{-2i pi/3}} (+ residue nodes)

    @property
    def n(self):
        return self.r.size

    def block(self, name):
        n = self.n
        k = {"pos": 0, "neg": 1, "m60": 2, "m120": 3}[name]
        return slice(k * n, (k + 1) * n)


class UTMSolver:
    """Evaluator of the solution formula for one LinearProblem geometry.

    The quadrature geometry and data-independent matrices are built once;
    ``solve`` may then be called repeatedly with new data of the same shape.
    Boundary-data time transforms always run to the final time T: with the
    contour truncated at R the running-time variant loses the cancellation
    of the s > t part and misses the boundary data badly.
    """

    def __init__(self, problem: LinearProblem, *, formula: str | None = None):
        self.problem = problem
        grid = problem.grid
        self.alpha = float(problem.alpha)
        self.gamma = float(problem.gamma)
        self.formula = formula or problem.kind.value
        if self.formula not in ("dirichlet", "neumann", "robin"):
            raise ValueError(f"unknown formula {self.formula!r}")
        if self.formula == "neumann" and self.gamma != 0:
            raise InvariantViolation("gamma", "Neumann formula needs gamma = 0")
        self.x = grid.x
        self.t = grid.t
        self.contour = build_contour(grid.R, grid.nq, self.gamma)
        self.residue = self.formula == "robin" and self.contour.residue_active
        if self.residue:
            check_pole_clearance(self.contour)
        r, w = self.contour.ray_nodes, self.contour.weights
        xi = np.concatenate([r, -r, np.exp(-1j * np.pi / 3) * r, np.exp(-2j * np.pi / 3) * r])
        if self.residue:
            xi = np.concatenate([xi, residue_nodes(self.gamma)])
        self.nodes = _NodeSets(r, w, xi)
        self.quad = SampledQuadrature(self.x)
        self.K = np.concatenate([self.quad.ft_matrix(xi[i:i + _XI_BLOCK])
                                 for i in range(0, xi.size, _XI_BLOCK)])
        # the assembled exponent i xi x + i alpha xi^3 t must have Re <= 0 on the contour
        for ray in (self.contour.right, self.contour.left):
            worst = np.max(-ray.imag) * grid.L + np.max(-self.alpha * (ray**3).imag) * grid.T
            if worst > 1e-8 * max(1.0, self.alpha * grid.R**3 * grid.T):
                raise DivergentIntegrand("contour exponent has positive real part")

    # -- transforms -------------------------------------------------------
    def _initial_ft(self, initial):
        return self.K @ np.asarray(initial, dtype=float)

    def _forcing(self, forcing):
        nt, m = self.t.size, self.nodes.xi.size
        if forcing is None or not np.any(forcing):
            return np.zeros((nt, m), dtype=complex)
        fhat = (self.K @ np.asarray(forcing, dtype=float)).T  # (nt, m)
        return oscillatory_cumulative(fhat, self.t, self.alpha * self.nodes.xi**3)

    def _boundary(self, boundary):
        """Time transforms at xi^3 = -r^3 (right ray) and +r^3 (left ray) for
        every upper limit t_j: two arrays of shape (nt, N)."""
        r = self.nodes.r
        if not np.any(boundary):
            z = np.zeros((self.t.size, r.size), dtype=complex)
            return z, z
        om = self.alpha * np.concatenate([-(r**3), r**3])
        both = oscillatory_cumulative(np.asarray(boundary, dtype=float), self.t, om)
        return both[:, : r.size], both[:, r.size:]

    # -- assembly ---------------------------------------------------------
    def _ray_integrand(self, xi, N1, N2, bt):
        s, al, g = SIGMA, self.alpha, self.gamma
        if self.formula == "dirichlet":
            return s * N1 + s**2 * N2 - 3 * al * xi**2 * bt
        if self.formula == "neumann":
            return s**2 * N1 + s * N2 + 3j * al * xi * bt
        den = s * (xi - 1j * g)
        return ((xi + 1j * (s + 1) * g) * N1 - (xi * (s + 1) + 1j * g) * N2) / den \
            + 3j * al * xi**2 / (xi - 1j * g) * bt

    def coefficients(self, initial, boundary, forcing=None):
        """Per-set coefficient matrices C (nt, N) and the residue amplitude."""
        ns = self.nodes
        r, w, t, al = ns.r, ns.w, self.t, self.alpha
        u0 = self._initial_ft(initial)
        F = self._forcing(forcing)  # (nt, M)
        data_t = u0[None, :] + F  # transform data with forcing up to time t_j
        data_T = u0[None, :] + F[-1][None, :]  # forcing up to the final time
        ray_data = data_t if self.formula == "dirichlet" else data_T
        bt_r, bt_l = self._boundary(boundary)
        bt_r, bt_l = bt_r[-1][None, :], bt_l[-1][None, :]

        # exp(i alpha xi^3 t): xi^3 = r^3 on the real line and the left ray,
        # -r^3 at -r and on the right ray
        ph_pos = np.exp(1j * al * np.multiply.outer(t, r**3))
        ph_neg = np.conj(ph_pos)
        C = {
            "pos": w * ph_pos * data_t[:, ns.block("pos")],
            "neg": w * ph_neg * data_t[:, ns.block("neg")],
        }
        xr, xl = A * r, A**2 * r
        g_right = self._ray_integrand(xr, ray_data[:, ns.block("neg")],
                                      ray_data[:, ns.block("m60")], bt_r)
        g_left = self._ray_integrand(xl, ray_data[:, ns.block("m120")],
                                     ray_data[:, ns.block("pos")], bt_l)
        C["right"] = w * A * ph_neg * g_right
        C["left"] = -w * A**2 * ph_pos * g_left
        for name, c in C.items():
            if not np.all(np.isfinite(c)):
                raise DivergentIntegrand(f"non-finite integrand on set {name}")
        res_amp = None
        if self.residue:
            tail = slice(4 * ns.n, None)
            phi = oscillatory_cumulative(np.asarray(boundary, dtype=float), t,
                                         -1j * al * self.gamma**3)[-1]
            bundle = make_residue_transforms(u0[tail], F[-1][tail], phi, self.gamma)
            res_amp = residue_term(self.gamma, al, bundle, 0.0, 0.0)
        return C, res_amp

    def _exp_matrices(self, x, deriv=0):
        r = self.nodes.r
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = {}
        for name, xi in (("pos", r), ("neg", -r), ("right", A * r), ("left", A**2 * r)):
            out[name] = np.exp(1j * np.outer(x, xi)) * (1j * xi) ** deriv
        return out

    def evaluate(self, coeffs, x, deriv=0):
        """Complex field (len(x), nt) from coefficient matrices."""
        C, res_amp = coeffs
        E = self._exp_matrices(x, deriv)
        total = sum(E[k] @ C[k].T for k in C) / TWO_PI
        if res_amp is not None:
            g = self.gamma
            x = np.atleast_1d(np.asarray(x, dtype=float))
            total = total + res_amp * (-g) ** deriv * np.exp(
                -g * x[:, None] + self.alpha * g**3 * self.t[None, :])
        return total

    def solve(self, initial=None, boundary=None, forcing=None) -> LinearSolution:
        p = self.problem
        initial = p.initial if initial is None else initial
        boundary = p.boundary if boundary is None else boundary
        forcing = p.forcing if forcing is None else forcing
        coeffs = self.coefficients(initial, boundary, forcing)
        field_c = self.evaluate(coeffs, self.x)
        values = field_c.real
        scale = max(np.max(np.abs(values)), 1e-300)
        imag_rel = float(np.max(np.abs(field_c.imag)) / scale) if np.any(values) else 0.0
        meta = {
            "solver": f"utm_{self.formula}",
            "alpha": self.alpha, "gamma": self.gamma,
            "R": self.contour.R, "nq": int(self.contour.nq),
            "imag_residual_rel": imag_rel,
            "residue_active": bool(self.residue),
        }
        sol = LinearSolution(self.x, self.t, values, meta)
        sol.meta["coeffs"] = coeffs  # kept for trace evaluation; dropped on export
        return sol

    def trace(self, sol: LinearSolution, deriv=0, h=None):
        """d^k/dx^k at x = 0 for all grid times, by one-sided differences of the
        formula evaluated on a fine local stencil."""
        h = h or min(self.problem.grid.dx, 0.02)
        n = _ONE_SIDED.get(deriv, np.zeros(1)).size
        xs = h * np.arange(max(n, 1))
        vals = self.evaluate(sol.meta["coeffs"], xs).real
        return boundary_derivative(vals, h, deriv)


def _formula_for(kind: BoundaryKind):
    return {"dirichlet": "dirichlet", "neumann": "neumann", "robin": "robin"}[kind.value]


def solve_dirichlet(p: LinearProblem, **kw) -> LinearSolution:
    if p.kind is not BoundaryKind.DIRICHLET:
        raise InvariantViolation("boundary_kind", "solve_dirichlet needs Dirichlet data")
    sol = UTMSolver(p, formula="dirichlet", **kw).solve()
    mismatch = abs(p.initial[0] - p.boundary[0])
    sol.meta["compatibility_gap"] = float(mismatch)
    if mismatch > 1e-6 * max(1.0, np.max(np.abs(p.initial)), np.max(np.abs(p.boundary))):
        sol.meta["warnings"] = ["CompatibilityViolation: u0(0) != g0(0)"]
    return sol


def solve_robin(p: LinearProblem, **kw) -> LinearSolution:
    if p.kind is BoundaryKind.DIRICHLET:
        raise InvariantViolation("boundary_kind", "solve_robin needs Robin or Neumann data")
    return UTMSolver(p, formula="robin", **kw).solve()


def solve_neumann(p: LinearProblem, **kw) -> LinearSolution:
    if p.gamma != 0 or p.kind is BoundaryKind.DIRICHLET:
        raise InvariantViolation("gamma", "solve_neumann needs Neumann data (gamma = 0)")
    return UTMSolver(p, formula="neumann", **kw).solve()


def solve_linear(p: LinearProblem, **kw) -> LinearSolution:
    """Dispatch on the boundary kind."""
    if p.kind is BoundaryKind.DIRICHLET:
        return solve_dirichlet(p, **kw)
    if p.kind is BoundaryKind.NEUMANN:
        return solve_neumann(p, **kw)
    return solve_robin(p, **kw)


# whole-line solvers ------------------------------------------------------

def _check_aliasing(spec, frac=0.1, tol=1e-6):
    mag = np.abs(spec)
    if mag.ndim > 1:
        mag = mag.max(axis=tuple(range(1, mag.ndim)))
    peak = mag.max()
    if peak == 0:
        return
    n = mag.size
    k = np.abs(np.fft.fftfreq(n))
    tail = mag[k >= 0.5 * (1 - frac)].max()
    if tail > tol * peak:
        raise AliasingDetected(f"spectral tail {tail / peak:.2e} of peak exceeds {tol:g}")


def _wavenumbers(n, dx):
    return TWO_PI * np.fft.fftfreq(n, d=dx)


def solve_ivp_homogeneous(V0, alpha, t, dx, *, check=True):
    """Whole-line Airy evolution of samples V0 on a uniform periodic box.

    Returns an array (n,) for scalar ``t`` or (n, len(t)) for an array.
    """
    V0 = np.asarray(V0, dtype=float)
    if not np.any(V0):
        return np.zeros(V0.shape + np.shape(t))
    tail = max(abs(V0[0]), abs(V0[-1]))
    if check and tail > 1e-12 * max(1.0, np.max(np.abs(V0))):
        raise AliasingDetected("V0 does not decay at the box ends")
    k = _wavenumbers(V0.size, dx)
    spec = np.fft.fft(V0)
    if check:
        _check_aliasing(spec)
    ph = np.exp(1j * alpha * np.multiply.outer(k**3, np.asarray(t, dtype=float)))
    out = np.fft.ifft(spec.reshape(spec.shape + (1,) * np.ndim(t)) * ph, axis=0)
    return out.real


def solve_ivp_forced(w, alpha, t, dx, *, check=True, deriv=0):
    """Duhamel integral W(., t_j) = int_0^{t_j} S(t_j - s) w(., s) ds.

    ``w`` has shape (n, nt) on a periodic box; the s-integral of each Fourier
    mode uses the same exact-moment quadrature as the time transforms.
    ``deriv`` returns the x-derivative of that order instead.
    """
    w = np.asarray(w, dtype=float)
    if not np.any(w):
        return np.zeros_like(w)
    k = _wavenumbers(w.shape[0], dx)
    spec = np.fft.fft(w, axis=0)  # (n, nt)
    if check:
        _check_aliasing(spec)
    omega = alpha * k**3
    acc = oscillatory_cumulative(spec.T, t, omega)  # (nt, n)
    Wk = np.exp(1j * np.multiply.outer(t, omega)) * acc * (1j * k) ** deriv
    return np.fft.ifft(Wk.T, axis=0).real


# superposition -------------------------------------------------------------

@dataclass
class ExtendedBox:
    """Periodic box [-left, right) sharing the half-line grid spacing."""

    grid: GridSpec
    left_factor: float = 2.0
    right_factor: float = 0.5
    i0: int = field(init=False)
    x: np.ndarray = field(init=False)

    def __post_init__(self):
        dx = self.grid.dx
        n_left = int(np.ceil(self.left_factor * self.grid.L / dx))
        n_right = self.grid.nx + int(np.ceil(self.right_factor * self.grid.L / dx))
        n = n_left + n_right
        n += n % 2
        self.i0 = n_left
        self.x = (np.arange(n) - n_left) * dx

    @property
    def half(self):
        return slice(self.i0, self.i0 + self.grid.nx)

    def extend(self, f):
        """Even reflection of half-line samples (axis 0), zero elsewhere."""
        f = np.asarray(f, dtype=float)
        out = np.zeros((self.x.size,) + f.shape[1:])
        nx = self.grid.nx
        out[self.half] = f
        m = min(nx - 1, self.i0)
        out[self.i0 - m:self.i0] = f[1:m + 1][::-1]
        return out


def _spectral_trace(values_ext, dx, i0, deriv):
    k = _wavenumbers(values_ext.shape[0], dx)
    spec = np.fft.fft(values_ext, axis=0) * ((1j * k) ** deriv)[:, None]
    return np.fft.ifft(spec, axis=0)[i0].real


def solve_forced_by_superposition(p: LinearProblem, box: ExtendedBox | None = None,
                                  **kw) -> LinearSolution:
    """Whole-line evolution of an extension of the data, plus pure boundary
    problems that correct the traces left at x = 0."""
    grid = p.grid
    box = box or ExtendedBox(grid)
    dx, t, al, g = grid.dx, grid.t, p.alpha, p.gamma
    dirichlet = p.kind is BoundaryKind.DIRICHLET
    V0 = box.extend(p.initial)
    V = solve_ivp_homogeneous(V0, al, t, dx)
    forcing = p.forcing if p.forcing is not None else np.zeros((grid.nx, grid.nt))
    W = solve_ivp_forced(box.extend(forcing), al, t, dx)

    def correction(field_ext):
        if not np.any(field_ext):
            return np.zeros(grid.nt)
        val = field_ext[box.i0]
        if dirichlet:
            return val
        return _spectral_trace(field_ext, dx, box.i0, 1) + g * val

    phi = p.boundary - correction(V)
    W0 = -correction(W)
    solver = UTMSolver(p.replace(initial=np.zeros(grid.nx), forcing=None), **kw)
    zero = np.zeros(grid.nx)
    part_phi = solver.solve(zero, phi, None)
    part_w = solver.solve(zero, W0, None)
    values = V[box.half] + W[box.half] + part_phi.values + part_w.values
    meta = {
        "solver": "utm_superposition",
        "alpha": al, "gamma": g,
        "terms": {
            "whole_line_initial_trace0": float(np.max(np.abs(V[box.i0]))),
            "whole_line_forced_trace0": float(np.max(np.abs(W[box.i0]))),
            "corrected_boundary_norm": float(np.linalg.norm(phi) * np.sqrt(grid.dt)),
            "forced_boundary_norm": float(np.linalg.norm(W0) * np.sqrt(grid.dt)),
            "imag_residual_rel": max(part_phi.meta["imag_residual_rel"],
                                     part_w.meta["imag_residual_rel"]),
        },
    }
    return LinearSolution(grid.x, t, values, meta)


# global relation -------------------------------------------------------------

def global_relation_residual(sol: LinearSolution, p: LinearProblem, xi_probes, t: float,
                             *, traces=None) -> float:
    """max over probes of |LHS - RHS| / (1 + |RHS|) for the relation

        e^{-i alpha xi^3 t} vhat(xi, t)
          = vhat0(xi) + alpha [g2 + i xi g1 - xi^2 g0](xi, t) + F(xi, t),

    with g_j the time transforms of the computed boundary traces.
    """
    xi = np.atleast_1d(np.asarray(xi_probes, dtype=complex))
    if np.any(xi.imag > 1e-14):
        raise ValueError("global relation probes need Im xi <= 0")
    grid = p.grid
    tt = grid.t
    j = int(np.argmin(np.abs(tt - t)))
    if abs(tt[j] - t) > 1e-9 * grid.T:
        raise ValueError("t must be a grid time")
    if not np.any(sol.values) and not np.any(p.initial) and not np.any(p.boundary) \
            and (p.forcing is None or not np.any(p.forcing)):
        return 0.0
    al = p.alpha
    quad = SampledQuadrature(grid.x)
    K = quad.ft_matrix(xi)
    lhs = np.exp(-1j * al * xi**3 * tt[j]) * (K @ sol.values[:, j])
    if traces is None:
        traces = [trace_from_grid(sol.values, grid.dx, k) for k in range(3)]
    ts = tt[: j + 1]
    om = al * xi**3
    g = [oscillatory_cumulative(np.asarray(tr)[: j + 1], ts, om)[-1] if j > 0
         else np.zeros_like(xi) for tr in traces]
    rhs = K @ np.asarray(p.initial, dtype=float) + al * (g[2] + 1j * xi * g[1] - xi**2 * g[0])
    if p.forcing is not None and np.any(p.forcing) and j > 0:
        fhat = (K @ np.asarray(p.forcing, dtype=float)[:, : j + 1]).T
        rhs = rhs + oscillatory_cumulative(fhat, ts, om)[-1]
    return float(np.max(np.abs(lhs - rhs) / (1 + np.abs(rhs))))


def pde_residual(sol: LinearSolution, p: LinearProblem, stride=4) -> float:
    """Relative defect of v_t + alpha v_xxx - f on a coarsened interior grid."""
    v = sol.values
    dx, dt = p.grid.dx, p.grid.dt
    vt = np.gradient(v, dt, axis=1, edge_order=2)
    c = fd_weights(np.arange(-3, 4), 3)
    vxxx = np.zeros_like(v)
    for k, ck in enumerate(c):
        vxxx[3:-3] += ck * v[k:v.shape[0] - 6 + k]
    vxxx /= dx**3
    f = p.forcing if p.forcing is not None else np.zeros_like(v)
    res = vt + p.alpha * vxxx - f
    sl = (slice(6, -6, stride), slice(2, -2, stride))
    scale = np.linalg.norm(f[sl]) + np.linalg.norm(vt[sl])
    return float(np.linalg.norm(res[sl]) / scale) if scale > 0 else 0.0


__all__ = [
    "LinearProblem", "UTMSolver", "solve_dirichlet", "solve_robin", "solve_neumann",
    "solve_linear", "solve_ivp_homogeneous", "solve_ivp_forced",
    "solve_forced_by_superposition", "global_relation_residual", "pde_residual",
    "ExtendedBox", "fd_weights", "boundary_derivative", "trace_from_grid", "relative_l2",
]
