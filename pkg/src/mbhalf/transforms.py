"""Half-line Fourier transforms, time transforms and the forcing transform.

Spatial integrals use composite Gauss-Legendre panels.  Sampled data are
first interpolated onto the panel nodes by local degree-5 Lagrange stencils,
so the transform of samples is a fixed linear map ``K @ f``.

Time integrals are highly oscillatory (the frequency alpha*xi^3 reaches
thousands on the contour), so a cubic spline of the samples is integrated
against exp(-i w t) exactly, using the moments
mu_k(z) = int_0^1 exp(-z s) s^k ds.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline

from .errors import DivergentIntegrand

EXP_GUARD = 700.0  # log of the largest growth factor we accept


class TransformKind(str, enum.Enum):
    HALF_LINE = "half_line_ft"
    TIME = "time_transform"
    FORCING = "forcing_transform"


@dataclass(frozen=True)
class SpectralField:
    nodes: np.ndarray
    values: np.ndarray
    kind: TransformKind

    def __post_init__(self):
        if np.shape(self.nodes)[0] != np.shape(self.values)[0]:
            raise ValueError("nodes and values must have equal length")


@lru_cache(maxsize=None)
def _leggauss(order):
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre_panels(a, b, n_panels, order=8):
    """Nodes and weights of composite Gauss-Legendre on [a, b]."""
    g, w = _leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * g).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def _check_growth(xi, L):
    growth = np.max(np.imag(np.atleast_1d(xi))) * L if np.size(xi) else 0.0
    if growth > EXP_GUARD:
        raise DivergentIntegrand(f"exp(-i x xi) grows like e^{growth:.0f} on [0, L]")


class SampledQuadrature:
    """Quadrature for integrals of uniformly sampled data on [0, L].

    Each grid cell carries ``per_cell`` Gauss-Legendre nodes; data at those
    nodes come from the centred six-point Lagrange stencil (shifted near the
    ends), stored as a sparse matrix ``P``.
    """

    def __init__(self, x, per_cell=4, stencil=6):
        x = np.asarray(x, dtype=float)
        n = x.size
        if n < stencil:
            raise ValueError("need at least as many samples as the stencil width")
        dx = x[1] - x[0]
        if not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0):
            raise ValueError("sampled quadrature needs a uniform grid")
        self.x = x
        self.nodes, self.weights = gauss_legendre_panels(x[0], x[-1], n - 1, per_cell)
        cell = np.repeat(np.arange(n - 1), per_cell)
        first = np.clip(cell - stencil // 2 + 1, 0, n - stencil)
        cols = first[:, None] + np.arange(stencil)
        s = (self.nodes[:, None] - x[cols]) / dx  # distance to each stencil point, in cells
        vals = np.ones_like(s)
        for j in range(stencil):
            for m in range(stencil):
                if m != j:
                    vals[:, j] *= s[:, m] / (j - m)
        rows = np.repeat(np.arange(self.nodes.size), stencil)
        self.P = sparse.csr_matrix((vals.ravel(), (rows, cols.ravel())),
                                   shape=(self.nodes.size, n))

    def interpolate(self, f):
        return self.P @ np.asarray(f)

    def integrate(self, f):
        return self.weights @ self.interpolate(f)

    def ft_matrix(self, xi):
        """Matrix K with K @ f = int_0^L exp(-i x xi) f(x) dx for samples f."""
        xi = np.atleast_1d(np.asarray(xi, dtype=complex))
        _check_growth(xi, self.x[-1])
        E = np.exp(-1j * np.outer(xi, self.nodes)) * self.weights
        return np.asarray((self.P.T @ E.T).T)


def half_line_ft(f, xi, L=None, *, x=None, n_panels=None, order=8):
    """int_0^L exp(-i x xi) f(x) dx.

    ``f`` is either a callable (evaluated at composite Gauss-Legendre nodes)
    or an array of samples on the uniform grid ``x`` (default
    ``linspace(0, L, len(f))``).  ``xi`` may be a scalar or an array; complex
    values with Im xi > 0 are allowed because the integral is over a
    bounded interval, up to the overflow guard.
    """
    xi_arr = np.asarray(xi, dtype=complex)
    flat = np.atleast_1d(xi_arr).ravel()
    if callable(f):
        if L is None:
            raise ValueError("L is required for callable data")
        _check_growth(flat, L)
        if n_panels is None:
            kmax = float(np.max(np.abs(flat))) if flat.size else 0.0
            n_panels = max(16, int(np.ceil(L * (kmax + 1.0) / 2.0)))
        nodes, weights = gauss_legendre_panels(0.0, L, n_panels, order)
        vals = np.asarray(f(nodes), dtype=complex) * weights
        out = np.exp(-1j * np.outer(flat, nodes)) @ vals
    else:
        samples = np.asarray(f, dtype=float)
        if not np.any(samples):
            out = np.zeros(flat.shape, dtype=complex)
        else:
            if x is None:
                if L is None:
                    raise ValueError("give the sample grid x or the length L")
                x = np.linspace(0.0, L, samples.size)
            out = SampledQuadrature(x).ft_matrix(flat) @ samples
    if not np.all(np.isfinite(out)):
        raise DivergentIntegrand("non-finite half-line transform")
    return complex(out[0]) if xi_arr.ndim == 0 else out.reshape(xi_arr.shape)


# time direction ---------------------------------------------------------

def moments(z, kmax=3):
    """mu_k(z) = int_0^1 exp(-z s) s^k ds for k = 0..kmax, stacked on axis 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((kmax + 1,) + z.shape, dtype=complex)
    small = np.abs(z) < 1.0
    # power series for small |z|
    zs = np.where(small, z, 0.0)
    for k in range(kmax + 1):
        term = np.ones_like(zs)
        acc = term / (k + 1)
        for n in range(1, 30):
            term = term * (-zs) / n
            acc = acc + term / (n + k + 1)
        out[k] = acc
    # upward recursion, stable once |z| >= 1 for the few k we need
    zl = np.where(small, 1.0, z)
    e = np.exp(-zl)
    mu = (1 - e) / zl
    big = ~small
    out[0] = np.where(big, mu, out[0])
    for k in range(1, kmax + 1):
        mu = (k * mu - e) / zl
        out[k] = np.where(big, mu, out[k])
    return out


def oscillatory_cumulative(values, t, omega):
    """Running integrals I_j = int_0^{t_j} exp(-i omega tau) S(tau) d tau.

    ``values`` has shape (nt, ...) with time on axis 0; ``omega`` broadcasts
    against ``values[0]``.  S is the not-a-knot cubic spline through the
    samples, integrated exactly on each cell.
    """
    values = np.asarray(values)
    t = np.asarray(t, dtype=float)
    omega = np.asarray(omega, dtype=complex)
    nt = t.size
    out_shape = np.broadcast_shapes(values.shape[1:], omega.shape)
    extra = len(out_shape) - (values.ndim - 1)
    values = values.reshape(values.shape + (1,) * extra)
    if nt < 2:
        return np.zeros((nt,) + out_shape, dtype=complex)
    growth = np.max(np.imag(omega)) * t[-1] if omega.size else 0.0
    if growth > EXP_GUARD:
        raise DivergentIntegrand(f"time factor grows like e^{growth:.0f}")
    h = t[1] - t[0]
    if nt >= 4:
        coef = CubicSpline(t, values, axis=0).c  # (4, nt-1, ...)
    else:
        # too few samples for a cubic; use the chord on each cell
        slope = np.diff(values, axis=0) / h
        zero = np.zeros_like(slope)
        coef = np.stack([zero, zero, slope, values[:-1]])
    mu = moments(1j * omega * h)  # (4, ...)
    cell = sum(coef[3 - k] * (h ** (k + 1)) * mu[k] for k in range(4))
    phase = np.exp(-1j * np.multiply.outer(t[:-1], omega))
    inc = phase * cell
    out = np.zeros((nt,) + out_shape, dtype=complex)
    out[1:] = np.cumsum(inc, axis=0)
    return out


def _time_samples(g, t_end, t):
    if callable(g):
        t = np.linspace(0.0, t_end, 2049) if t is None else np.asarray(t, dtype=float)
        return np.asarray(g(t), dtype=float), t
    g = np.asarray(g, dtype=float)
    return g, (np.linspace(0.0, t_end, g.size) if t is None else np.asarray(t, dtype=float))


def time_transform(g, xi_cubed, alpha, t_end, *, t=None):
    """int_0^{t_end} exp(-i alpha xi_cubed s) g(s) ds for samples on [0, t_end]."""
    gs, tt = _time_samples(g, t_end, t)
    w = alpha * np.asarray(xi_cubed, dtype=complex)
    if not np.any(gs):
        return np.zeros_like(w) if w.ndim else 0j
    res = oscillatory_cumulative(gs, tt, w)[-1]
    if not np.all(np.isfinite(res)):
        raise DivergentIntegrand("non-finite time transform")
    return complex(res) if np.ndim(res) == 0 else res


def forcing_series(f, xi, alpha, x, t, quad: SampledQuadrature | None = None):
    """F(xi, t_j) for every grid time: array of shape (nt, len(xi))."""
    f = np.asarray(f, dtype=float)
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    if not np.any(f):
        return np.zeros((len(t), xi.size), dtype=complex)
    quad = quad or SampledQuadrature(x)
    fhat = (quad.ft_matrix(xi) @ f).T  # (nt, nxi)
    return oscillatory_cumulative(fhat, t, alpha * xi**3)


def forcing_transform(f, xi, t_end, alpha, *, x=None, t=None, L=None):
    """F(xi, t_end) = int_0^{t_end} exp(-i alpha xi^3 tau) fhat(xi, tau) d tau.

    ``f`` holds samples of shape (nx, nt) on [0, L] x [0, t_end].
    """
    f = np.asarray(f, dtype=float)
    if x is None:
        x = np.linspace(0.0, L, f.shape[0])
    if t is None:
        t = np.linspace(0.0, t_end, f.shape[1])
    xi_arr = np.asarray(xi, dtype=complex)
    res = forcing_series(f, xi_arr.ravel(), alpha, x, t)[-1]
    if not np.all(np.isfinite(res)):
        raise DivergentIntegrand("non-finite forcing transform")
    return complex(res[0]) if xi_arr.ndim == 0 else res.reshape(xi_arr.shape)
