"""Discrete Sobolev and Bourgain-type norms.

Transforms follow uhat(xi, tau) = int int exp(-i(x xi + t tau)) u dx dt, so a
free wave exp(i(xi x + alpha xi^3 t)) sits on tau = alpha xi^3.  Norms carry
the 1/(2 pi) Plancherel factor per dimension: at s = b = 0 they reduce to
plain L^2 norms of the samples.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class SpaceTimeSample:
    values: np.ndarray  # shape (nx, nt); axis 0 is space
    dx: float
    dt: float
    periodic_ok: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("space-time samples must be 2-D (x, t)")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite samples")

    @property
    def shape(self):
        return np.shape(self.values)


def _taper(n):
    """Smooth ramp 0 -> 1 over n points (cubic smoothstep)."""
    s = (np.arange(n) + 0.5) / max(n, 1)
    return s * s * (3 - 2 * s)


def canonical_extension(values, dx, dt, L_ext=None):
    """One fixed extension of half-line data u(x, t), 0 <= x <= L, 0 <= t <= T.

    x < 0: even reflection on [-L_ext, 0], tapered to zero over the outer
    L_ext/4.  t outside [0, T]: the end slices are held constant and tapered
    to zero over T/8 on each side.  The norm of this extension bounds the
    restriction norm from above.
    """
    v = np.asarray(values, dtype=float)
    nx, nt = v.shape
    L = dx * (nx - 1)
    L_ext = L if L_ext is None else L_ext
    n_left = int(round(L_ext / dx))
    refl = np.zeros((n_left, nt))
    m = min(n_left, nx - 1)
    refl[n_left - m:] = v[1:m + 1][::-1]
    nt_taper = max(1, int(round(n_left / 4)))
    refl[:nt_taper] *= _taper(nt_taper)[:, None]
    ext = np.concatenate([refl, v], axis=0)
    n_t = max(2, int(round((nt - 1) / 8)))
    before = ext[:, :1] * _taper(n_t)[None, :]
    after = ext[:, -1:] * _taper(n_t)[::-1][None, :]
    ext = np.concatenate([before, ext, after], axis=1)
    return SpaceTimeSample(ext, dx, dt, meta={"extension": "canonical", "upper_bound": True})


def _fft2(w: SpaceTimeSample):
    v = np.asarray(w.values)
    nx, nt = v.shape
    U = np.fft.fft2(v) * (w.dx * w.dt)
    xi = TWO_PI * np.fft.fftfreq(nx, d=w.dx)
    tau = TWO_PI * np.fft.fftfreq(nt, d=w.dt)
    cell = 1.0 / (nx * w.dx * nt * w.dt)  # d xi d tau / (2 pi)^2
    return U, xi[:, None], tau[None, :], cell


def _as_sample(w, dx=None, dt=None):
    if isinstance(w, SpaceTimeSample):
        return w
    if dx is None or dt is None:
        raise ValueError("raw arrays need dx and dt")
    return SpaceTimeSample(np.asarray(w), dx, dt)


def spectral_tail(w, frac=0.1):
    """Largest |uhat| in the outer ``frac`` of the DFT box, relative to the peak."""
    U, _, _, _ = _fft2(_as_sample(w))
    mag = np.abs(U)
    peak = mag.max()
    if peak == 0:
        return 0.0
    nx, nt = mag.shape
    kx = np.abs(np.fft.fftfreq(nx))[:, None]
    kt = np.abs(np.fft.fftfreq(nt))[None, :]
    outer = (kx >= 0.5 * (1 - frac)) | (kt >= 0.5 * (1 - frac))
    return float(mag[outer].max() / peak)


def sobolev_norm(f, s, dx, pad=True):
    """(1/2pi) int (1 + xi^2)^s |fhat|^2 d xi, square-rooted, over DFT bins.

    ``pad`` appends zeros so the periodic image of f does not touch itself.
    """
    f = np.asarray(f, dtype=float)
    if not np.any(f):
        return 0.0
    if pad:
        f = np.concatenate([f, np.zeros(f.size)])
    n = f.size
    F = np.fft.fft(f) * dx
    xi = TWO_PI * np.fft.fftfreq(n, d=dx)
    val = np.sum((1 + xi**2) ** s * np.abs(F) ** 2) / (n * dx)
    return float(np.sqrt(val))


def bourgain_norm(w, s, b, alpha, *, dx=None, dt=None):
    w = _as_sample(w, dx, dt)
    U, xi, tau, cell = _fft2(w)
    weight = (1 + np.abs(xi)) ** (2 * s) * (1 + np.abs(tau - alpha * xi**3)) ** (2 * b)
    return float(np.sqrt(np.sum(weight * np.abs(U) ** 2) * cell))


def low_frequency_term(w, theta, *, dx=None, dt=None):
    """The |xi| < 1 part with weight (1 + |tau|)^(2 theta)."""
    w = _as_sample(w, dx, dt)
    U, xi, tau, cell = _fft2(w)
    weight = (np.abs(xi) < 1) * (1 + np.abs(tau)) ** (2 * theta)
    return float(np.sqrt(np.sum(weight * np.abs(U) ** 2) * cell))


def modified_bourgain_norm(w, s, b, theta, alpha, *, dx=None, dt=None):
    w = _as_sample(w, dx, dt)
    base = bourgain_norm(w, s, b, alpha)
    low = low_frequency_term(w, theta)
    return float(np.sqrt(base**2 + low**2))


def temporal_norm(w, s, b, alpha, *, dx=None, dt=None):
    w = _as_sample(w, dx, dt)
    U, xi, tau, cell = _fft2(w)
    weight = (1 + np.abs(tau)) ** (2 * s / 3) * (1 + np.abs(tau - alpha * xi**3)) ** (2 * b)
    return float(np.sqrt(np.sum(weight * np.abs(U) ** 2) * cell))
