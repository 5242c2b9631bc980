"""Resonance functions of the coupled system and the critical Sobolev exponent.

d_alpha(xi, xi1) = -xi^3 + alpha xi1^3 + alpha (xi - xi1)^3 governs the
u-equation nonlinearity (v^2)_x, and
d_tilde_alpha(xi, xi1) = -alpha xi^3 + xi1^3 + alpha (xi - xi1)^3 the
v-equation nonlinearity (u v)_x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AlphaOne, InvariantViolation, ParameterOutOfRange


def d_alpha(xi, xi1, alpha):
    xi, xi1 = np.asarray(xi, dtype=float), np.asarray(xi1, dtype=float)
    out = -xi**3 + alpha * xi1**3 + alpha * (xi - xi1) ** 3
    return float(out) if out.ndim == 0 else out


def d_tilde_alpha(xi, xi1, alpha):
    xi, xi1 = np.asarray(xi, dtype=float), np.asarray(xi1, dtype=float)
    out = -alpha * xi**3 + xi1**3 + alpha * (xi - xi1) ** 3
    return float(out) if out.ndim == 0 else out


def modulations(xi, tau, xi1, tau1, alpha):
    """(tau - xi^3, tau1 - alpha xi1^3, tau - tau1 - alpha (xi - xi1)^3).

    The first minus the other two equals d_alpha(xi, xi1), so the largest
    modulus is at least |d_alpha| / 3.
    """
    xi, tau, xi1, tau1 = (np.asarray(v, dtype=float) for v in (xi, tau, xi1, tau1))
    return tau - xi**3, tau1 - alpha * xi1**3, tau - tau1 - alpha * (xi - xi1) ** 3


class CriticalExponent(NamedTuple):
    value: float
    inclusive: bool  # False encodes the "+" in -3/4+: only s > value is admissible

    def admits(self, s: float) -> bool:
        return s >= self.value if self.inclusive else s > self.value


def critical_exponent(alpha: float) -> CriticalExponent:
    if not alpha > 0:
        raise ParameterOutOfRange("alpha must be positive")
    if alpha == 4:
        return CriticalExponent(0.75, True)
    if alpha == 1 or alpha > 4:
        return CriticalExponent(-0.75, False)
    return CriticalExponent(0.0, True)


def delta(alpha: float) -> float:
    """(1/10) min(sqrt(alpha)/|1 - alpha|, 1/1000); alpha = 1 takes the limit."""
    if not alpha > 0:
        raise ParameterOutOfRange("alpha must be positive")
    ratio = math.inf if alpha == 1 else math.sqrt(alpha) / abs(1 - alpha)
    return 0.1 * min(ratio, 1e-3)


def roots(alpha: float):
    """Zeros of d_alpha(1, .): 1/2 -+ sqrt(-3 + 12/alpha)/6, complex for alpha > 4."""
    disc = -3 + 12 / alpha
    root = math.sqrt(disc) if disc >= 0 else 1j * math.sqrt(-disc)
    return 0.5 - root / 6, 0.5 + root / 6


def v_roots(alpha: float):
    """Zeros y of (1 - alpha) y^2 + 3 alpha y - 3 alpha, i.e. d_tilde(1, y) = 0 with y != 0."""
    if alpha == 1:
        raise AlphaOne("the v-quantity is quadratic only for alpha != 1")
    disc = 3 * alpha * (4 - alpha)
    root = math.sqrt(disc) if disc >= 0 else 1j * math.sqrt(-disc)
    den = 2 * (alpha - 1)
    return (3 * alpha + root) / den, (3 * alpha - root) / den


@dataclass(frozen=True)
class ResonanceGeometry:
    alpha: float
    r1: complex | float
    r2: complex | float
    p1: float | None
    p2: float | None
    q: float | None
    delta: float

    @property
    def real_roots(self) -> bool:
        return not isinstance(self.r1, complex)

    def require_critical_points(self):
        if self.p1 is None:
            raise AlphaOne("critical points and inflection are undefined at alpha = 1")
        return self.p1, self.p2, self.q


def _check_identities(g: ResonanceGeometry, rtol=1e-10):
    a = g.alpha
    xi = np.array([0.7, -1.3, 2.9])
    # d/dxi1 vanishes at xi1 = xi/2
    dd1 = 3 * a * (xi / 2) ** 2 - 3 * a * (xi - xi / 2) ** 2
    checks = [np.max(np.abs(dd1))]
    if g.p1 is not None:
        xi1 = np.array([0.4, -2.1, 1.7])
        for p in (g.p1, g.p2):
            x = p * xi1
            checks.append(np.max(np.abs(-3 * x**2 + 3 * a * (x - xi1) ** 2)) / np.max(x**2 + xi1**2))
        x = g.q * xi1
        checks.append(np.max(np.abs(6 * (a - 1) * x - 6 * a * xi1)) / np.max(np.abs(x) + np.abs(xi1)))
    if max(checks) > rtol:
        raise InvariantViolation("geometry", f"derivative identities fail ({max(checks):.2e})")


def geometry(alpha: float, *, strict: bool = False) -> ResonanceGeometry:
    """Roots, critical points and inflection of d_alpha, per unit xi (roots) or xi1.

    At alpha = 1 the critical points and inflection are undefined: ``strict``
    raises AlphaOne, otherwise they are left as None.
    """
    if not alpha > 0:
        raise ParameterOutOfRange("alpha must be positive")
    r1, r2 = roots(alpha)
    if alpha == 1:
        if strict:
            raise AlphaOne("critical points and inflection are undefined at alpha = 1")
        p1 = p2 = q = None
    else:
        sa = math.sqrt(alpha)
        p1, p2, q = sa / (sa - 1), sa / (sa + 1), alpha / (alpha - 1)
    g = ResonanceGeometry(alpha, r1, r2, p1, p2, q, delta(alpha))
    _check_identities(g)
    return g


def resonance_table(alphas):
    """Rows of (alpha, s_c, inclusive, r1, r2, p1, p2, q, delta) for reporting."""
    rows = []
    for a in alphas:
        g = geometry(float(a))
        sc = critical_exponent(float(a))
        rows.append({
            "alpha": float(a), "s_c": sc.value, "inclusive": sc.inclusive,
            "r1": g.r1, "r2": g.r2, "p1": g.p1, "p2": g.p2, "q": g.q, "delta": g.delta,
        })
    return rows
