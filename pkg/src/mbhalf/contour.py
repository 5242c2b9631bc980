"""The contour bounding the sector pi/3 < arg xi < 2pi/3, and the pole at i*gamma.

Both rays are parametrized by the same abscissae r in (0, R]: the right ray
is xi = a r (traversed outward) and the left ray xi = a^2 r (traversed
inward), so the sector stays on the left of the path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteIntegrand, PoleOnContour
from .transforms import SpectralField, TransformKind, gauss_legendre_panels

SIGMA = np.exp(2j * np.pi / 3)
A = np.exp(1j * np.pi / 3)


@dataclass(frozen=True)
class ContourConstants:
    sigma: complex = complex(SIGMA)
    a: complex = complex(A)

    @property
    def a_R(self):
        return self.a.real

    @property
    def a_I(self):
        return self.a.imag


@dataclass(frozen=True)
class ContourQuadrature:
    R: float
    ray_nodes: np.ndarray
    weights: np.ndarray
    gamma: float
    pole: complex | None

    @property
    def residue_active(self) -> bool:
        return self.pole is not None

    @property
    def nq(self):
        return self.ray_nodes.size

    @property
    def right(self):
        return A * self.ray_nodes

    @property
    def left(self):
        return A**2 * self.ray_nodes


def build_contour(R: float, nq: int, gamma: float = 0.0, order: int = 8) -> ContourQuadrature:
    if not R > 0 or nq < 8:
        raise ValueError("need R > 0 and nq >= 8")
    n_panels = max(1, int(np.ceil(nq / order)))
    r, w = gauss_legendre_panels(0.0, R, n_panels, order)
    pole = 1j * gamma if gamma > 0 else None
    return ContourQuadrature(float(R), r, w, float(gamma), pole)


def check_pole_clearance(quad: ContourQuadrature, factor: float = 2.0):
    """The pole sits at distance gamma*sqrt(3)/2 from the rays; it must not be
    smaller than a couple of panel widths or the quadrature cannot see it."""
    if quad.gamma > 0:
        panel = quad.R * 8 / quad.nq
        if quad.gamma < factor * panel:
            raise PoleOnContour(
                f"pole i*{quad.gamma:g} within {factor:g} panel widths ({panel:.3g}) of the corner")


def integrate_boundary(F, quad: ContourQuadrature) -> complex:
    """Oriented integral of F over both rays: sum w [F(a r) a - F(a^2 r) a^2]."""
    fr = np.asarray(F(quad.right), dtype=complex)
    fl = np.asarray(F(quad.left), dtype=complex)
    for vals, nodes in ((fr, quad.right), (fl, quad.left)):
        bad = ~np.isfinite(vals)
        if np.any(bad):
            raise NonFiniteIntegrand(f"integrand not finite at xi = {nodes[np.argmax(bad)]:.6g}")
    return complex(np.sum(quad.weights * (fr * A - fl * A**2)))


def residue_term(gamma: float, alpha: float, data_transforms: dict, x, t):
    """Contribution of the pole at i*gamma, for gamma > 0.

    ``data_transforms`` maps
      "initial"  -> SpectralField at nodes [i sigma gamma, i sigma^2 gamma]
      "forcing"  -> SpectralField of F(., T) at the same nodes (optional)
      "boundary" -> SpectralField at node [-i gamma^3] of the boundary time transform
    """
    if not gamma > 0:
        raise ValueError("residue term only exists for gamma > 0")
    n1 = complex(data_transforms["initial"].values[0])
    n2 = complex(data_transforms["initial"].values[1])
    forcing = data_transforms.get("forcing")
    if forcing is not None:
        n1 += complex(forcing.values[0])
        n2 += complex(forcing.values[1])
    phi = complex(data_transforms["boundary"].values[0])
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    growth = np.exp(-gamma * np.multiply.outer(x, np.ones_like(t))
                    + alpha * gamma**3 * np.multiply.outer(np.ones_like(x), t))
    coeff = -(2 + SIGMA) * gamma / SIGMA * (n2 - n1) - 3 * alpha * gamma**2 * phi
    return coeff * growth


def residue_nodes(gamma: float):
    return np.array([1j * SIGMA * gamma, 1j * SIGMA**2 * gamma])


def make_residue_transforms(initial_ft, forcing_T, boundary_tilde, gamma):
    nodes = residue_nodes(gamma)
    out = {
        "initial": SpectralField(nodes, np.asarray(initial_ft), TransformKind.HALF_LINE),
        "boundary": SpectralField(np.array([-1j * gamma**3]), np.atleast_1d(boundary_tilde),
                                  TransformKind.TIME),
    }
    if forcing_T is not None:
        out["forcing"] = SpectralField(nodes, np.asarray(forcing_T), TransformKind.FORCING)
    return out
