"""Numerical probes of the bilinear-estimate machinery.

Two tools: one-dimensional calculus inequalities checked by adaptive
quadrature, and the convolution quantity Theta built from indicator data on
thin sets near the resonance zeros, whose L^2 norm is measured as the
frequency parameter N grows.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad

from .errors import NotEnoughSignal, ParameterOutOfRange, QuadratureUnderResolved
from .resonance import roots

# ---------------------------------------------------------------- calculus


def _split_quad(f, points, lo=-np.inf, hi=np.inf):
    pts = sorted({p for p in points if lo < p < hi})
    edges = [lo, *pts, hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(f, a, b, limit=200, epsabs=0, epsrel=1e-10)
        total += val
    return total


def calculus_bound_check(kind: str, l: float, l_prime: float, a: float, c: float):
    """Return (lhs, rhs_shape) for one of the three calculus inequalities.

    conv_decay   int dx / ((1+|x-a|)^{2l} (1+|x-c|)^{2l'})  vs (1+|a-c|)^{-2 min(l,l')},
                 1/2 < l, l' < 1
    sqrt_kernel  int_{|x|<=c} dx / ((1+|x|)^{2(1-l)} |a-x|^{1/2})  vs (1+c)^{2l-1} / (1+|a|)^{1/2},
                 1/2 < l < 1 (l_prime unused)
    subhalf_conv same integral as conv_decay vs (1+|a-c|)^{-(2l+2l'-1)}, 1/4 < l' <= l < 1/2
    """
    if kind in ("conv_decay", "subhalf_conv"):
        if kind == "conv_decay" and not (0.5 < l < 1 and 0.5 < l_prime < 1):
            raise ParameterOutOfRange("conv_decay needs 1/2 < l, l' < 1")
        if kind == "subhalf_conv" and not (0.25 < l_prime <= l < 0.5):
            raise ParameterOutOfRange("subhalf_conv needs 1/4 < l' <= l < 1/2")

        def f(x):
            return (1 + abs(x - a)) ** (-2 * l) * (1 + abs(x - c)) ** (-2 * l_prime)

        lhs = _split_quad(f, (a, c))
        if kind == "conv_decay":
            rhs = (1 + abs(a - c)) ** (-2 * min(l, l_prime))
        else:
            rhs = (1 + abs(a - c)) ** (-(2 * l + 2 * l_prime - 1))
        return lhs, rhs
    if kind == "sqrt_kernel":
        if not 0.5 < l < 1:
            raise ParameterOutOfRange("sqrt_kernel needs 1/2 < l < 1")
        if not c > 0:
            raise ParameterOutOfRange("sqrt_kernel needs c > 0")

        def f(x):
            return (1 + abs(x)) ** (-2 * (1 - l)) / np.sqrt(abs(a - x))

        lhs = _split_quad(f, (a, 0.0), -c, c)
        rhs = (1 + c) ** (2 * l - 1) / np.sqrt(1 + abs(a))
        return lhs, rhs
    raise ParameterOutOfRange(f"unknown inequality {kind!r}")


def calculus_sweep(kind: str, l: float, l_prime: float, n: int = 1000, seed: int = 0,
                   span: float = 500.0):
    """Ratios lhs/rhs_shape over n random (a, c) with the exponents held fixed."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(-2 * span, 2 * span, n)
    if kind == "sqrt_kernel":
        c = np.exp(rng.uniform(0.0, np.log(span / 5), n))
    else:
        c = rng.uniform(-span, span, n)
    ratios = np.empty(n)
    for i in range(n):
        lhs, rhs = calculus_bound_check(kind, l, l_prime, a[i], c[i])
        ratios[i] = lhs / rhs
    return ratios


# ------------------------------------------------------------- rectangles


@dataclass(frozen=True)
class RectangleSpec:
    """Set {|xi - xi_center| <= xi_halfwidth, |tau - m(xi) - tau_center| <= tau_halfwidth}.

    m(xi) = dispersion * xi^3 + slope * xi.  With both zero this is an
    axis-aligned rectangle; with ``dispersion`` set it is a strip around the
    characteristic curve, which is a rectangle in the (xi, modulation) plane
    and has the same area.
    """
    xi_center: float
    xi_halfwidth: float
    tau_center: float
    tau_halfwidth: float
    N: int = 1
    dispersion: float = 0.0
    slope: float = 0.0

    def __post_init__(self):
        if not (self.xi_halfwidth > 0 and self.tau_halfwidth > 0):
            raise ParameterOutOfRange("rectangle halfwidths must be positive")

    @property
    def xi_interval(self):
        return self.xi_center - self.xi_halfwidth, self.xi_center + self.xi_halfwidth

    def curve(self, xi):
        return self.dispersion * xi**3 + self.slope * xi + self.tau_center

    def contains(self, xi, tau):
        xi, tau = np.asarray(xi), np.asarray(tau)
        return ((np.abs(xi - self.xi_center) <= self.xi_halfwidth)
                & (np.abs(tau - self.curve(xi)) <= self.tau_halfwidth))

    @property
    def area(self):
        return 4 * self.xi_halfwidth * self.tau_halfwidth

    def scaled(self, factor):
        return replace(self, xi_halfwidth=self.xi_halfwidth * factor,
                       tau_halfwidth=self.tau_halfwidth * factor)


def indicator_norm_sq(rect: RectangleSpec) -> float:
    """||chi_rect||_{L^2}^2, i.e. the area (exact for strips too)."""
    return rect.area


@dataclass(frozen=True)
class MultiplierSpec:
    """Indices for Theta.  ``b`` weights the output modulation, ``b_prime`` both input ones."""
    s: float
    b: float
    alpha: float
    b_prime: float | None = None
    theta_prime: float = 0.0
    which: str = "Q0"

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterOutOfRange("alpha must be positive")
        if self.which not in ("Q0", "Q1", "Q2", "Q3", "robin"):
            raise ParameterOutOfRange(f"unknown multiplier {self.which!r}")

    @property
    def bp(self):
        return self.b if self.b_prime is None else self.b_prime


_GL8 = np.polynomial.legendre.leggauss(8)


def _gl(lo, hi, n_panels):
    """Composite GL-8 nodes/weights on [lo, hi] (arrays broadcast over leading axes)."""
    x0, w0 = _GL8
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    s = ((edges[:-1, None] + edges[1:, None]) / 2 + (edges[1:, None] - edges[:-1, None]) / 2 * x0).ravel()
    ws = (np.tile(w0, n_panels) / (2 * n_panels))
    span = np.maximum(hi - lo, 0.0)
    nodes = lo[..., None] + span[..., None] * s
    weights = span[..., None] * ws
    return nodes, weights


def _graded_edges(H, n, scale):
    """Offsets 0 = o_0 < ... < o_n = H, geometric with first width ~ scale."""
    H = np.asarray(H, dtype=float)
    k = np.arange(n + 1) / n
    ratio = np.maximum(H / scale, 1e-12)[..., None]
    return H[..., None] * np.expm1(k * np.log1p(ratio)) / ratio


def _gl_graded(lo, hi, n_panels, ends="both", scale=1.0):
    """Composite GL-8 with panels refined geometrically toward ``ends``.

    Used where the integrand carries a (1 + |m|)^(-b) kink whose width
    (about ``scale``) is far below the interval length.
    """
    x0, w0 = _GL8
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    span = np.maximum(hi - lo, 0.0)
    if ends == "both":
        half = _graded_edges(span / 2, n_panels, scale)
        edges = np.concatenate([lo[..., None] + half, (hi[..., None] - half[..., ::-1])[..., 1:]], axis=-1)
    elif ends == "lo":
        edges = lo[..., None] + _graded_edges(span, n_panels, scale)
    else:
        edges = hi[..., None] - _graded_edges(span, n_panels, scale)[..., ::-1]
    a, b = edges[..., :-1, None], edges[..., 1:, None]
    nodes = ((a + b) / 2 + (b - a) / 2 * x0)
    weights = (b - a) / 2 * w0
    new_shape = nodes.shape[:-2] + (-1,)
    return nodes.reshape(new_shape), weights.reshape(new_shape)


def _window_offset(rect_f, rect_g, xi, tau, x1):
    """D(xi1) = tau - m_f(xi - xi1) - m_g(xi1): the two tau1 windows overlap iff |D| <= h_f + h_g."""
    return tau - rect_f.curve(xi - x1) - rect_g.curve(x1)


def _xi1_breakpoints(rect_f, rect_g, xi, tau, lo, hi, n_scan=64, n_bisect=48):
    """Sorted xi1 breakpoints on [lo, hi]: where the window overlap switches on/off or kinks.

    D is a polynomial of degree <= 3 in xi1, so each target level has at most
    three crossings; they are bracketed on a scan grid and bisected.
    """
    hf, hg = rect_f.tau_halfwidth, rect_g.tau_halfwidth
    targets = sorted({hf + hg, -(hf + hg), hf - hg, hg - hf})
    u = np.linspace(0.0, 1.0, n_scan + 1)
    span = np.maximum(hi - lo, 0.0)
    grid = lo[:, None] + span[:, None] * u
    D = _window_offset(rect_f, rect_g, xi[:, None], tau[:, None], grid)
    pts = [lo[:, None], hi[:, None]]
    rows = np.arange(xi.size)[:, None]
    for c in targets:
        g = D - c
        change = (np.sign(g[:, :-1]) * np.sign(g[:, 1:])) < 0
        idx = np.argsort(~change, axis=1, kind="stable")[:, :3]
        valid = change[rows, idx]
        a, b = grid[rows, idx], grid[rows, idx + 1]
        ga = g[rows, idx]
        for _ in range(n_bisect):
            m = 0.5 * (a + b)
            gm = _window_offset(rect_f, rect_g, xi[:, None], tau[:, None], m) - c
            left = np.sign(gm) == np.sign(ga)
            a, ga = np.where(left, m, a), np.where(left, gm, ga)
            b = np.where(left, b, m)
        pts.append(np.where(valid, 0.5 * (a + b), hi[:, None]))
    return np.sort(np.concatenate(pts, axis=1), axis=1)


def theta_quantity(spec: MultiplierSpec, rect_f: RectangleSpec, rect_g: RectangleSpec, xi, tau,
                   *, n_xi1: int = 1, n_tau1: int = 2):
    """Theta(xi, tau) with c_f = chi_{rect_f} at (xi - xi1, tau - tau1) and c_g = chi_{rect_g} at (xi1, tau1).

    Theta = xi (1+|xi|)^s / (1+|tau - xi^3|)^b
            * int (1+|xi-xi1|)^{-s} (1+|xi1|)^{-s} c_f c_g
                  / ((1+|tau-tau1-alpha(xi-xi1)^3|)^{b'} (1+|tau1-alpha xi1^3|)^{b'}) dxi1 dtau1.

    For fixed xi1 the admissible tau1 form one interval (intersection of the
    two strips), split where either modulation changes sign.  The xi1 range is
    split where that interval appears, vanishes or changes its binding
    endpoint, so every Gauss-Legendre piece sees a smooth integrand.
    """
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    shape = np.broadcast(xi, tau).shape
    xi, tau = np.broadcast_to(xi, shape).ravel(), np.broadcast_to(tau, shape).ravel()
    s, b, bp, alpha = spec.s, spec.b, spec.bp, spec.alpha
    fl, fh = rect_f.xi_interval
    gl, gh = rect_g.xi_interval
    lo1 = np.maximum(gl, xi - fh)
    hi1 = np.maximum(np.minimum(gh, xi - fl), lo1)
    brk1 = _xi1_breakpoints(rect_f, rect_g, xi, tau, lo1, hi1)
    conv = np.zeros_like(xi)
    xi_b, tau_b = xi[:, None], tau[:, None]
    for p in range(brk1.shape[1] - 1):
        x1, w1 = _gl(brk1[:, p], brk1[:, p + 1], n_xi1)  # (m, k)
        x2 = xi_b - x1
        g_lo = rect_g.curve(x1) - rect_g.tau_halfwidth
        g_hi = rect_g.curve(x1) + rect_g.tau_halfwidth
        f_lo = tau_b - rect_f.curve(x2) - rect_f.tau_halfwidth
        f_hi = tau_b - rect_f.curve(x2) + rect_f.tau_halfwidth
        t_lo = np.maximum(g_lo, f_lo)
        t_hi = np.maximum(np.minimum(g_hi, f_hi), t_lo)
        k1 = np.clip(alpha * x1**3, t_lo, t_hi)
        k2 = np.clip(tau_b - alpha * x2**3, t_lo, t_hi)
        brk = np.sort(np.stack([t_lo, k1, k2, t_hi], axis=-1), axis=-1)
        inner = np.zeros_like(x1)
        for j in range(3):
            tn, tw = _gl_graded(brk[..., j], brk[..., j + 1], n_tau1)
            m1 = tn - alpha * x1[..., None] ** 3
            m2 = tau_b[..., None] - tn - alpha * x2[..., None] ** 3
            inner += np.sum(tw * (1 + np.abs(m1)) ** (-bp) * (1 + np.abs(m2)) ** (-bp), axis=-1)
        integrand = (1 + np.abs(x2)) ** (-s) * (1 + np.abs(x1)) ** (-s) * inner
        conv += np.sum(w1 * integrand, axis=-1)
    pref = xi * (1 + np.abs(xi)) ** s / (1 + np.abs(tau - xi**3)) ** b
    return (pref * conv).reshape(shape)


def theta_norm(spec: MultiplierSpec, rect_f: RectangleSpec, rect_g: RectangleSpec,
               region: RectangleSpec, *, n_xi: int = 4, n_mod: int = 8, n_xi1: int = 1,
               n_tau1: int = 2, terms=None):
    """||Theta||_{L^2} over ``region`` by tensor GL in (xi, modulation) coordinates.

    ``terms`` optionally lists extra (rect_f, rect_g) pairs whose Theta is
    added (sums of indicator data).
    """
    xl, xh = region.xi_interval
    xn, xw = _gl(xl, xh, n_xi)
    h = region.tau_halfwidth
    # panel boundary at zero modulation offset where the outer weight kinks
    mn_a, mw_a = _gl_graded(-h, 0.0, n_mod, ends="hi")
    mn_b, mw_b = _gl_graded(0.0, h, n_mod, ends="lo")
    mn, mw = np.concatenate([mn_a, mn_b]), np.concatenate([mw_a, mw_b])
    XI = xn[:, None] + 0 * mn[None, :]
    TAU = region.curve(XI) + mn[None, :]
    pairs = [(rect_f, rect_g), *(terms or [])]
    XI, TAU = XI.ravel(), TAU.ravel()
    th = np.zeros_like(XI)
    per_point = 8 * n_xi1 * 48 * n_tau1 * 8
    step = max(1, 2_000_000 // per_point)
    for i in range(0, XI.size, step):
        sl = slice(i, i + step)
        for f, g in pairs:
            th[sl] += theta_quantity(spec, f, g, XI[sl], TAU[sl], n_xi1=n_xi1, n_tau1=n_tau1)
    th = th.reshape(xn.size, mn.size)
    return float(np.sqrt(np.sum(xw[:, None] * mw[None, :] * th**2)))


# ------------------------------------------------------ counterexample sets


@dataclass(frozen=True)
class CounterexampleDesign:
    rect_f: RectangleSpec
    rect_g: RectangleSpec
    region: RectangleSpec
    terms: tuple = ()
    cf_norm_sq: float = 0.0
    cg_norm_sq: float = 0.0


def design_alpha4(N: int) -> CounterexampleDesign:
    """c_f = c_g = chi of {|xi1 - N| <= N^{-1/2}, |tau1 - 4 xi1^3| <= 10*5^3};
    output region {|xi - 2N| <= (2N)^{-1/2}, |tau - xi^3| <= 10*5^3}."""
    h = 10 * 5**3
    A = RectangleSpec(N, N**-0.5, 0.0, h, N, dispersion=4.0)
    region = RectangleSpec(2 * N, (2 * N) ** -0.5, 0.0, h, N, dispersion=1.0)
    return CounterexampleDesign(A, A, region, (), A.area, A.area)


def design_sub4(alpha: float, N: int) -> CounterexampleDesign:
    """Thin axis-aligned rectangles at the zero r2 of d_alpha, 0 < alpha < 4, alpha != 1."""
    if not (0 < alpha < 4) or alpha == 1:
        raise ParameterOutOfRange("the sub-4 design needs 0 < alpha < 4, alpha != 1")
    r1, r2 = roots(alpha)
    eps = 1.0 / (10 + abs(r1) + abs(r2)) ** 3
    n2 = float(N) ** -2
    f = RectangleSpec((1 - r2) * N, 2 * n2, alpha * ((1 - r2) * N) ** 3, 1e3, N)
    g = RectangleSpec(r2 * N, eps * n2, alpha * (r2 * N) ** 3, 1.0, N)
    region = RectangleSpec(N, eps * n2, float(N) ** 3, 1.0, N)
    return CounterexampleDesign(f, g, region, (), f.area, g.area)


def design_sup4(alpha: float, N: int) -> CounterexampleDesign:
    """c_f = chi_{A+} + chi_{A-}, A+ = {|xi1 - N| <= N^{-1/2}, |tau1 - alpha xi1^3| <= 10(1+alpha)^3},
    A- = -A+.  Theta is sampled near xi = 0, where A+ * A- concentrates along
    tau ~ 3 alpha N^2 xi."""
    h = 10 * (1 + alpha) ** 3
    Ap = RectangleSpec(N, N**-0.5, 0.0, h, N, dispersion=alpha)
    Am = RectangleSpec(-N, N**-0.5, 0.0, h, N, dispersion=alpha)
    region = RectangleSpec(0.0, 2 * N**-0.5, 0.0, 2 * h + 10 * alpha, N, slope=3 * alpha * N**2)
    return CounterexampleDesign(Ap, Am, region, ((Am, Ap),), 2 * Ap.area, 2 * Ap.area)


@dataclass
class ScalingResult:
    case: str
    alpha: float
    s: float
    b: float
    slope: float
    rows: list = field(default_factory=list)  # dicts: N, theta_norm, cf_norm, cg_norm, ratio, local_slope


def _design(case, alpha, N):
    if case == "4":
        return design_alpha4(N)
    if case == "sub4":
        return design_sub4(alpha, N)
    if case == "sup4":
        return design_sup4(alpha, N)
    raise ParameterOutOfRange(f"unknown counterexample case {case!r}")


def counterexample_scaling(case: str, s: float, N_list, *, alpha: float | None = None,
                           b: float = 0.45, resolution: int = 1, check_refinement: bool = True,
                           refine_tol: float = 0.01) -> ScalingResult:
    """||Theta||_{L^2} over the designated region for each N, with a log-log slope fit.

    ``case`` is "4", "sub4" or "sup4"; ``alpha`` is required for the last two.
    Each norm is recomputed on a doubled grid and QuadratureUnderResolved is
    raised if the two differ by more than ``refine_tol``.
    """
    N_list = [int(n) for n in N_list]
    if len(N_list) < 3:
        raise NotEnoughSignal("need at least three N values for a slope")
    if case == "4":
        alpha = 4.0
    elif alpha is None:
        raise ParameterOutOfRange(f"case {case!r} needs alpha")
    spec = MultiplierSpec(s=s, b=b, alpha=alpha)
    rows = []
    for N in N_list:
        d = _design(case, alpha, N)
        kw = dict(n_xi=2 * resolution, n_mod=8 * resolution, n_xi1=resolution,
                  n_tau1=2 * resolution, terms=list(d.terms))
        th = theta_norm(spec, d.rect_f, d.rect_g, d.region, **kw)
        if check_refinement and th > 0:
            fine = {k: (2 * v if k != "terms" else v) for k, v in kw.items()}
            th2 = theta_norm(spec, d.rect_f, d.rect_g, d.region, **fine)
            if abs(th2 - th) > refine_tol * abs(th2):
                raise QuadratureUnderResolved(
                    f"N={N}: refinement changed ||Theta|| by {abs(th2 - th) / abs(th2):.2%}")
            th = th2
        cf, cg = np.sqrt(d.cf_norm_sq), np.sqrt(d.cg_norm_sq)
        rows.append({"N": N, "theta_norm": th, "cf_norm": cf, "cg_norm": cg,
                     "ratio": th / (cf * cg) if cf * cg > 0 else 0.0})
    vals = np.array([r["theta_norm"] for r in rows])
    if not np.all(vals > 0):
        raise NotEnoughSignal("Theta vanishes for some N; the sets do not interact")
    logN, logT = np.log(N_list), np.log(vals)
    rows[0]["local_slope"] = float("nan")
    for i in range(1, len(rows)):
        rows[i]["local_slope"] = float((logT[i] - logT[i - 1]) / (logN[i] - logN[i - 1]))
    slope = float(np.polyfit(logN, logT, 1)[0])
    return ScalingResult(case, float(alpha), s, b, slope, rows)
