import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from mbhalf.errors import DivergentIntegrand
from mbhalf.profiles import ExpDecay, Gaussian, SinePulse
from mbhalf.transforms import (SampledQuadrature, forcing_transform, half_line_ft, moments,
                               oscillatory_cumulative, time_transform)

XI = np.array([0.0, 0.7, -2.5, 6.0, 1 - 0.5j, -3 - 2j, -4j, 12.0])


def cquad(f, a, b, **kw):
    re = quad(lambda s: f(s).real, a, b, limit=400, **kw)[0]
    im = quad(lambda s: f(s).imag, a, b, limit=400, **kw)[0]
    return re + 1j * im


@pytest.mark.parametrize("xi,expected", [(0.0, 1.0), (-0.5j, 2 / 3)])
def test_exp_decay_values(xi, expected):
    assert half_line_ft(ExpDecay(), xi, L=60.0) == pytest.approx(expected, abs=1e-8)
    x = np.linspace(0, 60, 6001)
    assert half_line_ft(np.exp(-x), xi, x=x) == pytest.approx(expected, abs=1e-8)


def test_zero_data_is_exact():
    assert half_line_ft(np.zeros(50), 1.0, L=5.0) == 0
    assert time_transform(np.zeros(30), 2.0, 1.0, 0.3) == 0
    assert forcing_transform(np.zeros((20, 10)), 1.5, 0.1, 1.0, L=1.0) == 0


# the sine pulse is only C^1 at its support ends, so panel rules converge slowly there
@pytest.mark.parametrize("prof,tol", [(Gaussian(3.0, 0.7, 1.5), 1e-10), (ExpDecay(1.3, 2.0), 1e-10),
                                      (SinePulse(1.0, 2.5, 1.0), 1e-6)])
def test_callable_and_sampled_match_closed_form(prof, tol):
    L = 8.0
    exact = prof.exact_ft(XI, L)
    np.testing.assert_allclose(half_line_ft(prof, XI, L=L), exact, rtol=0, atol=tol)
    x = np.linspace(0, L, 1601)
    np.testing.assert_allclose(half_line_ft(prof(x), XI, x=x), exact, rtol=0, atol=max(tol, 1e-7))


def test_closed_form_gaussian_against_quad():
    g = Gaussian(2.0, 0.5, 1.0)
    for xi in (1.5, -1 - 1j):
        ref = cquad(lambda x: np.exp(-1j * x * xi) * g(x), 0, 6)
        assert g.exact_ft(xi, 6.0) == pytest.approx(ref, abs=1e-10)


def test_growth_guard():
    with pytest.raises(DivergentIntegrand):
        half_line_ft(ExpDecay(), 200j, L=10.0)


def test_sampled_quadrature_is_high_order():
    errs = []
    for n in (41, 81, 161):
        x = np.linspace(0, 2, n)
        q = SampledQuadrature(x)
        errs.append(abs(q.integrate(np.sin(3 * x)) - (1 - np.cos(6)) / 3))
    assert errs[1] / errs[2] > 30


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
def test_half_line_ft_linearity(a, b, seed):
    r = np.random.default_rng(seed)
    x = np.linspace(0, 3, 61)
    f, g = r.standard_normal((2, 61))
    xi = np.array([0.3, -2.0, 1 - 1j])
    lhs = half_line_ft(a * f + b * g, xi, x=x)
    rhs = a * half_line_ft(f, xi, x=x) + b * half_line_ft(g, xi, x=x)
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12 * (1 + abs(a) + abs(b)) * 10)


# time direction


def test_moments_against_quadrature():
    for z in (1e-3, 0.5 + 0.5j, 0.999, 1.001, 3j, -2j, 40j, 2 + 7j):
        mu = moments(np.array([z]), 3)[:, 0]
        ref = [cquad(lambda s: np.exp(-z * s) * s**k, 0, 1) for k in range(4)]
        np.testing.assert_allclose(mu, ref, rtol=1e-10, atol=1e-13)


def test_time_transform_constant():
    T = 0.3
    assert time_transform(np.ones(31), 0.0, 2.0, T) == pytest.approx(T, abs=1e-14)
    for tau in (1.0, 25.0, -400.0):
        expected = (1 - np.exp(-1j * tau * T)) / (1j * tau)
        assert time_transform(np.ones(31), tau, 1.0, T) == pytest.approx(expected, abs=1e-8)


def test_cubic_samples_are_exact():
    t = np.linspace(0, 0.4, 9)
    g = t**3 - 2 * t**2 + t
    for omega in (0.0, 3.0, 500.0, 1e4):
        ref = cquad(lambda s: np.exp(-1j * omega * s) * (s**3 - 2 * s**2 + s), 0, 0.4,
                    weight=None) if omega < 600 else None
        val = oscillatory_cumulative(g, t, omega)[-1]
        if ref is not None:
            assert val == pytest.approx(ref, abs=1e-12)
    # running integrals are consistent with single-horizon transforms
    run = oscillatory_cumulative(g, t, 7.0)
    for j in (3, 6):
        assert run[j] == pytest.approx(time_transform(g[: j + 1], 7.0, 1.0, t[j]), abs=1e-13)


@pytest.mark.parametrize("alpha,tau", [(1.0, 3.0), (2.5, -10.0), (4.0, 40.0)])
def test_compact_support_equals_whole_line_transform(alpha, tau):
    pulse = SinePulse(0.3, 1.2, 1.0)
    t = np.linspace(0, 2, 4001)
    val = time_transform(pulse(t), tau, alpha, 2.0, t=t)
    assert val == pytest.approx(complex(pulse.exact_ft(alpha * tau, 2.0)), abs=1e-8)


def test_time_growth_guard():
    with pytest.raises(DivergentIntegrand):
        time_transform(np.ones(11), 1e4j, 1.0, 0.1)


def test_forcing_transform_separable_exp():
    L, T = 40.0, 0.25
    x = np.linspace(0, L, 4001)
    t = np.linspace(0, T, 26)
    f = np.outer(np.exp(-x), np.ones(t.size))
    assert forcing_transform(f, 0.0, T, 3.0, x=x, t=t) == pytest.approx(T, abs=1e-8)


def test_forcing_transform_separable_product():
    L, T, alpha = 10.0, 0.2, 2.5
    x = np.linspace(0, L, 2001)
    t = np.linspace(0, T, 201)
    gx, st_ = Gaussian(4.0, 1.0, 1.0), SinePulse(0.0, T, 1.0)
    f = np.outer(gx(x), st_(t))
    for xi in (0.5, -1.5, 2 - 0.5j):
        expected = half_line_ft(gx(x), xi, x=x) * time_transform(st_(t), xi**3, alpha, T, t=t)
        got = forcing_transform(f, xi, T, alpha, x=x, t=t)
        assert got == pytest.approx(expected, abs=1e-8 * max(1.0, abs(expected)))
