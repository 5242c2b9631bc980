"""Named analytic data profiles.

Profiles are written as call-like strings, e.g. ``"gaussian(center=2.0, width=0.5, amp=1.0)"``.
A forcing profile may be a product ``"<x-profile> * <t-profile>"``.  Every 1-D
profile also knows its truncated half-line Fourier transform in closed form,
which the tests use as an exact reference for the quadratures.
"""
from __future__ import annotations

import ast
import re
from dataclasses import dataclass, fields

import numpy as np
from scipy.special import wofz

from .errors import ParseError


@dataclass(frozen=True)
class Profile:
    def __call__(self, x):
        raise NotImplementedError

    def exact_ft(self, xi, L):
        """Closed form of int_0^L exp(-i x xi) f(x) dx."""
        raise NotImplementedError

    def spec(self) -> str:
        args = ", ".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return f"{self.name}({args})"


@dataclass(frozen=True)
class Zero(Profile):
    name = "zero"

    def __call__(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def exact_ft(self, xi, L):
        return np.zeros_like(np.asarray(xi, dtype=complex))


@dataclass(frozen=True)
class Constant(Profile):
    value: float = 1.0
    name = "constant"

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.value)

    def exact_ft(self, xi, L):
        xi = np.asarray(xi, dtype=complex)
        small = np.abs(xi * L) < 1e-8
        safe = np.where(small, 1.0, xi)
        out = (1 - np.exp(-1j * safe * L)) / (1j * safe)
        return self.value * np.where(small, L - 0.5j * xi * L**2, out)


@dataclass(frozen=True)
class Gaussian(Profile):
    center: float = 0.0
    width: float = 1.0
    amp: float = 1.0
    name = "gaussian"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amp * np.exp(-((x - self.center) ** 2) / (2 * self.width**2))

    def exact_ft(self, xi, L):
        # complete the square with x = c + sqrt(2) w y, then write each erf
        # through the Faddeeva function so large |xi| does not overflow
        xi = np.asarray(xi, dtype=complex)
        c, w = self.center, self.width
        kappa = 1j * xi * w / np.sqrt(2)
        pref = self.amp * np.sqrt(2) * w * 0.5 * np.sqrt(np.pi)
        total = 0j
        for xk, sign in ((L, 1.0), (0.0, -1.0)):
            yk = (xk - c) / (np.sqrt(2) * w)
            z = yk + kappa
            sg = np.where(z.real >= 0, 1.0, -1.0)
            tail = np.exp(-1j * xi * xk - yk**2) * wofz(1j * sg * z)
            total = total + sign * sg * (np.exp(-1j * xi * c - xi**2 * w**2 / 2) - tail)
        return pref * total


@dataclass(frozen=True)
class ExpDecay(Profile):
    rate: float = 1.0
    amp: float = 1.0
    name = "exp_decay"

    def __call__(self, x):
        return self.amp * np.exp(-self.rate * np.asarray(x, dtype=float))

    def exact_ft(self, xi, L):
        z = self.rate + 1j * np.asarray(xi, dtype=complex)
        return self.amp * (1 - np.exp(-z * L)) / z


@dataclass(frozen=True)
class SinePulse(Profile):
    """amp * sin^2(pi (x - start) / width) on [start, start + width], zero elsewhere."""

    start: float = 0.0
    width: float = 1.0
    amp: float = 1.0
    name = "sine_pulse"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = (x - self.start) / self.width
        inside = (y >= 0) & (y <= 1)
        return np.where(inside, self.amp * np.sin(np.pi * y) ** 2, 0.0)

    def exact_ft(self, xi, L):
        xi = np.asarray(xi, dtype=complex)
        s, w = self.start, self.width
        if s < 0 or s + w > L:
            raise ValueError("sine_pulse support must lie inside [0, L]")

        def piece(k):
            z = 1j * (k - xi)
            small = np.abs(z * w) < 1e-8
            zs = np.where(small, 1.0, z)
            val = np.where(small, w + z * w**2 / 2, (np.exp(zs * w) - 1) / zs)
            return np.exp(-1j * xi * s) * val

        k = 2 * np.pi / w
        return self.amp * (0.5 * piece(0.0) - 0.25 * piece(k) - 0.25 * piece(-k))


@dataclass(frozen=True)
class Product:
    """Separable space-time profile f(x, t) = fx(x) * ft(t)."""

    fx: Profile
    ft: Profile

    def __call__(self, x, t):
        return np.outer(self.fx(x), self.ft(t))

    def spec(self) -> str:
        return f"{self.fx.spec()} * {self.ft.spec()}"


PROFILES = {cls.name: cls for cls in (Zero, Constant, Gaussian, ExpDecay, SinePulse)}

_CALL = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$", re.S)


def parse_profile(text: str) -> Profile:
    m = _CALL.match(text)
    if not m:
        raise ParseError(f"cannot parse profile {text!r}")
    name, argtext = m.group(1), m.group(2) or ""
    if name not in PROFILES:
        raise ParseError(f"unknown profile {name!r}")
    kwargs = {}
    for part in filter(None, (p.strip() for p in argtext.split(","))):
        key, sep, value = part.partition("=")
        if not sep:
            raise ParseError(f"profile argument {part!r} must be key=value")
        try:
            kwargs[key.strip()] = float(ast.literal_eval(value.strip()))
        except (ValueError, SyntaxError) as exc:
            raise ParseError(f"bad value in {part!r}") from exc
    try:
        return PROFILES[name](**kwargs)
    except TypeError as exc:
        raise ParseError(f"{name}: {exc}") from exc


def parse_forcing(text: str):
    parts = text.split("*")
    if len(parts) == 1:
        prof = parse_profile(parts[0])
        if not isinstance(prof, Zero):
            # a bare spatial profile is taken as constant in time
            return Product(prof, Constant(1.0))
        return Product(prof, Zero())
    if len(parts) != 2:
        raise ParseError(f"forcing must be 'fx * ft', got {text!r}")
    return Product(parse_profile(parts[0]), parse_profile(parts[1]))
