"""Parameter, grid and field types, config I/O and the time localizer."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli
import tomli_w

from .errors import InvariantViolation, ParseError
from .profiles import Profile, Product, parse_forcing, parse_profile


class BoundaryKind(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    ROBIN = "robin"


@dataclass(frozen=True)
class MBParams:
    alpha: float
    gamma1: float = 0.0
    gamma2: float = 0.0
    boundary_kind: BoundaryKind = BoundaryKind.ROBIN

    def __post_init__(self):
        object.__setattr__(self, "boundary_kind", BoundaryKind(self.boundary_kind))
        if not self.alpha > 0:
            raise InvariantViolation("alpha", "must be positive")
        if self.boundary_kind is BoundaryKind.NEUMANN:
            for name in ("gamma1", "gamma2"):
                if getattr(self, name) != 0:
                    raise InvariantViolation(name, "Neumann data require zero Robin coefficient")


def beta1(s: float) -> float:
    if s >= 0:
        return 1 / 36
    if s > -0.75:
        return (s + 0.75) / 96
    raise InvariantViolation("s", "contraction exponent undefined for s <= -3/4")


@dataclass(frozen=True)
class SobolevIndices:
    s: float = 0.0
    b: float = 0.45
    theta: float = 0.55
    b_prime: float | None = None
    theta_prime: float | None = None

    def __post_init__(self):
        if self.b_prime is None:
            object.__setattr__(self, "b_prime", self.b)
        if self.theta_prime is None:
            object.__setattr__(self, "theta_prime", self.theta)
        if not 0 < self.b_prime <= self.b < 0.5:
            raise InvariantViolation("b", "need 0 < b' <= b < 1/2")
        if not 0.5 < self.theta_prime <= self.theta < 1:
            raise InvariantViolation("theta", "need 1/2 < theta' <= theta < 1")

    @property
    def beta(self) -> float:
        return min(beta1(self.s), (3 - self.s) / 36)


@dataclass(frozen=True)
class GridSpec:
    L: float
    nx: int
    T: float
    nt: int
    R: float = 40.0
    nq: int = 512

    def __post_init__(self):
        for name in ("nx", "nt", "nq"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 8:
                raise InvariantViolation(name, "must be an integer >= 8")
        for name in ("L", "T", "R"):
            if not getattr(self, name) > 0:
                raise InvariantViolation(name, "must be positive")
        if not self.T < 0.5:
            raise InvariantViolation("T", "time horizon must satisfy T < 1/2")

    @property
    def x(self):
        return np.linspace(0.0, self.L, self.nx)

    @property
    def t(self):
        return np.linspace(0.0, self.T, self.nt)

    @property
    def dx(self):
        return self.L / (self.nx - 1)

    @property
    def dt(self):
        return self.T / (self.nt - 1)


def _frozen(a, shape):
    a = np.array(a, dtype=float)
    if a.shape != shape:
        raise InvariantViolation("data", f"expected shape {shape}, got {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ProblemData:
    """Samples of initial, boundary and forcing data on a GridSpec.

    ``profiles`` keeps the descriptor strings when the data came from a config,
    so a parsed record can be written back out unchanged.
    """

    u0: np.ndarray
    v0: np.ndarray
    bdry_u: np.ndarray
    bdry_v: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    profiles: dict = field(default_factory=dict, compare=False)

    @classmethod
    def build(cls, grid: GridSpec, u0=None, v0=None, bdry_u=None, bdry_v=None,
              f1=None, f2=None, profiles=None):
        nx, nt = grid.nx, grid.nt
        z1, z2 = np.zeros(nx), np.zeros(nt)
        return cls(
            u0=_frozen(z1 if u0 is None else u0, (nx,)),
            v0=_frozen(z1 if v0 is None else v0, (nx,)),
            bdry_u=_frozen(z2 if bdry_u is None else bdry_u, (nt,)),
            bdry_v=_frozen(z2 if bdry_v is None else bdry_v, (nt,)),
            f1=_frozen(np.zeros((nx, nt)) if f1 is None else f1, (nx, nt)),
            f2=_frozen(np.zeros((nx, nt)) if f2 is None else f2, (nx, nt)),
            profiles=dict(profiles or {}),
        )

    @classmethod
    def from_profiles(cls, grid: GridSpec, **specs):
        """Expand profile descriptors (strings or Profile objects) onto the grid."""
        x, t = grid.x, grid.t
        arrays, names = {}, {}
        for key, spec in specs.items():
            if key in ("u0", "v0", "bdry_u", "bdry_v"):
                prof = parse_profile(spec) if isinstance(spec, str) else spec
                arrays[key] = prof(x if key in ("u0", "v0") else t)
            elif key in ("f1", "f2"):
                prof = parse_forcing(spec) if isinstance(spec, str) else spec
                arrays[key] = prof(x, t)
            else:
                raise InvariantViolation(key, "unknown data field")
            names[key] = prof.spec()
        return cls.build(grid, profiles=names, **arrays)

    def scaled(self, lam: float) -> "ProblemData":
        return ProblemData.build(
            _GridShape(self), lam * self.u0, lam * self.v0, lam * self.bdry_u,
            lam * self.bdry_v, lam * self.f1, lam * self.f2)


class _GridShape:
    # minimal stand-in so ProblemData.build can be reused for derived data
    def __init__(self, data):
        self.nx, self.nt = data.f1.shape


@dataclass
class LinearSolution:
    """One real field on the (x, t) grid, plus solver diagnostics."""

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise InvariantViolation("values", "non-finite entries in solution")


@dataclass
class SolutionField:
    x: np.ndarray
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise InvariantViolation("values", "non-finite entries in solution")


# time localizer ---------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(80)


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = np.abs(s) < 1
    out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
    return out


_BUMP_MASS = float(np.sum(_GL_W * _bump(_GL_X)))


def _smooth_step(y):
    """Normalized integral of the bump from -1 to y; 0 below -1, 1 above 1."""
    y = np.clip(np.asarray(y, dtype=float), -1.0, 1.0)
    half = (y[..., None] + 1) / 2
    nodes = -1 + half * (_GL_X + 1)
    return np.sum(_GL_W * _bump(nodes), axis=-1) * half[..., 0] / _BUMP_MASS


def time_localizer(t, T_star: float = 1.0):
    """Smooth even cutoff: 1 on |t| <= T_star/2, 0 on |t| >= T_star."""
    if not T_star > 0:
        raise InvariantViolation("T_star", "must be positive")
    tau = np.abs(np.asarray(t, dtype=float)) / T_star
    out = np.clip(1.0 - _smooth_step(4 * tau - 3), 0.0, 1.0)
    out = np.where(tau <= 0.5, 1.0, np.where(tau >= 1.0, 0.0, out))
    return float(out) if out.ndim == 0 else out


# config I/O -------------------------------------------------------------

_SCHEMA = {
    "params": {"alpha", "gamma1", "gamma2", "boundary"},
    "indices": {"s", "b", "theta", "b_prime", "theta_prime"},
    "grid": {"L", "nx", "T", "nt", "R", "nq"},
    "data": {"u0", "v0", "bdry_u", "bdry_v", "f1", "f2"},
}


def _check_keys(doc):
    for section, body in doc.items():
        if section not in _SCHEMA:
            raise ParseError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ParseError(f"[{section}] must be a table")
        extra = set(body) - _SCHEMA[section]
        if extra:
            raise ParseError(f"unknown key(s) in [{section}]: {', '.join(sorted(extra))}")


def parse_config(doc: dict):
    _check_keys(doc)
    p, ind, g, d = (doc.get(k, {}) for k in ("params", "indices", "grid", "data"))
    if "alpha" not in p:
        raise ParseError("[params] alpha is required")
    try:
        kind = BoundaryKind(str(p.get("boundary", "robin")).lower())
    except ValueError as exc:
        raise InvariantViolation("boundary", f"unknown kind {p.get('boundary')!r}") from exc
    params = MBParams(float(p["alpha"]), float(p.get("gamma1", 0.0)),
                      float(p.get("gamma2", 0.0)), kind)
    indices = SobolevIndices(**{k: float(v) for k, v in ind.items()})
    missing = {"L", "nx", "T", "nt"} - set(g)
    if missing:
        raise ParseError(f"[grid] missing {', '.join(sorted(missing))}")
    grid = GridSpec(L=float(g["L"]), nx=g["nx"], T=float(g["T"]), nt=g["nt"],
                    R=float(g.get("R", 40.0)), nq=g.get("nq", 512))
    specs = {k: d.get(k, "zero") for k in _SCHEMA["data"]}
    for k, v in specs.items():
        if not isinstance(v, str):
            raise ParseError(f"[data] {k} must be a profile string")
    data = ProblemData.from_profiles(grid, **specs)
    return params, indices, grid, data


def load_config(path):
    path = Path(path)
    try:
        doc = tomli.loads(path.read_text(encoding="utf-8"))
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_config(doc)


def config_document(params: MBParams, indices: SobolevIndices, grid: GridSpec,
                    data: ProblemData) -> dict:
    if set(data.profiles) != _SCHEMA["data"]:
        raise ParseError("data was not built from profiles; cannot serialize")
    return {
        "params": {"alpha": params.alpha, "gamma1": params.gamma1,
                   "gamma2": params.gamma2, "boundary": params.boundary_kind.value},
        "indices": {"s": indices.s, "b": indices.b, "theta": indices.theta,
                    "b_prime": indices.b_prime, "theta_prime": indices.theta_prime},
        "grid": {"L": grid.L, "nx": grid.nx, "T": grid.T, "nt": grid.nt,
                 "R": grid.R, "nq": grid.nq},
        "data": dict(sorted(data.profiles.items())),
    }


def save_config(path, params, indices, grid, data):
    doc = config_document(params, indices, grid, data)
    Path(path).write_text(tomli_w.dumps(doc), encoding="utf-8")


def relative_l2(a, b) -> float:
    """||a - b|| / ||b|| on whatever grid both live on (0 if both vanish)."""
    a, b = np.asarray(a), np.asarray(b)
    nb = np.linalg.norm(b)
    diff = np.linalg.norm(a - b)
    if nb == 0:
        return float(diff)
    return float(diff / nb)


__all__ = [
    "BoundaryKind", "MBParams", "SobolevIndices", "GridSpec", "ProblemData",
    "LinearSolution", "SolutionField", "time_localizer", "load_config",
    "save_config", "parse_config", "config_document", "beta1", "relative_l2",
]
