"""Command-line entry point ``mb``.

Exit status: 0 success, 2 a validation check failed, 1 error (one JSON line on
stderr: {"error": <code>, "message": ...}).
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .core import GridSpec, MBParams, ProblemData, load_config, relative_l2
from .errors import MBError
from .io import emit_plotdata, write_csv, write_json


@dataclass
class RunManifest:
    subcommand: str
    config: str | None
    out: str
    seed: int
    threads: int | None
    version: str
    timestamp: str
    argv: list


class ValidationFailed(Exception):
    pass


# ------------------------------------------------------------- subcommands


def _require_config(args):
    if not args.config:
        raise MBError("--config is required for this subcommand")
    return load_config(args.config)


def _export_meta(meta):
    return {k: v for k, v in meta.items() if k != "coeffs"}


def cmd_solve(args, out: Path):
    from .nonlinear import IterationConfig, picard_solve

    params, indices, grid, data = _require_config(args)
    T_star = args.T_star if args.T_star is not None else grid.T
    cfg = IterationConfig(T_star=T_star, max_iters=args.max_iters, tol=args.tol)
    sol = picard_solve(params, data, cfg, grid, s=indices.s)
    emit_plotdata(sol, "waterfall", out)
    emit_plotdata(sol, "conserved", out, alpha=params.alpha)
    write_json(out / "meta.json", _export_meta(sol.meta))
    return sol.meta


def cmd_linear(args, out: Path):
    from .utm_linear import LinearProblem, solve_linear

    params, _, grid, data = _require_config(args)
    build = LinearProblem.u_equation if args.equation == "u" else LinearProblem.v_equation
    p = build(params, data, grid, forcing=data.f1 if args.equation == "u" else data.f2)
    sol = solve_linear(p)
    emit_plotdata(sol, "waterfall", out, prefix=f"linear_{args.equation}")
    meta = _export_meta(sol.meta)
    write_json(out / "meta.json", meta)
    return meta


def cmd_resonance(args, out: Path):
    from .resonance import resonance_table

    alphas = np.linspace(args.alpha_min, args.alpha_max, args.steps)
    rows = resonance_table(alphas)
    cols = ["alpha", "s_c", "inclusive", "r1", "r2", "p1", "p2", "q", "delta"]
    write_csv(out / "resonance.csv", cols, ([r[c] for c in cols] for r in rows))
    return {"rows": len(rows)}


def cmd_counterexample(args, out: Path):
    from .estimates_lab import counterexample_scaling

    a = args.alpha
    case = "4" if a == 4 else ("sub4" if 0 < a < 4 and a != 1 else "sup4")
    N_list = args.N or [16, 32, 64, 128]
    res = counterexample_scaling(case, args.s, N_list, alpha=a, b=args.b,
                                 check_refinement=not args.no_refine)
    cols = ["N", "theta_norm", "cf_norm", "ratio", "local_slope"]
    write_csv(out / "counterexample.csv", cols, ([r[c] for c in cols] for r in res.rows))
    meta = {"case": case, "alpha": a, "s": args.s, "b": args.b, "slope": res.slope,
            "refinement_checked": not args.no_refine}
    write_json(out / "meta.json", meta)
    return meta


def cmd_norms(args, out: Path):
    from .nonlinear import suggest_lifespan
    from .norms import sobolev_norm

    params, indices, grid, data = _require_config(args)
    s = indices.s
    report = {
        "s": s,
        "u0_Hs": sobolev_norm(data.u0, s, grid.dx),
        "v0_Hs": sobolev_norm(data.v0, s, grid.dx),
        "bdry_u_H": sobolev_norm(data.bdry_u, s / 3, grid.dt),
        "bdry_v_H": sobolev_norm(data.bdry_v, s / 3, grid.dt),
        "lifespan_hint": suggest_lifespan(data, s, boundary_kind=params.boundary_kind,
                                          dx=grid.dx, dt=grid.dt),
    }
    write_json(out / "norms.json", report)
    return report


# ---------------------------------------------------------------- validate


def _check(rows, name, value, tol, ok=None):
    ok = (value <= tol) if ok is None else ok
    rows.append((name, value, tol, ok))


def _suite_linear(rows):
    from .utm_linear import LinearProblem, UTMSolver, global_relation_residual

    g = GridSpec(L=20, nx=401, T=0.2, nt=101, R=10, nq=1600)
    d = ProblemData.from_profiles(g, u0="gaussian(center=10,width=1)",
                                  bdry_u="gaussian(center=0.1,width=0.02)")
    p = LinearProblem.u_equation(MBParams(1.0, 0.0, 0.0, "dirichlet"), d, g)
    solver = UTMSolver(p)
    sol = solver.solve()
    _check(rows, "dirichlet_boundary_recovery", relative_l2(solver.trace(sol, 0), p.boundary), 1e-3)
    _check(rows, "dirichlet_initial_recovery", relative_l2(sol.values[:, 0], p.initial), 1e-3)
    pr = LinearProblem.u_equation(MBParams(1.0, -1.0, -1.0, "robin"), d, g)
    sr = UTMSolver(pr)
    sol_r = sr.solve()
    bc = sr.trace(sol_r, 1) + pr.gamma * sr.trace(sol_r, 0)
    _check(rows, "robin_trace_recovery", relative_l2(bc, pr.boundary), 1e-2)
    probes = 0.5 * np.exp(-1j * np.linspace(0.1, np.pi - 0.1, 10))
    _check(rows, "global_relation", global_relation_residual(sol, p, probes, g.t[50]), 1e-4)


def _suite_resonance(rows):
    from .resonance import critical_exponent, d_alpha, roots

    rng = np.random.default_rng(0)
    xi, xi1 = rng.uniform(-10, 10, (2, 10_000))
    for a in (0.5, 2.0, 4.0):
        r1, r2 = roots(a)
        lhs = d_alpha(xi, xi1, a)
        rhs = 3 * a * xi * (xi1 - r1 * xi) * (xi1 - r2 * xi)
        scale = np.abs(xi) ** 3 + np.abs(xi1) ** 3
        _check(rows, f"factorization_alpha_{a:g}", float(np.max(np.abs(lhs - rhs) / scale)), 1e-12)
    table = {0.5: (0.0, True), 1.0: (-0.75, False), 4.0: (0.75, True), 9.0: (-0.75, False)}
    ok = all(tuple(critical_exponent(a)) == v for a, v in table.items())
    _check(rows, "critical_exponent_table", 0.0, 0.0, ok)


def _suite_norms(rows):
    from .norms import SpaceTimeSample, bourgain_norm, sobolev_norm

    rng = np.random.default_rng(1)
    f = rng.standard_normal(256)
    dx, dt = 0.1, 0.01
    l2 = np.sqrt(dx * np.sum(f * f))
    _check(rows, "parseval_1d", abs(sobolev_norm(f, 0.0, dx) - l2) / l2, 1e-10)
    w = rng.standard_normal((64, 32))
    l2 = np.sqrt(dx * dt * np.sum(w * w))
    val = bourgain_norm(SpaceTimeSample(w, dx, dt), 0.0, 0.0, 1.0)
    _check(rows, "parseval_2d", abs(val - l2) / l2, 1e-10)


SUITES = {"linear": _suite_linear, "resonance": _suite_resonance, "norms": _suite_norms}


def cmd_validate(args, out: Path):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    rows = []
    for n in names:
        SUITES[n](rows)
    write_csv(out / "validate.csv", ["check", "value", "tolerance", "pass"], rows)
    for name, value, tol, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'} {name} value={value:.3e} tol={tol:.1e}")
    failed = [r[0] for r in rows if not r[3]]
    if failed:
        raise ValidationFailed(", ".join(failed))
    return {"checks": len(rows)}


# ------------------------------------------------------------------ parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="TOML run configuration")
    common.add_argument("--out", type=str, default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    common.add_argument("--threads", type=int, default=None,
                        help="recorded in the manifest; BLAS threading follows the environment")

    ap = argparse.ArgumentParser(prog="mb", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--from-manifest", type=str, default=None,
                    help="rerun the command recorded in a manifest.json")
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("solve", parents=[common], help="nonlinear solve by contraction iteration")
    p.add_argument("--T-star", dest="T_star", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=25)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("linear", parents=[common], help="one linear half-line problem")
    p.add_argument("--equation", choices=("u", "v"), default="u")
    p.set_defaults(func=cmd_linear)

    p = sub.add_parser("resonance", parents=[common], help="resonance geometry over an alpha sweep")
    p.add_argument("--alpha-min", type=float, default=0.2)
    p.add_argument("--alpha-max", type=float, default=6.0)
    p.add_argument("--steps", type=int, default=30)
    p.set_defaults(func=cmd_resonance)

    p = sub.add_parser("counterexample", parents=[common], help="Theta scaling study")
    p.add_argument("--alpha", type=float, default=4.0)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.45)
    p.add_argument("--N", type=int, action="append")
    p.add_argument("--no-refine", action="store_true",
                   help="skip the doubled-grid quadrature check (about 6x faster)")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("norms", parents=[common], help="data norms and lifespan hint")
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("validate", parents=[common], help="acceptance-style checks")
    p.add_argument("--suite", choices=("all", *SUITES), default="all")
    p.set_defaults(func=cmd_validate)
    return ap


def _error_record(code, message):
    print(json.dumps({"error": code, "message": str(message)}, sort_keys=True), file=sys.stderr)


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.from_manifest:
        try:
            recorded = json.loads(Path(args.from_manifest).read_text(encoding="utf-8"))["argv"]
        except (OSError, KeyError, ValueError) as exc:
            _error_record("ParseError", f"bad manifest: {exc}")
            return 1
        return run(recorded)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        args.func(args, out)
        status = 0
    except ValidationFailed as exc:
        _error_record("ValidationFailed", exc)
        status = 2
    except MBError as exc:
        _error_record(getattr(exc, "code", type(exc).__name__), exc)
        return 1
    except (OSError, ValueError) as exc:
        _error_record(type(exc).__name__, exc)
        return 1
    manifest = RunManifest(args.command, args.config, str(out), args.seed, args.threads,
                           __version__, _dt.datetime.now(_dt.timezone.utc).isoformat(), argv)
    write_json(out / "manifest.json", asdict(manifest))
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
