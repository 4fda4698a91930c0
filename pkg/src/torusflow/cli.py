"""Command-line pipeline: recurse -> build -> verify / scaling / functional.

Exit codes: 0 pass, 1 mathematical failure (obstruction or residual above
threshold), 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import config
from .brackets import (
    IntegralCoeffs,
    combination_identity,
    conservation_residuals,
    kolokoltsov_complete,
    l_coeffs,
    lemma1_pqr,
    poisson_residual,
    potential_triple,
)
from .documents import (
    DocumentError,
    dumps,
    read_flow,
    read_free,
    read_potential,
    read_seed,
    read_series,
    read_solution,
    write_grid_csv,
    write_json,
)
from .fields import is_zero_field, sample
from .flowbuild import (
    NonClosedForm,
    NonPositiveDensity,
    PeriodObstruction,
    QuadraticForm,
    Role,
    build_from_solution,
    build_n3,
    eq4_residual,
    flow_grids,
)
from .recursion import NotSinSin, ResonanceObstruction, run
from .trigser import as_rational, cc, random_series, sc, ss
from .variational import LagrangianSpec, MismatchWithE4, action, el_residual, gateaux_certificate

log = logging.getLogger("torusflow")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MATH_ERRORS = (
    ResonanceObstruction,
    NotSinSin,
    NonPositiveDensity,
    NonClosedForm,
    PeriodObstruction,
    MismatchWithE4,
)


# directions for the first-variation certificate
TEST_DIRECTIONS = (cc(1, 2) + ss(1, 2), cc(2, 3), cc(1, 1) + sc(2, 1))


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    order: int = 0
    eps: list[Fraction] = field(default_factory=list)
    c2: Fraction = Fraction(1)
    grid: int = config.GRID_N
    rng_seed: int = 0
    paths: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        outs = [Path(p).resolve() for p in self.paths.values() if p is not None]
        if len(set(outs)) != len(outs):
            raise UsageError("input and output paths must be distinct")
        if self.order < 0:
            raise UsageError("order K must be >= 0")
        if any(e <= 0 for e in self.eps):
            raise UsageError("all epsilon values must be positive")
        if self.grid < 16 or self.grid & (self.grid - 1):
            raise UsageError("grid size must be a power of two >= 16")
        if self.c2 <= 0:
            raise UsageError("c2 must be positive")
        return self


def _rational_arg(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _emit(doc, path) -> None:
    if path:
        write_json(path, doc)
    else:
        sys.stdout.write(dumps(doc))


# ---------------------------------------------------------------------------
# commands


def cmd_recurse(args) -> int:
    cfg = RunConfig(
        "recurse", order=args.order, grid=config.GRID_N,
        paths={"seed": args.seed, "free": args.free, "out": args.out, "report": args.report},
    ).validate()
    seed = read_seed(args.seed)
    free = read_free(args.free) if args.free else None
    try:
        sol = run(seed, cfg.order, free)
    except ResonanceObstruction as exc:
        doc = exc.to_doc() | {"thresholds": config.thresholds()}
        _emit(doc, args.report)
        if args.report:
            sys.stderr.write(dumps(doc))
        return EXIT_FAIL
    write_json(args.out, sol.to_doc())
    report = {
        "command": "recurse",
        "order": sol.order,
        "convention": sol.sign_convention,
        "seed": seed.to_doc(),
        "audit": sol.resonance_audit,
        "pass": all(not a["resonant"] for a in sol.resonance_audit),
        "thresholds": config.thresholds(),
    }
    _emit(report, args.report)
    return EXIT_PASS if report["pass"] else EXIT_FAIL


def cmd_build(args) -> int:
    paths = {"out": args.out, "solution": args.solution, "potential": args.potential}
    cfg = RunConfig(
        "build", eps=[args.eps] if args.eps is not None else [], c2=args.c2, grid=args.grid,
        paths=paths,
    ).validate()
    if args.n == 4:
        if args.solution is None or args.eps is None:
            raise UsageError("--n 4 needs --solution and --eps")
        sol = read_solution(args.solution)
        flow = build_from_solution(sol, args.eps, cfg.c2, C=args.C, N=cfg.grid)
    else:
        if args.potential is None:
            raise UsageError("--n 3 needs --potential")
        h = read_potential(args.potential)
        if h.role is not Role.H3:
            log.info("treating potential as the cubic-integral h")
        flow = build_n3(h, cfg.c2, N=cfg.grid)
        l4 = l_coeffs(IntegralCoeffs.from_flow(flow))[0]
        flow.audit["l4_identity"] = (l4 * h.laplacian).equals(eq4_residual(h))
    flow.audit["thresholds"] = config.thresholds()
    write_json(args.out, flow.to_doc())
    if args.csv_dir:
        out = Path(args.csv_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, values in flow_grids(flow, cfg.grid).items():
            write_grid_csv(out / f"{name}.csv", values)
    return EXIT_PASS


def _random_lemma1_trials(n: int, trials: int, rng: random.Random) -> bool:
    for _ in range(trials):
        lower = [random_series(rng, 2, 4) for _ in range(n - 1)]
        c1 = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        c2 = Fraction(rng.randint(1, 5), rng.randint(1, 3))
        coeffs = IntegralCoeffs(n, kolokoltsov_complete(n, lower, c1, c2), random_series(rng, 2, 4) + 5, c1, c2)
        if not all(is_zero_field(d) for d in combination_identity(coeffs)):
            return False
    return True


def cmd_verify(args) -> int:
    cfg = RunConfig("verify", grid=args.grid, rng_seed=args.rng_seed,
                    paths={"flow": args.flow, "out": args.out}).validate()
    flow = read_flow(args.flow)
    try:
        coeffs = IntegralCoeffs.from_flow(flow)
    except ValueError as exc:
        raise DocumentError(f"{args.flow}: {exc}") from exc
    tol = args.tol
    what = {"bracket", "conservation", "lemma1", "variational"} if args.what == "all" else {args.what}
    checks = {}
    if "bracket" in what:
        rep = poisson_residual(coeffs, cfg.grid)
        checks["bracket"] = {
            "l_max": rep.l_max, "aggregate": rep.aggregate, "exact": rep.exact,
            "pass": rep.aggregate <= tol,
        }
    if "conservation" in what:
        laws = {}
        triples = {"lemma1": lemma1_pqr(coeffs)[0]}
        if flow.n in (3, 4):
            triples["potential"] = potential_triple(coeffs)
        for name, t in triples.items():
            r1, r2 = conservation_residuals(t)
            laws[name] = {
                "law1": float(np.abs(sample(r1, cfg.grid)).max()),
                "law2": float(np.abs(sample(r2, cfg.grid)).max()),
            }
        worst = max(v for d in laws.values() for v in d.values())
        checks["conservation"] = {"laws": laws, "pass": worst <= tol}
    if "lemma1" in what:
        d1, d2 = combination_identity(coeffs)
        own = is_zero_field(d1) and is_zero_field(d2)
        rng = random.Random(cfg.rng_seed)
        fuzz = _random_lemma1_trials(flow.n, args.trials, rng)
        checks["lemma1"] = {"flow_exact": own, "random_trials": args.trials, "random_exact": fuzz,
                            "pass": own and fuzz}
    if "variational" in what:
        if flow.n != 4:
            checks["variational"] = {"skipped": "variational form exists for n = 4 only", "pass": True}
        else:
            pot = flow.potential
            spec = LagrangianSpec(pot.quad)
            el_residual(pot.periodic_part, spec)
            certs = [gateaux_certificate(pot.periodic_part, phi, spec) for phi in TEST_DIRECTIONS]
            checks["variational"] = {
                "certificates": [c.to_doc() for c in certs],
                "el_matches_e4": True,
                "pass": all(c.equal for c in certs),
            }
    ok = all(c["pass"] for c in checks.values())
    report = {
        "command": "verify",
        "n": flow.n,
        "grid": cfg.grid,
        "tol": tol,
        "checks": checks,
        "pass": ok,
        "thresholds": config.thresholds(),
    }
    _emit(report, args.out)
    return EXIT_PASS if ok else EXIT_FAIL


def _sweep_point(sol, eps, c2, grid) -> float:
    flow = build_from_solution(sol, eps, c2, N=grid)
    return poisson_residual(IntegralCoeffs.from_flow(flow), grid).aggregate


def scaling_sweep(
    sol, eps_list, c2=1, grid=config.GRID_N, jobs: int = 1
) -> tuple[list[tuple[Fraction, float]], float]:
    """Residual per epsilon (in input order) and the least-squares log-log slope."""
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_point, sol, e, c2, grid) for e in eps_list]
            values = [f.result() for f in futures]
    else:
        values = [_sweep_point(sol, e, c2, grid) for e in eps_list]
    rows = list(zip(eps_list, values))
    x = np.log([float(e) for e, _ in rows])
    y = np.log([r for _, r in rows])
    slope = float(np.polyfit(x, y, 1)[0])
    return rows, slope


def cmd_scaling(args) -> int:
    eps_list = args.eps or list(config.SCALING_EPS)
    cfg = RunConfig("scaling", eps=eps_list, c2=args.c2, grid=args.grid,
                    paths={"solution": args.solution, "out": args.out, "report": args.report}).validate()
    sol = read_solution(args.solution)
    rows, slope = scaling_sweep(sol, cfg.eps, cfg.c2, cfg.grid, jobs=args.jobs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps", "max_residual"])
    for eps, r in rows:
        w.writerow([repr(float(eps)), repr(r)])
    Path(args.out).write_text(buf.getvalue())
    expected = args.expected_slope if args.expected_slope is not None else sol.order + 1
    ok = abs(slope - expected) <= config.SLOPE_TOL
    report = {
        "command": "scaling", "order": sol.order, "slope": slope, "expected_slope": expected,
        "pass": ok, "thresholds": config.thresholds(),
    }
    _emit(report, args.report)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_functional(args) -> int:
    RunConfig("functional", paths={"lambda": args.lam, "phi": args.phi, "out": args.out}).validate()
    lam = read_series(args.lam)
    if args.eps is not None:
        spec = LagrangianSpec.simple(args.eps)
    else:
        spec = LagrangianSpec(QuadraticForm(args.a11, args.a12, args.a22))
    phi = read_series(args.phi) if args.phi else TEST_DIRECTIONS[0]
    cert = gateaux_certificate(lam, phi, spec)
    doc = cert.to_doc() | {"command": "functional", "value": str(action(lam, spec)),
                           "scale": "(2pi)^2", "pass": cert.equal}
    _emit(doc, args.out)
    return EXIT_PASS if cert.equal else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="torusflow", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("recurse", help="build the epsilon series from a symmetric seed")
    r.add_argument("--seed", required=True)
    r.add_argument("--order", "-K", type=int, required=True)
    r.add_argument("--free")
    r.add_argument("--out", required=True)
    r.add_argument("--report")
    r.set_defaults(func=cmd_recurse)

    b = sub.add_parser("build", help="reconstruct metric and integral")
    b.add_argument("--n", type=int, choices=(3, 4), default=4)
    b.add_argument("--solution")
    b.add_argument("--potential")
    b.add_argument("--eps", type=_rational_arg)
    b.add_argument("--c2", type=_rational_arg, default=Fraction(1))
    b.add_argument("--C", type=_rational_arg, default=Fraction(0))
    b.add_argument("--grid", type=int, default=config.GRID_N)
    b.add_argument("--csv-dir")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="residual and identity checks on a flow")
    v.add_argument("what", choices=("bracket", "conservation", "lemma1", "variational", "all"))
    v.add_argument("--flow", required=True)
    v.add_argument("--grid", type=int, default=config.GRID_N)
    v.add_argument("--tol", type=float, default=config.FLOAT_TOL)
    v.add_argument("--rng-seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=10)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("scaling", help="residual vs epsilon sweep with log-log slope")
    s.add_argument("--solution", required=True)
    s.add_argument("--eps", type=_rational_arg, nargs="+")
    s.add_argument("--c2", type=_rational_arg, default=Fraction(1))
    s.add_argument("--grid", type=int, default=config.GRID_N)
    s.add_argument("--expected-slope", type=float)
    s.add_argument("--jobs", type=int, default=1, help="worker processes for the epsilon points")
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_scaling)

    f = sub.add_parser("functional", help="action value and first-variation certificate")
    f.add_argument("--lambda", dest="lam", required=True)
    f.add_argument("--phi")
    f.add_argument("--eps", type=_rational_arg)
    f.add_argument("--a11", type=_rational_arg, default=Fraction(1))
    f.add_argument("--a12", type=_rational_arg, default=Fraction(0))
    f.add_argument("--a22", type=_rational_arg, default=Fraction(1))
    f.add_argument("--out")
    f.set_defaults(func=cmd_functional)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, DocumentError) as exc:
        sys.stderr.write(dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_USAGE
    except MATH_ERRORS as exc:
        doc = exc.to_doc() if hasattr(exc, "to_doc") else {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(dumps(doc))
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
