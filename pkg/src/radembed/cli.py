"""Command-line front end.

Exit codes: 0 success, 1 hypothesis or domain error, 2 input error,
3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Optional

from .catalog import CatalogError, best_ranges
from .estimator import decay_report, load_tabulated
from .examples import EXAMPLES, run_example
from .exponents import (DomainError, HypothesisViolation, ProblemDims, Side, q_double_star,
                        q_lower_star, region_membership)
from .extended import ExtendedRationalError, emax, ext
from .grid import RadialGrid
from .nonlinearity import NonlinearitySpec, check_hypotheses
from .potentials import PotentialParseError, parse_potential
from .solver import SolverError, SolverOptions, solve_mountain_pass, solve_sublinear

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT, EXIT_NONCONVERGED = 0, 1, 2, 3
KIND_NAMES = {"single": "SingleSpace", "sum": "SumSpace", "none": "None"}


class InputError(ValueError):
    pass


def _fraction(text) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a rational number: {text!r}") from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# configuration files

@dataclass
class GridConfig:
    rmin: float = 1e-6
    rmax: float = 1e3
    M: int = 512


@dataclass
class NonlinearityConfig:
    family: str = "pure_power"
    q1: str = "4"
    q2: Optional[str] = None
    epsilon: Optional[str] = None
    forcing: Optional[str] = None


@dataclass
class SolveConfig:
    p: str = "2"
    N: int = 3
    V: str = "0"
    K: str = "1"
    nonlinearity: NonlinearityConfig = field(default_factory=NonlinearityConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    mode: str = "mp"
    tol: Optional[float] = None
    seed: int = 0
    truncate: bool = True


@dataclass
class EstimateConfig:
    p: str = "2"
    N: int = 3
    V: Optional[str] = None
    K: Optional[str] = None
    table: Optional[str] = None
    q_values: list = field(default_factory=lambda: ["4"])
    sides: list = field(default_factory=lambda: ["origin", "infinity"])
    R_origin: list = field(default_factory=lambda: ["1", "1/2", "1/4", "1/8", "1/16", "1/32"])
    R_infinity: list = field(default_factory=lambda: ["1", "2", "4", "8", "16", "32"])
    grid: GridConfig = field(default_factory=GridConfig)
    budget: int = 20000
    seed: int = 0


def _from_mapping(cls, data, where="config"):
    """Build a config dataclass, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise InputError(f"{where}: unknown field(s) {', '.join(unknown)}")
    values = {}
    for name, value in data.items():
        default = getattr(cls(), name)
        if isinstance(default, (GridConfig, NonlinearityConfig)):
            value = _from_mapping(type(default), value, f"{where}.{name}")
        values[name] = value
    return cls(**values)


def _load_config(cls, path: str):
    try:
        with open(path) as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return _from_mapping(cls, data, path)


def _dims(p, N) -> ProblemDims:
    try:
        return ProblemDims(_fraction(p), int(N))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise InputError(str(exc)) from None


def _grid(cfg: GridConfig, dims: ProblemDims) -> RadialGrid:
    try:
        return RadialGrid.log_spaced(float(cfg.rmin), float(cfg.rmax), int(cfg.M), dims.N, float(dims.p))
    except (TypeError, ValueError) as exc:
        raise InputError(f"grid: {exc}") from None


# ---------------------------------------------------------------------------
# commands

def cmd_ranges(args) -> int:
    dims = _dims(args.p, args.N)
    V, K = parse_potential(args.V), parse_potential(args.K)
    report = best_ranges(V, K, dims, verify_grid=args.verify_grid)
    c = report.conclusion
    if args.format == "json":
        out = report.to_dict()
        out["inputs"] = {"V": V.text, "K": K.text, "p": str(dims.p), "N": dims.N,
                         "verify_grid": args.verify_grid}
        out["conclusion"]["name"] = KIND_NAMES[c.kind]
        _write(_dump(out), args.output)
        return EXIT_OK
    lines = []
    for end in (report.origin, report.infinity):
        g = end.candidates.gamma_best
        lines.append(f"{end.side.value}: gamma_best={'none' if g is None else g}")
        for seg in end.candidates.segments:
            d = seg.describe()
            lines.append(f"  beta in {d['beta']}: alpha bound {d['alpha_bound']}")
        for name, rng in end.ranges.items():
            mark = " (chosen)" if name == end.chosen else ""
            lines.append(f"  {name}: {rng.interval}{mark}")
    if c.kind == "single":
        lines.append(f"conclusion: SingleSpace {c.qset}")
    elif c.kind == "sum":
        lines.append(f"conclusion: SumSpace q1 in {c.q1set}, q2 in {c.q2set}")
    else:
        lines.append("conclusion: None")
    for note in c.diagnostics:
        lines.append(f"  violated: {note}")
    _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _lattice(spec: str, steps: int):
    try:
        lo, hi = (_fraction(x) for x in spec.split(":"))
    except ValueError:
        raise InputError(f"range must look like lo:hi, got {spec!r}") from None
    if not lo < hi or steps < 1:
        raise InputError(f"empty range {spec!r}")
    return [lo + (hi - lo) * k / steps for k in range(steps + 1)]


def region_rows(beta, gamma, dims: ProblemDims, alphas, qs):
    rows = []
    for a in alphas:
        for q in qs:
            rows.append(("member", str(a), str(q), int(region_membership(a, q, beta, gamma, dims))))
    for a in alphas:
        for name, fn in (("q_lower_star", q_lower_star), ("q_double_star", q_double_star)):
            try:
                value = str(fn(a, beta, gamma, dims)) if ext(gamma).is_finite else ""
            except DomainError:
                value = ""
            rows.append((name, str(a), value, ""))
        rows.append(("base", str(a), str(emax(ext(1), dims.p * ext(beta))), ""))
    return rows


def cmd_region(args) -> int:
    dims = _dims(args.p, args.N)
    beta = _fraction(args.beta)
    gamma = ext("inf") if args.gamma.strip() == "inf" else ext(_fraction(args.gamma))
    if gamma < dims.p:
        raise DomainError(f"region needs gamma >= p, got {gamma}")
    alphas = _lattice(args.alpha_range, args.steps)
    qs = _lattice(args.q_range, args.steps)
    rows = region_rows(beta, gamma, dims, alphas, qs)
    _write(_csv_text(("series", "alpha", "q", "in"), rows), args.output)
    return EXIT_OK


def _param(text: str):
    if "=" not in text:
        raise InputError(f"parameters look like name=value, got {text!r}")
    name, value = text.split("=", 1)
    value = value.strip()
    if name.strip() == "variant":
        return name.strip(), value
    return name.strip(), _fraction(value)


def cmd_example(args) -> int:
    params = dict(_param(t) for t in args.param)
    try:
        out = run_example(args.id, **params)
    except TypeError as exc:
        raise InputError(f"example {args.id}: {exc}") from None
    _write(_dump(out), args.output)
    return EXIT_OK if out["match"] else EXIT_DOMAIN


def _estimate_config(args) -> EstimateConfig:
    cfg = _load_config(EstimateConfig, args.config) if args.config else EstimateConfig()
    for name in ("p", "N", "V", "K", "table", "budget", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if args.q:
        cfg.q_values = args.q
    if args.side:
        cfg.sides = [args.side] if args.side != "both" else ["origin", "infinity"]
    if args.M is not None:
        cfg.grid = GridConfig(cfg.grid.rmin, cfg.grid.rmax, args.M)
    return cfg


def cmd_estimate(args) -> int:
    cfg = _estimate_config(args)
    if isinstance(cfg.grid, dict):
        cfg.grid = _from_mapping(GridConfig, cfg.grid, "grid")
    dims = _dims(cfg.p, cfg.N)
    grid = _grid(cfg.grid, dims)
    proven = {}
    if cfg.table:
        V, K = load_tabulated(cfg.table)
    else:
        if cfg.V is None or cfg.K is None:
            raise InputError("estimate needs V and K (or a table)")
        V, K = parse_potential(cfg.V), parse_potential(cfg.K)
        conc = best_ranges(V, K, dims).conclusion
        proven = {Side.ORIGIN: conc.q1set, Side.INFINITY: conc.q2set}
    qs = [_fraction(q) for q in cfg.q_values]
    report, rows_csv = [], []
    all_converged = True
    for name in cfg.sides:
        try:
            side = Side(name)
        except ValueError:
            raise InputError(f"side must be origin or infinity, got {name!r}") from None
        schedule = [float(_fraction(R)) for R in (cfg.R_origin if side is Side.ORIGIN else cfg.R_infinity)]
        check = (lambda q, s=proven.get(side): s.contains(Fraction(q).limit_denominator(10 ** 9))) \
            if side in proven else None
        try:
            rows = decay_report([float(q) for q in qs], schedule, side, V, K, grid, cfg.budget, check)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        for row in rows:
            report.append(row.to_dict())
            for e in row.estimates:
                rows_csv.append((side.value, repr(e.q), repr(e.R), repr(float(e.value)), e.converged))
                all_converged = all_converged and e.converged
    out = {"label": "empirical", "config": asdict(cfg), "rows": report,
           "summary": {f"{r['side']}:{r['q']}": r["classification"] for r in report}}
    _write(_dump(out), args.output)
    if args.csv:
        _write(_csv_text(("side", "q", "R", "estimate", "converged"), rows_csv), args.csv)
    return EXIT_OK if all_converged else EXIT_NONCONVERGED


def _nonlinearity(cfg: NonlinearityConfig) -> NonlinearitySpec:
    forcing = parse_potential(cfg.forcing) if cfg.forcing else None
    q1 = _fraction(cfg.q1)
    q2 = _fraction(cfg.q2) if cfg.q2 is not None else q1
    eps = _fraction(cfg.epsilon) if cfg.epsilon is not None else Fraction(0)
    try:
        if cfg.family == "pure_power":
            if q2 != q1:
                raise InputError("pure_power takes a single exponent q1")
            return NonlinearitySpec.pure_power(q1, forcing)
        if cfg.family == "min_power":
            return NonlinearitySpec.min_power(q1, q2, forcing)
        if cfg.family == "rational_power":
            return NonlinearitySpec.rational_power(q1, q2, forcing)
        if cfg.family == "log_perturbed":
            return NonlinearitySpec.log_perturbed(q1, q2, eps, forcing)
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"nonlinearity: {exc}") from None
    raise InputError(f"nonlinearity family must be one of pure_power, min_power, rational_power, "
                     f"log_perturbed; got {cfg.family!r}")


def cmd_solve(args) -> int:
    cfg = _load_config(SolveConfig, args.config)
    if args.mode:
        cfg.mode = args.mode
    if args.seed is not None:
        cfg.seed = args.seed
    if cfg.mode not in ("min", "mp"):
        raise InputError(f"mode must be min or mp, got {cfg.mode!r}")
    dims = _dims(cfg.p, cfg.N)
    V, K = parse_potential(cfg.V), parse_potential(cfg.K)
    nl = _nonlinearity(cfg.nonlinearity)
    grid = _grid(cfg.grid, dims)
    hyp = check_hypotheses(nl, V, K, dims)
    opts = SolverOptions(tol=cfg.tol, seed=int(cfg.seed), truncate=bool(cfg.truncate))
    solve = solve_sublinear if cfg.mode == "min" else solve_mountain_pass
    out = {"config": asdict(cfg), "hypotheses": hyp.to_dict()}
    try:
        sol = solve(V, K, nl, grid, opts)
    except SolverError as exc:
        out["error"] = str(exc)
        out["best_residual"] = exc.residual
        _write(_dump(out), args.output)
        return EXIT_NONCONVERGED if type(exc) is SolverError else EXIT_DOMAIN
    out["solution"] = sol.to_dict()
    _write(_dump(out), args.output)
    if args.csv:
        rows = ((repr(float(r)), repr(float(u))) for r, u in zip(grid.nodes, sol.u.values))
        _write(_csv_text(("r", "u"), rows), args.csv)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radembed", description="Radial embedding ranges and radial solutions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ranges", help="best exponent ranges for a potential pair")
    p.add_argument("--V", required=True)
    p.add_argument("--K", required=True)
    p.add_argument("--p", default="2")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--verify-grid", type=int, default=None, metavar="DENOM")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_ranges)

    p = sub.add_parser("region", help="rasterize the admissible (alpha, q) region")
    p.add_argument("--beta", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--p", default="2")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--alpha-range", default="-4:2")
    p.add_argument("--q-range", default="1:12")
    p.add_argument("--steps", type=int, default=24)
    p.add_argument("--output")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("example", help="reproduce a worked example")
    p.add_argument("id", choices=sorted(EXAMPLES))
    p.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--output")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("estimate", help="empirical decay of the localized suprema")
    p.add_argument("--config")
    p.add_argument("--V")
    p.add_argument("--K")
    p.add_argument("--table", help="CSV with columns r, V, K")
    p.add_argument("--p")
    p.add_argument("--N", type=int)
    p.add_argument("--q", action="append")
    p.add_argument("--side", choices=("origin", "infinity", "both"))
    p.add_argument("--M", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("solve", help="compute a nonnegative radial solution")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=("min", "mp"))
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, PotentialParseError, ExtendedRationalError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, HypothesisViolation, CatalogError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SolverError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
