"""Command-line entry point: every command prints one JSON report."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import catalog, empirical as emp, lyapunov as lyap, roots, suspension as susp, svg, toral

SCHEMA = "cartanlab/1"
BUILTIN_ACTIONS = {"example": catalog.example_action, "quartic": catalog.quartic_action, "cat": catalog.cat_action}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# helpers


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n"


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _action(args) -> toral.CartanActionSpec:
    if args.spec is None:
        raise UsageError(f"{args.command}: --spec is required")
    if args.spec in BUILTIN_ACTIONS and not Path(args.spec).exists():
        return BUILTIN_ACTIONS[args.spec]()
    if not Path(args.spec).exists():
        raise UsageError(f"--spec: no such file {args.spec!r}")
    return catalog.load_action(args.spec)


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _number(text: str):
    """'p/q' -> Fraction, 'sqrt(m)' -> frac(sqrt m) as float, otherwise float."""
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    if text.startswith("sqrt(") and text.endswith(")"):
        v = math.sqrt(float(text[5:-1]))
        return v - math.floor(v)
    return float(text)


def _element(args, spec) -> tuple[int, ...]:
    n = _ints(args.element) if args.element else (1,) + (0,) * (spec.rank - 1)
    if len(n) != spec.rank:
        raise UsageError(f"--element: expected {spec.rank} integers")
    return n


def _roots(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(";"):
        i, j = _ints(item)
        out.append((i, j))
    return out


def _map(name: str):
    maps = {"cat": emp.ToralMap(catalog.CAT_MAP), "doubling": emp.CircleMap(2), "tripling": emp.CircleMap(3)}
    if name not in maps:
        raise UsageError(f"--map: choose from {sorted(maps)}")
    return maps[name]


# ---------------------------------------------------------------------------
# commands; each returns (results, ok)


def cmd_validate(args):
    spec = _action(args)
    rep = toral.validate_cartan(spec, args.bound)
    return {"action": spec.to_json(), "validation": rep.to_json()}, rep.passed


def cmd_chambers(args):
    spec = _action(args)
    diagram = lyap.chamber_diagram(spec.family)
    if args.svg:
        write_atomic(args.svg, svg.chamber_svg(diagram))
    labels = diagram.labels()
    balanced = not any(set(s) == {"+"} or set(s) == {"-"} for s in labels)
    return {"action": spec.to_json(), "chambers": diagram.to_json(), "no_definite_chamber": balanced}, True


def cmd_entropy_lebesgue(args):
    spec = _action(args)
    n = _element(args, spec)
    return {"element": n, "entropy": toral.lebesgue_entropy(spec, n), "family": spec.family.to_json()}, True


def _estimate(args) -> tuple[emp.EntropyReport, emp.OrbitSample | None]:
    fmap = _map(args.map)
    if args.periodic:
        if not isinstance(fmap, emp.ToralMap):
            raise UsageError("--periodic is only available for the cat map")
        sample = emp.periodic_orbit(fmap, toral.TorusPoint((Fraction(1, 7), Fraction(3, 7))), args.samples)
    elif args.bernoulli is not None:
        if not isinstance(fmap, emp.CircleMap) or fmap.factor != 2:
            raise UsageError("--bernoulli is only available for the doubling map")
        sample = emp.bernoulli_orbit(2, args.bernoulli, args.samples, args.seed)
    else:
        sample = emp.lebesgue_orbit(fmap, args.samples, args.seed)
    if args.method == "brin-katok":
        report = emp.brin_katok_entropy(fmap, sample)
    else:
        bins = [fmap.factor] if isinstance(fmap, emp.CircleMap) else [4, 4]
        prof = emp.partition_entropy_profile(fmap, bins, args.depth, sample=sample)
        report = emp.EntropyReport(prof.rate, "partition-rate", details=prof.to_json())
    return report, sample


def _map_family(fmap) -> lyap.FunctionalFamily:
    if isinstance(fmap, emp.CircleMap):
        return emp.rank_one_family(math.log(fmap.factor))
    return catalog.cat_action().family


def cmd_entropy_estimate(args):
    report, _ = _estimate(args)
    if args.svg and report.method == "brin-katok":
        write_atomic(args.svg, svg.slope_svg(report.details))
    return {"map": _map(args.map).describe(), "samples": args.samples, "report": report.to_json()}, True


def cmd_entropy_report(args):
    report, _ = _estimate(args)
    fmap = _map(args.map)
    full = emp.entropy_inequality_report(report, _map_family(fmap), (1,))
    if args.svg and report.method == "brin-katok":
        write_atomic(args.svg, svg.slope_svg(report.details))
    return {"map": fmap.describe(), "samples": args.samples, "report": full.to_json()}, True


def cmd_orbit(args):
    spec = _action(args)
    n = _element(args, spec)
    m = toral.element(spec, n)
    coords = tuple(Fraction(v) for v in args.point.split(","))
    if len(coords) != spec.dim:
        raise UsageError(f"--point: expected {spec.dim} coordinates")
    res = toral.orbit(m, toral.TorusPoint(coords), args.steps)
    return {
        "element": n,
        "matrix": [list(r) for r in m.rows],
        "points": [p.to_json() for p in res.points],
        "period": res.period,
        "preperiod": res.preperiod,
    }, True


def cmd_furstenberg_orbit(args):
    orb = sorted(toral.furstenberg_rational_orbit(args.a, args.b, args.q))
    return {"a": args.a, "b": args.b, "q": args.q, "orbit": [f"{k}/{args.q}" for k in orb], "size": len(orb)}, True


def cmd_furstenberg_gaps(args):
    prof = toral.gap_ratio_profile(args.a, args.b, args.N)
    if args.svg:
        write_atomic(args.svg, svg.ratio_svg(prof))
    return prof.to_json(), True


def cmd_furstenberg_density(args):
    x = _number(args.x)
    gaps = {}
    k = 1
    while 10**k <= args.N:
        gaps[str(10**k)] = toral.density_profile(args.a, args.b, x, 10**k)
        k += 1
    out = {"a": args.a, "b": args.b, "x": str(x), "N": args.N, "max_gap": toral.density_profile(args.a, args.b, x, args.N)}
    out["max_gap_by_N"] = gaps
    if isinstance(x, Fraction):
        out["orbit_size"] = len(toral.circle_points(args.a, args.b, x, args.N))
    return out, True


def cmd_suspension_check(args):
    spec = susp.SuspensionSpec.from_action(_action(args))
    rng = np.random.default_rng(args.seed)
    comp = 0.0
    for _ in range(args.pairs):
        s, t = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
        lhs = susp.interpolation_matrix(spec, s + t)
        rhs = susp.interpolation_matrix(spec, s) @ susp.interpolation_matrix(spec, t)
        comp = max(comp, float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs))))
    dil = 0.0
    grid = np.linspace(-1, 1, 10)
    kernels = [lyap.kernel_element(f) for f in spec.base.family.functionals]
    for j in range(3):
        for s in [np.array([a, b]) for a in grid for b in grid] + kernels:
            p = susp.reduce(spec, rng.uniform(0, 1, 2), rng.uniform(0, 1, 3))
            dil = max(dil, susp.dilation_residual(spec, s, p, j, 0.1))
    tol = args.tolerance if args.tolerance is not None else 1e-9
    res = {
        "reconstruction_residual": spec.reconstruction_residual(),
        "composition_residual": comp,
        "dilation_residual": dil,
        "tolerance": tol,
        "pairs": args.pairs,
    }
    ok = comp < tol and dil < tol and res["reconstruction_residual"] < 1e-8
    return res, ok


def cmd_roots_report(args):
    d = roots.RootDatum(args.n)
    return {
        "n": args.n,
        "roots": d.roots,
        "dimension": d.dimension,
        "parabolic_codimension": d.parabolic_codimension(),
    }, True


def cmd_roots_closure(args):
    d = roots.RootDatum(args.n)
    seed = _roots(args.roots)
    basis = roots.lie_closure(d, seed, include_cartan=args.cartan)
    return {"n": args.n, "seed": seed, "dimension": basis.dim, "closure_defect": basis.closure_defect()}, True


def cmd_roots_kak(args):
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    sorted_ok = True
    for _ in range(args.samples):
        k = roots.kak_decompose(roots.random_sl(args.n, rng))
        worst = max(worst, k.residual)
        sorted_ok &= bool(np.all(k.a > 0) and np.all(np.diff(k.a) <= 0))
    tol = args.tolerance if args.tolerance is not None else 1e-9
    return {"n": args.n, "samples": args.samples, "max_residual": worst, "a_positive_sorted": sorted_ok}, (
        worst < tol and sorted_ok
    )


def cmd_roots_schedule(args):
    v = _floats(args.functional)
    lam = lyap.LinearFunctional(list(v), "lambda")
    sched = roots.averaging_schedule_sl3(lam, generic=args.generic)
    ok = roots.verify_schedule(sched, lam)
    return {"functional": v, "schedule": sched.to_json(), "verified": ok}, ok and sched.verdict == "Haar"


def _cocycle(args):
    spec = _action(args)
    n = _element(args, spec)
    return n, emp.CocycleSample.constant(toral.element(spec, n), args.steps)


def cmd_lyapunov_top(args):
    n, coc = _cocycle(args)
    seq = emp.subadditive_sequence(coc)
    marks = sorted({min(len(seq), 10**k) for k in range(0, 9)})
    return {
        "element": n,
        "steps": args.steps,
        "estimate": float(seq[-1]),
        "sequence": {str(m): float(seq[m - 1]) for m in marks},
    }, True


def cmd_lyapunov_spectrum(args):
    n, coc = _cocycle(args)
    ex = emp.qr_oseledec(coc)
    return {"element": n, "steps": args.steps, "exponents": ex, "sum": float(ex.sum()), "mean_log_det": coc.mean_log_det()}, True


def cmd_shear_probe(args):
    if args.kind == "atoms":
        nu = emp.ShearMeasureSpec.exponential_lattice(args.rate)
    else:
        nu = emp.ShearMeasureSpec(args.kind, rate=args.rate)
    res = emp.shear_probe(nu, args.t, (-args.window, args.window))
    return {"kind": args.kind, "rate": args.rate, "t": args.t, "window": args.window, "result": res.to_json()}, True


def cmd_growth_probe(args):
    spec = _action(args)
    n = _element(args, spec)
    norms = emp.operator_norms(toral.element(spec, n), args.steps)
    res = emp.subexp_growth_probe(norms, args.eps)
    return {"element": n, "steps": args.steps, "result": res.to_json()}, True


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--spec", help="action spec JSON, or one of: " + ", ".join(BUILTIN_ACTIONS))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", dest="json_out", help="also write the report here")
    common.add_argument("--svg", help="write a figure here (where supported)")
    common.add_argument("--tolerance", type=float, help="override the verdict tolerance")
    common.add_argument("--bound", type=int, default=toral.DEFAULT_BOUND, help="search bound K")

    p = _Parser(prog="cartanlab", description="Cartan actions, exponents, and entropy estimators.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def leaf(parent, name, func, help_text=None):
        q = parent.add_parser(name, parents=[common], help=help_text)
        q.set_defaults(func=func)
        return q

    leaf(sub, "validate", cmd_validate, "check the Cartan action conditions")
    leaf(sub, "chambers", cmd_chambers, "Weyl chambers of the exponent family")

    ent = sub.add_parser("entropy", help="Lebesgue entropy and empirical estimators").add_subparsers(dest="sub", parser_class=_Parser)
    q = leaf(ent, "lebesgue", cmd_entropy_lebesgue)
    q.add_argument("--element")
    for name, func in (("estimate", cmd_entropy_estimate), ("report", cmd_entropy_report)):
        q = leaf(ent, name, func)
        q.add_argument("--map", default="cat")
        q.add_argument("--samples", type=int, default=100_000)
        q.add_argument("--method", choices=("brin-katok", "partition-rate"), default="brin-katok")
        q.add_argument("--depth", type=int, default=20)
        q.add_argument("--bernoulli", type=float, help="digit-1 probability (doubling map)")
        q.add_argument("--periodic", action="store_true", help="use the periodic orbit of (1/7, 3/7)")

    q = leaf(sub, "orbit", cmd_orbit, "exact orbit of a rational point")
    q.add_argument("--element")
    q.add_argument("--point", required=True, help="comma-separated rationals, e.g. 1/7,3/7")
    q.add_argument("--steps", type=int, default=100)

    fur = sub.add_parser("furstenberg", help="the x2, x3 semigroup on the circle").add_subparsers(dest="sub", parser_class=_Parser)
    q = leaf(fur, "orbit", cmd_furstenberg_orbit)
    q.add_argument("--a", type=int, default=2)
    q.add_argument("--b", type=int, default=3)
    q.add_argument("--q", type=int, required=True)
    q = leaf(fur, "gaps", cmd_furstenberg_gaps)
    q.add_argument("--a", type=int, default=2)
    q.add_argument("--b", type=int, default=3)
    q.add_argument("--N", type=int, default=10**6)
    q = leaf(fur, "density", cmd_furstenberg_density)
    q.add_argument("--a", type=int, default=2)
    q.add_argument("--b", type=int, default=3)
    q.add_argument("--x", required=True, help="p/q, sqrt(m) (fractional part), or a decimal")
    q.add_argument("--N", type=int, default=10**6)

    q = leaf(sub.add_parser("suspension", help="checks on the R^2 suspension").add_subparsers(dest="sub", parser_class=_Parser), "check", cmd_suspension_check)
    q.add_argument("--pairs", type=int, default=100)

    rt = sub.add_parser("roots", help="SL(n) root data and averaging schedules").add_subparsers(dest="sub", parser_class=_Parser)
    q = leaf(rt, "report", cmd_roots_report)
    q.add_argument("--n", type=int, default=3)
    q = leaf(rt, "closure", cmd_roots_closure)
    q.add_argument("--n", type=int, default=3)
    q.add_argument("--roots", required=True, help="semicolon-separated i,j pairs")
    q.add_argument("--cartan", action="store_true", help="include the Cartan subalgebra")
    q = leaf(rt, "kak", cmd_roots_kak)
    q.add_argument("--n", type=int, default=3)
    q.add_argument("--samples", type=int, default=100)
    q = leaf(rt, "schedule", cmd_roots_schedule)
    q.add_argument("--functional", required=True, help="2 reduced or 3 diagonal coordinates")
    q.add_argument("--generic", action="store_true")

    ly = sub.add_parser("lyapunov", help="Lyapunov exponents of a constant cocycle").add_subparsers(dest="sub", parser_class=_Parser)
    for name, func in (("top", cmd_lyapunov_top), ("spectrum", cmd_lyapunov_spectrum)):
        q = leaf(ly, name, func)
        q.add_argument("--element")
        q.add_argument("--steps", type=int, default=10_000)

    q = leaf(sub.add_parser("shear", help="translation probes of measures on R").add_subparsers(dest="sub", parser_class=_Parser), "probe", cmd_shear_probe)
    q.add_argument("--kind", choices=("atoms", "exp-density", "lebesgue"), default="atoms")
    q.add_argument("--rate", type=float, default=1.0)
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--window", type=float, default=5.0)

    q = leaf(sub.add_parser("growth", help="subexponential growth of operator norms").add_subparsers(dest="sub", parser_class=_Parser), "probe", cmd_growth_probe)
    q.add_argument("--element")
    q.add_argument("--steps", type=int, default=60)
    q.add_argument("--eps", type=float, default=0.1)
    return p


def _inputs(args) -> dict:
    skip = {"func", "json_out", "svg", "command", "sub", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def execute(argv=None, stdout=None) -> int:
    """Run one command. Exit codes: 0 success, 2 failed verdicts, 1 usage or input error."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            raise UsageError("cartanlab: a subcommand is required (see --help)")
        results, ok = args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except catalog.SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    command = " ".join(v for v in (args.command, getattr(args, "sub", None)) if v)
    report = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "command": command,
        "inputs": _inputs(args),
        "seed": args.seed,
        "results": results,
        "ok": bool(ok),
    }
    text = dumps(report)
    if args.json_out:
        write_atomic(args.json_out, text)
    stdout.write(text)
    return 0 if ok else 2


def main() -> None:
    sys.exit(execute())


if __name__ == "__main__":
    main()
