"""Command-line front end.

Every subcommand takes a model file and prints JSON (or CSV with
``--format csv`` where a table makes sense).  Exit codes: 0 ok, 2 a check
failed, 3 invalid input or numerical breakdown, 64 usage error, 66 file
could not be read.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import errors, gluing, harmonic, io, model, verify
from .config import load_tolerances
from .kernel import Kernel, conjugate_point, curve_L, curve_M, segment_S

EXIT_OK, EXIT_CHECK, EXIT_ERROR, EXIT_USAGE, EXIT_NOFILE = 0, 2, 3, 64, 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _direction(text):
    try:
        dx, dy = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected dx,dy") from None
    if dx == 0 and dy == 0:
        raise argparse.ArgumentTypeError("direction must be nonzero")
    return dx, dy


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qharmonic", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("model", help="model JSON file")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    common.add_argument("--threads", type=int, default=1,
                        help="accepted for grid extraction; results do not depend on it")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("validate", parents=[common], help="check the weights")
    sub.add_parser("t0", parents=[common], help="minimum of the Laplace transform")

    def with_t(name, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.add_argument("--t", type=float, required=True)
        return p

    with_t("classify", "regime of the t-Martin boundary")
    with_t("branch-points", "roots of both discriminants")
    p = with_t("curve", "sample the curve M or L")
    p.add_argument("--which", choices=("M", "L"), default="M")
    p.add_argument("--samples", type=int, default=64)
    with_t("segment", "endpoints of the segment of minimal functions")
    p = with_t("gluing", "periods and the conformal gluing function")
    p.add_argument("--check", action="store_true", help="also compute the gluing residual")
    p.add_argument("--samples", type=int, default=64)
    for name, help in (("harmonic", "values f(i, j) of a minimal harmonic function"),
                       ("verify", "run every numerical check")):
        p = with_t(name, help)
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--p", type=float)
        g.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--grid", type=int, default=10)
        if name == "verify":
            p.add_argument("--samples", type=int, default=64)
    p = with_t("closed-form", "closed form for walks with axis steps only")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--grid", type=int, default=10)
    p = with_t("tilt", "exponentially tilted weights on the level set phi = t")
    p.add_argument("--dir", type=_direction, default=(1.0, 0.0))
    return parser


def _write(text, args):
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit(obj, args, csv_text=None):
    if args.format == "csv":
        if csv_text is None:
            raise UsageError(f"--format csv is not available for {args.command}")
        _write(csv_text, args)
    else:
        _write(io.dumps(obj), args)


def _check_grid(args):
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")


def run(args, tol) -> int:
    s = io.load_model(args.model, tol)
    cmd = args.command
    if cmd == "validate":
        _emit({"valid": True, "weights": io.layout_from_weights(s.weights),
               "drift": list(model.drift(s))}, args)
        return EXIT_OK
    crit = model.solve_t0(s, tol)
    if cmd == "t0":
        _emit({"t0": crit.t0, "a_star": list(crit.a_star)}, args)
        return EXIT_OK
    t = args.t
    if not t > 0:
        raise UsageError("--t must be positive")
    if cmd == "classify":
        _emit({"t": t, "t0": crit.t0, "regime": model.classify(s, t, tol.classify, crit).value}, args)
        return EXIT_OK
    if cmd == "tilt":
        a = model.level_point(s, t, args.dir, tol, crit)
        ts = model.tilt(s, a, t, tol)
        _emit({"t": t, "a": list(a), "weights": io.layout_from_weights(ts.weights),
               "drift": list(model.drift(ts))}, args)
        return EXIT_OK
    if model.classify(s, t, tol.classify, crit) is model.Regime.EMPTY:
        raise errors.RegimeError(f"t = {t} is below t0 = {crit.t0}")
    k = Kernel(s, t)
    if cmd == "branch-points":
        bp = k.branch
        rows = [(f"x{i + 1}", bp.x[i]) for i in range(4)] + [(f"y{i + 1}", bp.y[i]) for i in range(4)]
        _emit({"t": t, "x": list(bp.x), "y": list(bp.y)}, args,
              io.csv_text(["name", "value"], rows))
        return EXIT_OK
    if cmd == "curve":
        if args.samples < 8:
            raise UsageError("--samples must be at least 8")
        cs = curve_M(k, args.samples) if args.which == "M" else curve_L(k, args.samples)
        _emit({"which": args.which, "param": cs.params,
               "first": [[z.real, z.imag] for z in cs.first],
               "second": [[z.real, z.imag] for z in cs.second]}, args, io.curve_csv(cs))
        return EXIT_OK
    if cmd == "segment":
        lo, hi = segment_S(k)
        _emit({"t": t, "x2": lo, "X_y2": hi, "p_prime": [conjugate_point(k, lo), conjugate_point(k, hi)]},
              args)
        return EXIT_OK
    if cmd == "gluing":
        gf = gluing.build(k, tol=tol)
        pt = gf.periods
        out = {"t": t, "mode": gf.mode, "x0": gf.x0,
               "omega1": None if pt.omega1 is None else pt.omega1.imag,
               "omega2": pt.omega2, "omega3": pt.omega3, "omega2_limit": pt.omega2_limit,
               "theta": gf.theta, "u_x0": gf.u0.real, "u_0": gf.u_zero.real}
        code = EXIT_OK
        if args.check:
            res = gluing.gluing_residual(gf, args.samples)
            out["gluing_residual"] = res
            out["passed"] = res <= tol.gluing
            code = EXIT_OK if out["passed"] else EXIT_CHECK
        _emit(out, args)
        return code
    if cmd == "closed-form":
        _check_grid(args)
        grid = harmonic.closed_form_grid(s, t, args.p, args.grid)
        _emit(io.grid_json(grid), args, io.grid_csv(grid))
        return EXIT_OK
    if cmd == "harmonic":
        _check_grid(args)
        fam = harmonic.build_family(k, p=args.p, lam=args.lam, tol=tol)
        grid = harmonic.coeffs_grid(fam, args.grid, threads=args.threads)
        _emit(io.grid_json(grid), args, io.grid_csv(grid))
        return EXIT_OK
    if cmd == "verify":
        _check_grid(args)
        rep = verify.full_report(s, t, p=args.p, lam=args.lam, N=args.grid, tol=tol,
                                 samples=args.samples)
        rows = [(c.name, c.value if not isinstance(c.value, float) or math.isfinite(c.value) else "nan",
                 c.tolerance if c.tolerance is not None else "", c.passed) for c in rep.checks]
        _emit(rep.to_dict(), args, io.csv_text(["check", "value", "tolerance", "passed"], rows))
        return EXIT_OK if rep.passed else EXIT_CHECK
    raise UsageError(f"unknown command {cmd}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        tol = load_tolerances()
    except ValueError as e:
        print(f"qharmonic: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with np.errstate(all="ignore"):
            return run(args, tol)
    except UsageError as e:
        print(f"qharmonic: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"qharmonic: {e}", file=sys.stderr)
        return EXIT_NOFILE
    except (errors.QHarmonicError, ValueError, ArithmeticError) as e:
        print(f"qharmonic: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
