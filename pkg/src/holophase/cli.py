"""Command-line front end.

Exit codes: 0 success, 1 self-test failure, 2 usage or configuration error,
3 numerical failure (gap closure, non-convergence, ...).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analysis, model, selftest, uhlmann
from .errors import EmptyDome, HolophaseError, InvalidConfig
from .serialization import phase_token, render_json, render_rows, result_token, write_text

EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _even_int(text: str) -> int:
    value = int(text)
    if value < 2 or value % 2:
        raise argparse.ArgumentTypeError(f"expected a positive even integer, got {text}")
    return value


def _common(parser: argparse.ArgumentParser, *, steps: bool = True) -> None:
    if steps:
        parser.add_argument("--steps", type=_positive_int, default=uhlmann.DEFAULT_STEPS,
                            help="path segments N (default %(default)s)")
        parser.add_argument("--quick", action="store_true",
                            help=f"use N = {uhlmann.QUICK_STEPS} unless --steps is given")
    parser.add_argument("--out", default=None, help="output file (default stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)


def _t_axis(parser: argparse.ArgumentParser, tmin: float, tmax: float, tnum: int) -> None:
    parser.add_argument("--Tmin", type=float, default=tmin)
    parser.add_argument("--Tmax", type=float, default=tmax)
    parser.add_argument("--Tnum", type=_positive_int, default=tnum)
    parser.add_argument("--log", action="store_true", help="log-spaced temperatures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holophase", description="Uhlmann and Wilczek-Zee phases of a four-level model."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simple-sweep", help="equator loop: theta_U against T")
    _t_axis(p, 0.1, 10.0, 200)
    p.add_argument("--R", type=float, default=1.0)
    _common(p)

    p = sub.add_parser("tb4d", help="4D tight-binding kx loop: I(m, T) and theta_U")
    p.add_argument("--m", type=float, default=-3.0)
    p.add_argument("--T", type=float, default=None, help="single temperature (else a sweep)")
    _t_axis(p, 0.02, 2.0, 100)
    p.add_argument("--quad", type=_even_int, default=None, help="fixed Simpson intervals (default adaptive)")
    _common(p, steps=False)

    p = sub.add_parser("diagram", help="(m, T) phase diagram of the tb4d model")
    p.add_argument("--mmin", type=float, default=-5.0)
    p.add_argument("--mmax", type=float, default=-1.0)
    p.add_argument("--mnum", type=_positive_int, default=81)
    _t_axis(p, 0.02, 1.2, 60)
    p.add_argument("--quad", type=_even_int, default=None)
    p.add_argument("--fit", default=None, metavar="PATH", help="also write the dome fit as JSON")
    _common(p, steps=False)

    for name, help_text in (
        ("compare", "theta_U(T -> 0) against theta_WZ"),
        ("holonomy", "Uhlmann holonomy matrix and phase at one temperature"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", choices=["equator", "latitude", "tb4d", "explicit"], default="equator")
        p.add_argument("--m", type=float, default=-3.0)
        p.add_argument("--R", type=float, default=1.0)
        p.add_argument("--theta", type=float, default=math.pi / 4, help="polar angle for --model latitude")
        p.add_argument("--loop-file", default=None, help="explicit loop, five reals per line")
        if name == "holonomy":
            p.add_argument("--T", type=float, required=True)
        else:
            p.add_argument("--ladder", type=float, nargs="+", default=None,
                           help="descending temperatures (default R x 1e-1 .. 1e-3)")
        _common(p)

    p = sub.add_parser("selftest", help="run the invariant suites")
    p.add_argument("--quick", action="store_true", help="halved N and relaxed 1e-4 tolerances")
    return parser


def _steps(args) -> int:
    if args.quick and args.steps == uhlmann.DEFAULT_STEPS:
        return uhlmann.QUICK_STEPS
    return args.steps


def _temperatures(args) -> np.ndarray:
    if not 0.0 < args.Tmin < args.Tmax:
        raise InvalidConfig(f"need 0 < Tmin < Tmax, got Tmin={args.Tmin}, Tmax={args.Tmax}")
    if args.Tnum < 2:
        raise InvalidConfig("--Tnum must be at least 2")
    if args.log:
        return np.geomspace(args.Tmin, args.Tmax, args.Tnum)
    return np.linspace(args.Tmin, args.Tmax, args.Tnum)


def _loop(args, steps: int) -> model.LoopPath:
    if args.model == "explicit":
        if not args.loop_file:
            raise InvalidConfig("--model explicit needs --loop-file")
        try:
            return model.load_loop(args.loop_file)
        except HolophaseError:
            raise
        except (OSError, ValueError) as exc:
            raise InvalidConfig(f"cannot read {args.loop_file}: {exc}") from exc
    if args.model == "equator":
        return model.make_loop("equator", steps, R=args.R)
    if args.model == "latitude":
        return model.make_loop("latitude", steps, R=args.R, theta=args.theta)
    return model.make_loop("tb4d-kx", steps, m=args.m)


def cmd_simple_sweep(args) -> int:
    if not args.R > 0.0:
        raise InvalidConfig("--R must be positive")
    temps = _temperatures(args)
    steps = _steps(args)
    loop = model.make_loop("equator", steps, R=args.R)

    def row(t: float):
        t = float(t)
        num = uhlmann.phase(loop, t)
        ana = uhlmann.equator_phase_analytic(t, args.R)
        return [t, result_token(num), result_token(ana), num.magnitude, num.status]

    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        rows = list(pool.map(row, temps))
    comment = (
        f"equator loop, R = {args.R:.12g}, N = {steps}; T in the energy unit of R; angles in radians"
    )
    header = ["T", "theta_U_numeric", "theta_U_analytic", "trace_magnitude", "status"]
    write_text(render_rows(args.format, header, rows, comment), args.out)
    return EXIT_OK


def cmd_tb4d(args) -> int:
    if args.T is not None:
        if not args.T > 0.0:
            raise InvalidConfig("--T must be positive")
        temps = np.array([args.T])
    else:
        temps = _temperatures(args)
    rows = []
    for t in temps:
        t = float(t)
        i_val = uhlmann.tb4d_I(args.m, t, args.quad)
        res = uhlmann.phase_from_trace(math.cos(i_val))
        rows.append([float(args.m), t, i_val, result_token(res), res.status])
    comment = "tb4d kx loop; T in units of R0 = 1; angles in radians"
    write_text(render_rows(args.format, ["m", "T", "I", "theta_U", "status"], rows, comment), args.out)
    return EXIT_OK


def cmd_diagram(args) -> int:
    grid = analysis.phase_diagram(
        (args.mmin, args.mmax), args.mnum, (args.Tmin, args.Tmax), args.Tnum,
        threads=args.threads, T_log=args.log, quad_points=args.quad,
    )
    rows = []
    for j, m in enumerate(grid.m):
        for k, t in enumerate(grid.T):
            token = phase_token(grid.phase[j, k], grid.status[j, k])
            rows.append([float(m), float(t), token, float(grid.magnitude[j, k])])
    comment = "tb4d Uhlmann phase diagram; T in units of R0 = 1; angles in radians"
    write_text(render_rows(args.format, ["m", "T", "theta_U", "magnitude"], rows, comment), args.out)
    if args.fit:
        # Only configuration errors make this command fail; a missing dome is data.
        try:
            fit = analysis.dome_fit(grid).to_dict()
        except EmptyDome as exc:
            print(f"holophase: warning: {exc}", file=sys.stderr)
            fit = {"A": None, "p": None, "residual": None, "error": exc.code}
        write_text(render_json(fit), args.fit)
    return EXIT_OK


def cmd_compare(args) -> int:
    loop = _loop(args, _steps(args))
    report = analysis.correspondence(loop, args.ladder)
    write_text(render_json(report.to_dict()), args.out)
    return EXIT_OK


def cmd_holonomy(args) -> int:
    loop = _loop(args, _steps(args))
    hol = uhlmann.holonomy(loop, args.T)
    res = uhlmann.phase(loop, args.T, hol)
    out = {"holonomy": hol.to_dict(), "T": args.T, "theta_U": result_token(res), "magnitude": res.magnitude}
    write_text(render_json(out), args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = selftest.run(quick=args.quick)
    sys.stdout.write(selftest.format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST


COMMANDS = {
    "simple-sweep": cmd_simple_sweep,
    "tb4d": cmd_tb4d,
    "diagram": cmd_diagram,
    "compare": cmd_compare,
    "holonomy": cmd_holonomy,
    "selftest": cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InvalidConfig as exc:
        print(f"holophase: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HolophaseError as exc:
        print(f"holophase: numerical failure [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"holophase: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
