"""Experiment runner: subcommands over the library with CSV output.

Exit codes: 0 success, 2 precondition error, 3 resource/budget error,
4 numerical error, 64 usage error.  Config files are flat `key = value`
text with [section] headers; complex numbers are written `re,im`.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys

import numpy as np

from . import __version__, counting, distortion, lamination, lyapunov, parabolic
from .errors import BudgetError, InnerlabError, NumericalError, PreconditionError
from .innerfn import InnerModel
from .parabolic import HalfPlaneInner
from .preimage import enumerate_ball

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_BUDGET = 3
EXIT_NUMERICAL = 4
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _parse_complex(text: str) -> complex:
    try:
        re_part, im_part = text.split(",")
        return complex(float(re_part), float(im_part))
    except ValueError as exc:
        raise PreconditionError(f"bad complex literal {text!r}; use re,im") from exc


def load_model(path: str):
    """An InnerModel or HalfPlaneInner from its text serialization (the
    presence of a `beta=` line selects the half-plane form)."""
    with open(path) as fh:
        text = fh.read()
    keys = {line.split("=", 1)[0].strip() for line in text.splitlines()
            if "=" in line and not line.lstrip().startswith("#")}
    if "beta" in keys:
        return HalfPlaneInner.from_text(text)
    return InnerModel.from_text(text)


def _config_defaults(path: str) -> dict:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_string("[top]\n" + fh.read())
    out = {}
    for section in cp.sections():
        for key, val in cp.items(section):
            out[key.replace("-", "_")] = val
    return out


def _header(args, extra=()):
    lines = [f"innerlab {__version__}"]
    for key, val in sorted(vars(args).items()):
        if key in ("func", "config") or val is None:
            continue
        lines.append(f"config {key} = {val}")
    lines.extend(extra)
    return lines


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    return int(os.environ.get("INNERLAB_THREADS", "1"))


def _grid(upto: float, step: float = 1.0):
    out = list(np.arange(step, upto, step))
    if not out or out[-1] < upto:
        out.append(upto)
    return out


def cmd_count(args):
    F = load_model(args.model)
    z = _parse_complex(args.z)
    chi = args.chi if args.chi is not None else lyapunov.chi(F)
    tree = enumerate_ball(F, z, args.R, node_budget=args.node_budget)
    profile = counting.CountingProfile.from_tree(tree, chi)
    rows = counting.counting_report(profile, _grid(args.R, args.R_step), chi)
    counting.write_counting_csv(rows, args.out, _header(args, (
        f"chi = {chi:.17g}", f"tree_nodes = {tree.size()}",
        f"threads = {_threads(args)}")))
    return EXIT_OK


def cmd_lyapunov(args):
    F = load_model(args.model)
    methods = (["quadrature", "jensen", "birkhoff"] if args.method == "all"
               else [args.method])
    rows = []
    for m in methods:
        if m == "quadrature":
            est = lyapunov.chi_quadrature(F, args.tol)
        elif m == "jensen":
            est = lyapunov.chi_jensen_oracle(F)
        else:
            est = lyapunov.chi_birkhoff(F, args.angle, args.n, seed=args.seed)
        rows.append(est)
    with open(args.out, "w") as fh:
        for line in _header(args):
            fh.write(f"# {line}\n")
        fh.write("method,value,error\n")
        for est in rows:
            fh.write(f"{est.method},{est.value:.17g},{est.error:.17g}\n")
    return EXIT_OK


def cmd_distortion_scan(args):
    if args.truncation_K:
        family = [InnerModel.from_zeros(*[1.0 - 2.0 ** (-k) for k in range(1, K + 1)])
                  for K in args.truncation_K]
    else:
        family = [load_model(p) for p in args.model]
    rows = distortion.angular_derivative_criterion_scan(
        family, args.zeta, args.r_max, tol=args.tol)
    distortion.write_scan_csv(rows, args.out, _header(args))
    return EXIT_OK


def cmd_orbit(args):
    F = load_model(args.model)
    if args.interior:
        orbit = lamination.sample_interior_orbit(F, _parse_complex(args.z),
                                                 args.n, seed=args.seed)
    else:
        sampler = lamination.SolenoidSampler(F, seed=args.seed)
        orbit = sampler.orbit(args.n)
    pts = orbit.coordinates(args.n)
    with open(args.out, "w") as fh:
        for line in _header(args):
            fh.write(f"# {line}\n")
        fh.write("n,re,im\n")
        for n, p in enumerate(pts):
            fh.write(f"{n},{p.real:.17g},{p.imag:.17g}\n")
    return EXIT_OK


def cmd_xi_mass(args):
    F = load_model(args.model)
    r1, r2, t1, t2 = (float(v) for v in args.box.split(","))
    box = lamination.AnnularBox(r1, r2, t1, t2)
    with open(args.out, "w") as fh:
        for line in _header(args):
            fh.write(f"# {line}\n")
        fh.write("depth,mass,error\n")
        for depth in range(args.max_depth + 1):
            est = lamination.xi_box_mass(F, box, depth, grid=(args.grid, args.grid))
            fh.write(f"{depth},{est.value:.17g},{est.error:.17g}\n")
    return EXIT_OK


def cmd_total_mass(args):
    F = load_model(args.model)
    res = lamination.total_mass_check(F, args.r0, samples=args.samples,
                                      seed=args.seed)
    with open(args.out, "w") as fh:
        for line in _header(args):
            fh.write(f"# {line}\n")
        fh.write("r0,mass,stderr,chi_ref,samples\n")
        fh.write(f"{res.r0:.17g},{res.mass:.17g},{res.stderr:.17g},"
                 f"{res.chi_ref:.17g},{res.samples}\n")
    return EXIT_OK


def cmd_shadow_sim(args):
    if args.bad_times == "none":
        bad = []
    elif args.bad_times == "pow2":
        bad = lamination.bad_times_pow2(args.T)
    elif args.bad_times == "all":
        bad = [(0.0, args.T)]
    else:
        bad = [tuple(float(v) for v in pair.split(":"))
               for pair in args.bad_times.split(",")]
    run = lamination.shadowing_simulation(bad, args.T, adversary=args.adversary,
                                          start=_parse_complex(args.start),
                                          step=args.step)
    keep = max(1, len(run.times) // args.curve_points)
    with open(args.out, "w") as fh:
        for line in _header(args, (f"zeta_estimate = {run.zeta:.17g}",)):
            fh.write(f"# {line}\n")
        fh.write("t,avg_min_distance\n")
        for t, v in zip(run.times[::keep], run.avg_curve[::keep]):
            fh.write(f"{t:.17g},{v:.17g}\n")
    return EXIT_OK


def cmd_parabolic_count(args):
    F = load_model(args.model)
    if not isinstance(F, HalfPlaneInner):
        raise PreconditionError("parabolic-count needs a half-plane model "
                                "(beta= serialization)")
    z = _parse_complex(args.z)
    lo, hi = (float(v) for v in args.I.split(","))
    chi = parabolic.chi_ell(F)
    profile = parabolic.enumerate_strip(F, z, (lo, hi), args.R,
                                        node_budget=args.node_budget)
    rows = parabolic.strip_counting_report(profile, chi, _grid(args.R, args.R_step))
    parabolic.write_strip_csv(rows, args.out, _header(args, (
        f"chi_ell = {chi:.17g}",
        f"explored = {profile.explored}",
        f"target carries no Im(z) factor; multiply by Im(z) = {z.imag:.17g} "
        "for the empirically sharp constant",)))
    if args.dump_points:
        parabolic.write_strip_points_csv(profile, args.dump_points)
    return EXIT_OK


def cmd_accept(args):
    from . import acceptance
    results = acceptance.run_all(verbose=True, fast=args.fast)
    return EXIT_OK if all(r.passed for r in results) else EXIT_PRECONDITION


def build_parser() -> _Parser:
    p = _Parser(prog="innerlab", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument("--model", required=True, help="model file path")
        sp.add_argument("--out", required=True, help="output CSV path")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=None,
                        help="worker hint; results are identical for any value "
                             "(INNERLAB_THREADS is the fallback)")
        sp.add_argument("--config", default=None,
                        help="key = value defaults file ([section] headers allowed)")

    sp = sub.add_parser("count", help="preimage counting N(z,R) report",
                        epilog="CSV columns: R, count, count_over_eR, cesaro, "
                               "target, ratio (= count_over_eR/target); "
                               "cesaro is the exact (1/R) int N e^-S dS.")
    common(sp)
    sp.add_argument("--z", required=True, help="base point re,im")
    sp.add_argument("--R", type=float, required=True)
    sp.add_argument("--R-step", type=float, default=1.0)
    sp.add_argument("--chi", type=float, default=None,
                    help="override the Jensen-oracle Lyapunov exponent")
    sp.add_argument("--node-budget", type=int, default=5 * 10 ** 7)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("cesaro", help="alias of count (the report carries "
                                       "the exact Cesaro column)",
                        epilog="CSV columns as for count.")
    common(sp)
    sp.add_argument("--z", required=True)
    sp.add_argument("--R", type=float, required=True)
    sp.add_argument("--R-step", type=float, default=1.0)
    sp.add_argument("--chi", type=float, default=None)
    sp.add_argument("--node-budget", type=int, default=5 * 10 ** 7)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("lyapunov", help="chi by quadrature/jensen/birkhoff",
                        epilog="CSV columns: method, value, error (abs "
                               "estimate; one std err for birkhoff).")
    common(sp)
    sp.add_argument("--method", choices=["quadrature", "jensen", "birkhoff", "all"],
                    default="all")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--n", type=int, default=10 ** 5, help="birkhoff orbit length")
    sp.add_argument("--angle", type=float, default=0.7, help="birkhoff start angle")
    sp.set_defaults(func=cmd_lyapunov)

    sp = sub.add_parser("distortion-scan",
                        help="radial distortion integrals + angular derivative",
                        epilog="CSV columns: model_id, r_max, integral_mu, "
                               "integral_eta, integral_delta, integral_alpha, "
                               "log_angular_derivative.")
    sp.add_argument("--model", action="append", default=[],
                    help="model file (repeatable)")
    sp.add_argument("--truncation-K", type=int, action="append", default=[],
                    help="use the 1 - 2^-k truncation family instead (repeatable)")
    sp.add_argument("--zeta", type=float, default=0.0, help="boundary angle")
    sp.add_argument("--r-max", type=float, action="append", default=None)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--config", default=None)
    sp.set_defaults(func=cmd_distortion_scan)

    sp = sub.add_parser("orbit", help="sample a backward orbit to CSV",
                        epilog="CSV columns: n, re, im (z_{-n} coordinates).")
    common(sp)
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--interior", action="store_true",
                    help="interior orbit from --z instead of a solenoid orbit")
    sp.add_argument("--z", default="0.3,0")
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("xi-mass", help="natural-measure box masses by depth",
                        epilog="CSV columns: depth, mass, error.")
    common(sp)
    sp.add_argument("--box", required=True, help="r_lo,r_hi,theta_lo,theta_hi")
    sp.add_argument("--max-depth", type=int, default=6)
    sp.add_argument("--grid", type=int, default=24)
    sp.set_defaults(func=cmd_xi_mass)

    sp = sub.add_parser("total-mass", help="fundamental annulus mass vs chi",
                        epilog="CSV columns: r0, mass, stderr, chi_ref, samples.")
    common(sp)
    sp.add_argument("--r0", type=float, default=0.99)
    sp.add_argument("--samples", type=int, default=10 ** 6)
    sp.set_defaults(func=cmd_total_mass)

    sp = sub.add_parser("shadow-sim", help="good/bad-times shadowing run",
                        epilog="CSV columns: t, avg_min_distance; the landing "
                               "estimate is in the header.")
    sp.add_argument("--T", type=float, default=10 ** 4)
    sp.add_argument("--bad-times", default="pow2",
                    help="none | pow2 | all | a:b,c:d interval list")
    sp.add_argument("--adversary", choices=sorted(lamination.ADVERSARIES),
                    default="up_right")
    sp.add_argument("--start", default="2,1")
    sp.add_argument("--step", type=float, default=0.02)
    sp.add_argument("--curve-points", type=int, default=500)
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--config", default=None)
    sp.set_defaults(func=cmd_shadow_sim)

    sp = sub.add_parser("parabolic-count", help="strip counting N_I(z,R)",
                        epilog="CSV columns as for count with target = |I|/chi_ell; "
                               "--dump-points adds generation, re, im, Im_height.")
    common(sp)
    sp.add_argument("--z", required=True)
    sp.add_argument("--I", required=True,
                    help="x_lo,x_hi (write --I=-1,1 for negative endpoints)")
    sp.add_argument("--R", type=float, required=True)
    sp.add_argument("--R-step", type=float, default=1.0)
    sp.add_argument("--node-budget", type=int, default=5 * 10 ** 7)
    sp.add_argument("--dump-points", default=None,
                    help="also dump counted points with Im_height column")
    sp.set_defaults(func=cmd_parabolic_count)

    sp = sub.add_parser("accept", help="run the acceptance suite")
    sp.add_argument("--fast", action="store_true",
                    help="reduced sample sizes (smoke mode)")
    sp.set_defaults(func=cmd_accept)
    return p


def _apply_config(args, argv):
    """Fill in config-file values for options not given on the command line."""
    if not getattr(args, "config", None):
        return
    explicit = set()
    for token in argv:
        if token.startswith("--"):
            explicit.add(token[2:].split("=", 1)[0].replace("-", "_").lower())
    attr_by_lower = {name.lower(): name for name in vars(args)}
    for lowered, val in _config_defaults(args.config).items():
        key = attr_by_lower.get(lowered)
        if key is None or lowered in explicit:
            continue
        current = getattr(args, key)
        cast = type(current) if current is not None and not isinstance(current, bool) else str
        if isinstance(current, bool):
            setattr(args, key, val.strip().lower() in ("1", "true", "yes", "on"))
        else:
            setattr(args, key, cast(val))


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        _apply_config(args, argv)
        if getattr(args, "r_max", None) is None and args.command == "distortion-scan":
            args.r_max = [1.0 - 1e-4]
        return args.func(args)
    except BudgetError as exc:
        print(f"innerlab: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except NumericalError as exc:
        print(f"innerlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (PreconditionError, InnerlabError, FileNotFoundError) as exc:
        print(f"innerlab: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
