"""Command-line entry point.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input
error.  JSON artifacts are written atomically and carry the effective
configuration under ``"config"``.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .io import dumps, write_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _floats(text):
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}")


def _spec(args):
    from .density import StableSpec
    return StableSpec.make(args.alpha, args.dim, getattr(args, "mass", None))


def _symbol(args, dim=None):
    from .symbols import get_symbol
    return get_symbol(args.matrix, args.dim if dim is None else dim)


def _config(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def _emit(args, payload):
    payload = {"config": _config(args), **payload}
    if getattr(args, "out", None):
        write_json(args.out, payload)
    else:
        print(dumps(payload))


def _load_field(path):
    from .fields import SampledField
    return SampledField.load(path)


# --- handlers -------------------------------------------------------------------

def cmd_density_eval(args):
    from .density import eval_density_fourier
    spec = _spec(args)
    print(f"{eval_density_fourier(spec, np.array(args.x)):.{args.digits}g}")
    return EXIT_OK


def cmd_density_profile(args):
    from .density import get_profile
    prof = get_profile(_spec(args))
    write_json(args.out, {"config": _config(args), **prof.to_dict()})
    return EXIT_OK


def _sub_spec(args):
    from .subordinator import SubordinatorSpec
    return SubordinatorSpec(args.index, args.mass or 0.0)


def cmd_sub_eta(args):
    from .subordinator import eval_eta
    print(f"{eval_eta(_sub_spec(args), args.s):.{args.digits}g}")
    return EXIT_OK


def cmd_sub_check(args):
    from . import subordinator as S
    from .density import StableSpec
    sub = _sub_spec(args)
    ray_spec = StableSpec.make(2 * args.index, 1, args.mass)
    try:
        ray = S.check_fourierray(ray_spec)
    except ValueError:
        ray = None
    _emit(args, {"etabound_C": S.check_etabound(sub),
                 "growth_slope": S.check_growth(sub),
                 "fourierray_C": ray,
                 "laplace_residuals": S.laplace_residuals(sub)})
    return EXIT_OK


def cmd_kernel_eval(args):
    from .kernel import kernel_full
    spec = _spec(args)
    ev = kernel_full(spec, _symbol(args), np.array(args.x), np.array(args.xt))
    print(f"{ev.value:.{args.digits}g}")
    return EXIT_OK


def cmd_kernel_constants(args):
    from .kernel import size_constant, smoothness_constant
    spec = _spec(args)
    idx = [int(v) - 1 for v in args.entry.split(",")]
    if len(idx) not in (2, 3) or min(idx) < 0 or max(idx) > spec.dim:
        raise UsageError("--entry takes i,j or i,j,k (1-based)")
    direction = np.array(args.direction) if args.direction else \
        np.eye(spec.dim)[0]
    if len(idx) == 2:
        c = size_constant(spec, idx[0], idx[1], direction, method=args.method)
        kind = "size"
    else:
        if idx[2] >= spec.dim:
            raise UsageError("derivative index k must be spatial")
        c = smoothness_constant(spec, *idx, direction, method=args.method)
        kind = "smoothness"
    _emit(args, {kind: c})
    return EXIT_OK


def cmd_multiplier_eval(args):
    from .multiplier import compute_multiplier
    m = compute_multiplier(_spec(args), _symbol(args), np.array(args.xi))
    print(f"{m.real:.{args.digits}g} {m.imag:+.{args.digits}g}j")
    return EXIT_OK


def _geometry(args):
    from .fields import Geometry
    vals = args.geometry
    if len(vals) != 2:
        raise UsageError("--geometry takes L,N")
    return Geometry(args.dim, vals[0], int(vals[1]))


def cmd_multiplier_table(args):
    from .multiplier import tabulate
    table = tabulate(_spec(args), _symbol(args), _geometry(args))
    write_json(args.out, {"config": _config(args), **table.to_dict()})
    return EXIT_OK


def cmd_apply(args):
    from . import operator as op
    f = _load_field(args.input)
    if f.geometry.dim != args.dim:
        raise UsageError("field dimension differs from --dim")
    spec, A = _spec(args), _symbol(args)
    meta = {}
    if args.route == "multiplier":
        tf = op.apply_symbol(f, spec, A, pad=args.pad, dc=args.dc)
    else:
        res = op.apply_kernel_pv(f, spec, A, stride=args.stride)
        tf, meta = res.field, {"pv_error_max": float(np.max(res.error))}
    tf.meta = {"config": _config(args), **meta}
    tf.name = f"T[{f.name}]"
    tf.save(args.out)
    return EXIT_OK


def cmd_report_lp(args):
    from .operator import lp_ratio, p_star
    f, tf = _load_field(args.input), _load_field(args.transformed)
    out = {str(p): {"ratio": lp_ratio(tf, f, p), "p_star_minus_1":
                    p_star(p) - 1} for p in args.p}
    _emit(args, {"lp": out})
    return EXIT_OK


def cmd_report_weak(args):
    from .operator import weak_profile, weak_sup
    f, tf = _load_field(args.input), _load_field(args.transformed)
    payload = {"weak_sup": weak_sup(tf, f), "l1_norm": f.norm(1)}
    if args.lambdas:
        payload["profile"] = dict(zip(map(str, args.lambdas),
                                      weak_profile(tf, f, args.lambdas)))
    _emit(args, payload)
    return EXIT_OK


def _mc_config(args):
    from .montecarlo import PathConfig
    mode = {"br": "background_radiation", "st": "spacetime"}[args.mode]
    if (args.alpha == 1) != (mode == "background_radiation"):
        raise UsageError("mode br pairs with --alpha 1, st with --alpha 2")
    return PathConfig(mode, args.h_t, args.height, args.paths, args.seed)


def _mc_run(args, symbols):
    from .density import StableSpec
    from .montecarlo import run_paths
    f = _load_field(args.f)
    if f.geometry.dim != 1:
        raise UsageError("Monte Carlo fields must be one-dimensional")
    return f, run_paths(_mc_config(args), StableSpec(args.alpha, 1),
                        symbols, f)


def cmd_mc_run(args):
    A = _symbol(args, 1)
    _, ens = _mc_run(args, [A])
    _emit(args, {"escaped": ens.escaped, "box": ens.box,
                 "runtime_s": ens.runtime, "paths": ens.to_records(0)})
    return EXIT_OK


def cmd_mc_duality(args):
    from .montecarlo import check_duality, check_norm_preservation
    A = _symbol(args, 1)
    f, ens = _mc_run(args, [A])
    g = _load_field(args.g)
    dual = check_duality(ens, f, g, A)
    norm = check_norm_preservation(ens, f, args.p)
    _emit(args, {"duality": dual.to_dict(), "norm": norm.to_dict(),
                 "escaped": ens.escaped, "runtime_s": ens.runtime,
                 "passed": dual.within(3) and norm.within(3)})
    return EXIT_OK if dual.within(3) and norm.within(3) else EXIT_FAIL


def cmd_mc_project(args):
    from .montecarlo import project
    A = _symbol(args, 1)
    _, ens = _mc_run(args, [A])
    pr = project(ens, args.bins)
    _emit(args, {"centers": pr.centers, "mean": pr.mean,
                 "std_error": pr.std_error, "counts": pr.counts,
                 "empty_bins": pr.empty_bins})
    return EXIT_OK


def _apply_tolerances(pairs):
    """Set tolerance overrides; returns the previous values."""
    from . import verify
    updates = {}
    for item in pairs or ():
        name, _, value = item.partition("=")
        key = name.strip().upper()
        if not hasattr(verify, key) or not key.endswith(("TOL", "SLACK",
                                                          "BAND")):
            raise UsageError(f"unknown tolerance {name!r}")
        updates[key] = float(value)
    saved = {key: getattr(verify, key) for key in updates}
    for key, value in updates.items():
        setattr(verify, key, value)
    return saved


def cmd_verify(args):
    from . import verify as V
    saved = _apply_tolerances(args.tolerance)
    try:
        return _run_verify(args, V)
    finally:
        for key, value in saved.items():
            setattr(V, key, value)


def _run_verify(args, V):
    spec, A = _spec(args), _symbol(args)
    suites = {"cz": lambda: [V.suite_cz_bounds(spec, A)],
              "l2": lambda: [V.suite_l2(spec, A)],
              "strong_weak": lambda: [V.suite_strong_weak(spec, A)],
              "corollaries": lambda: [V.suite_corollaries(spec)],
              "all": lambda: V.verify_all(spec, A, include_cz=not args.no_cz)}
    reports = suites[args.suite]()
    out = V.reports_to_dict(reports)
    _emit(args, out)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.suite} ({r.runtime:.1f}s)", file=sys.stderr)
    return EXIT_OK if out["passed"] else EXIT_FAIL


# --- parser ----------------------------------------------------------------------------

def _add_spec(p, mass=True):
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--dim", type=int, default=1)
    if mass:
        p.add_argument("--mass", type=float, default=None,
                       help="relativistic mass (omit for the pure law)")


def _add_common(p):
    p.add_argument("--digits", type=int, default=7)


def build_parser():
    parser = _Parser(prog="stablecz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--threads", type=int, default=None)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    d = sub.add_parser("density").add_subparsers(dest="action",
                                                 parser_class=_Parser)
    p = d.add_parser("eval")
    _add_spec(p)
    _add_common(p)
    p.add_argument("--x", type=_floats, required=True)
    p.set_defaults(func=cmd_density_eval)
    p = d.add_parser("profile")
    _add_spec(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_density_profile)

    s = sub.add_parser("subordinator").add_subparsers(dest="action",
                                                      parser_class=_Parser)
    p = s.add_parser("eta")
    p.add_argument("--index", type=float, required=True)
    p.add_argument("--mass", type=float, default=None)
    p.add_argument("--s", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_sub_eta)
    p = s.add_parser("check")
    p.add_argument("--index", type=float, required=True)
    p.add_argument("--mass", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sub_check)

    k = sub.add_parser("kernel").add_subparsers(dest="action",
                                                parser_class=_Parser)
    p = k.add_parser("eval")
    _add_spec(p, mass=False)
    _add_common(p)
    p.add_argument("--matrix", required=True,
                   help="catalog name (riesz_1, identity, ...) or JSON file")
    p.add_argument("--x", type=_floats, required=True)
    p.add_argument("--xt", type=_floats, required=True)
    p.set_defaults(func=cmd_kernel_eval)
    p = k.add_parser("constants")
    _add_spec(p, mass=False)
    p.add_argument("--entry", required=True, help="i,j or i,j,k (1-based)")
    p.add_argument("--direction", type=_floats, default=None)
    p.add_argument("--method", choices=("semigroup", "general"), default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel_constants)

    m = sub.add_parser("multiplier").add_subparsers(dest="action",
                                                    parser_class=_Parser)
    p = m.add_parser("eval")
    _add_spec(p)
    _add_common(p)
    p.add_argument("--matrix", required=True)
    p.add_argument("--xi", type=_floats, required=True)
    p.set_defaults(func=cmd_multiplier_eval)
    p = m.add_parser("table")
    _add_spec(p)
    p.add_argument("--matrix", required=True)
    p.add_argument("--geometry", type=_floats, required=True, help="L,N")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_multiplier_table)

    p = sub.add_parser("apply")
    _add_spec(p)
    p.add_argument("--route", choices=("multiplier", "pv"),
                   default="multiplier")
    p.add_argument("--matrix", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pad", type=int, default=1)
    p.add_argument("--dc", choices=("zero", "local"), default="zero")
    p.add_argument("--stride", type=int, default=1)
    p.set_defaults(func=cmd_apply)

    r = sub.add_parser("report").add_subparsers(dest="action",
                                                parser_class=_Parser)
    p = r.add_parser("lp")
    p.add_argument("--p", type=_floats, required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--tf", dest="transformed", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report_lp)
    p = r.add_parser("weak")
    p.add_argument("--lambdas", type=_floats, default=None)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--tf", dest="transformed", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report_weak)

    mc = sub.add_parser("mc").add_subparsers(dest="action",
                                             parser_class=_Parser)
    for name, func in (("run", cmd_mc_run), ("duality", cmd_mc_duality),
                       ("project", cmd_mc_project)):
        p = mc.add_parser(name)
        p.add_argument("--mode", choices=("br", "st"), default="br")
        p.add_argument("--alpha", type=float, choices=(1.0, 2.0), default=1.0)
        p.add_argument("--paths", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--height", type=float, default=4.0,
                       help="start height (br) or horizon T (st)")
        p.add_argument("--h-t", dest="h_t", type=float, default=None)
        p.add_argument("--matrix", required=True)
        p.add_argument("--f", required=True)
        p.add_argument("--out")
        if name == "duality":
            p.add_argument("--g", required=True)
            p.add_argument("--p", type=float, default=2.0)
        if name == "project":
            p.add_argument("--bins", type=int, required=True)
        p.set_defaults(func=func)

    v = sub.add_parser("verify").add_subparsers(dest="suite",
                                                parser_class=_Parser)
    for name in ("all", "cz", "l2", "strong_weak", "corollaries"):
        p = v.add_parser(name)
        _add_spec(p)
        p.add_argument("--matrix", default="identity")
        p.add_argument("--out")
        p.add_argument("--tolerance", action="append", metavar="NAME=VALUE",
                       help="override a suite tolerance, e.g. "
                            "stability_tol=0.02")
        p.add_argument("--no-cz", action="store_true")
        p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not hasattr(args, "func"):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if args.threads:
        import numba
        numba.set_num_threads(args.threads)
    try:
        return args.func(args)
    except (UsageError, ValueError, FileNotFoundError, KeyError,
            json.JSONDecodeError) as exc:
        print(f"stablecz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
