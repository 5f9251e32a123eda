"""Command-line front end: kernels, Green function and distance on grids as CSV,
plus the named validation suites.

Axis arguments take a single value (``0.5``), a comma list (``0.1,0.5``) or
an inclusive linspace ``a:b:count`` (``0:1.2:5``). Exit status: 0 on success,
1 when a validation suite fails, 2 on a configuration error.
"""
import argparse
import csv
import itertools
import math
import sys

import numpy as np

from . import asymptotics as asy
from .cp_kernel import h_t_integral, h_t_intertwined, h_t_spectral
from .errors import HopfHeatError
from .green import green_sphere
from .quadrature import default_spec
from .sphere_kernel import p_t_integral, p_t_spectral
from .validation import SUITES, run_suite

AUTO_SWITCH_T = 0.1


class ConfigError(Exception):
    pass


def parse_axis(text):
    """'v', 'v1,v2,...' or 'a:b:count' -> list of floats."""
    text = text.strip()
    try:
        if ":" in text:
            a, b, c = text.split(":")
            count = int(c)
            if count < 1:
                raise ConfigError(f"grid count must be >= 1 in {text!r}")
            return [float(x) for x in np.linspace(float(a), float(b), count)]
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse axis {text!r}: {exc}") from None
    if not vals:
        raise ConfigError(f"empty axis {text!r}")
    return vals


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write(rows, header, out):
    fh = open(out, "w", newline="", encoding="utf-8") if out and out != "-" else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _check_t(ts):
    if any(not t > 0 for t in ts):
        raise ConfigError("t must be positive")
    return ts


def _pick(method, t):
    return ("integral" if t < AUTO_SWITCH_T else "spectral") if method == "auto" else method


def _evals(diag):
    for key in ("terms_used", "quad_evaluations"):
        if key in diag:
            return int(diag[key])
    return ""


def cmd_kernel_sphere(a):
    ts, rs, es = _check_t(parse_axis(a.t)), parse_axis(a.r), parse_axis(a.eta)
    spec = default_spec()
    rows = []
    for t in ts:
        m = _pick(a.method, t)
        R, E = np.meshgrid(rs, es, indexing="ij")
        if m == "spectral":
            res = p_t_spectral(a.n, t, R, E, rel_target=a.rel_tol)
        else:
            res = p_t_integral(a.n, t, R.ravel(), E.ravel(), spec, rel_target=a.rel_tol)
        val = np.reshape(res.value, R.shape)
        err = np.reshape(res.error_estimate, R.shape)
        ev = _evals(res.diagnostics)
        for i, j in itertools.product(range(len(rs)), range(len(es))):
            rows.append((rs[i], es[j], t, val[i, j], err[i, j], m, ev))
    _write(rows, ["r", "eta", "t", "value", "error_estimate", "method", "terms_or_evals"], a.out)
    return 0


def cmd_kernel_cp(a):
    ts, rs, ps = _check_t(parse_axis(a.t)), parse_axis(a.r), parse_axis(a.phi)
    spec = default_spec()
    rows = []
    for t in ts:
        m = _pick(a.method, t)
        for r, phi in itertools.product(rs, ps):
            if m == "spectral":
                res = h_t_spectral(a.n, t, r, phi, rel_target=a.rel_tol)
            elif m == "intertwined":
                res = h_t_intertwined(a.n, t, r, phi, spec, rel_target=a.rel_tol)
            else:
                res = h_t_integral(a.n, t, r, phi, spec, rel_target=a.rel_tol)
            rows.append((r, phi, t, res.value, res.error_estimate, m, _evals(res.diagnostics)))
    _write(rows, ["r", "phi", "t", "value", "error_estimate", "method", "terms_or_evals"], a.out)
    return 0


def cmd_green(a):
    rows = [(r, e, green_sphere(a.n, r, e)) for r, e in itertools.product(parse_axis(a.r), parse_axis(a.eta))]
    _write(rows, ["r", "eta", "value"], a.out)
    return 0


def cmd_distance(a):
    rows = [(r, e, asy.subriemannian_distance(r, e))
            for r, e in itertools.product(parse_axis(a.r), parse_axis(a.eta))]
    _write(rows, ["r", "eta", "value"], a.out)
    return 0


def cmd_asymptotics(a):
    ts = _check_t(parse_axis(a.t))
    pts = list(itertools.product(parse_axis(a.r), parse_axis(a.fiber)))
    rows = []
    for t in ts:
        for r, f in pts:
            reg = a.regime
            if reg == "diagonal":
                v = asy.p_asym_diagonal(a.n, t, form=a.form)
            elif reg == "vertical":
                v = asy.p_asym_vertical(a.n, t, f, form=a.form)
            elif reg == "horizontal":
                v = asy.p_asym_horizontal(a.n, t, r)
            elif reg == "general":
                v = asy.p_asym_general(a.n, t, r, f)
            elif reg == "h-diagonal":
                v = asy.h_asym_diagonal(a.n, t, form=a.form)
            else:
                v = asy.h_asym_vertical(a.n, t, f, form=a.form)
            rows.append((r, f, t, v, reg))
    _write(rows, ["r", "fiber", "t", "value", "regime"], a.out)
    return 0


def cmd_validate(a):
    names = list(SUITES) if a.suite == "all" else [s.strip() for s in a.suite.split(",")]
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s) {unknown}; choose from {', '.join(SUITES)} or 'all'")
    ns = (a.n,) if a.n is not None else (1, 2)
    ok = True
    for name in names:
        res = run_suite(name, ns)
        print(res.line())
        for d in res.details:
            print("      " + d)
        ok &= res.passed
    print("ALL PASS" if ok else "SOME SUITES FAILED")
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="hopfheat", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, n_required=True):
        sp.add_argument("--n", type=int, required=n_required, default=None, help="fibration index n >= 1")
        sp.add_argument("--out", default="-", help="CSV output path (default stdout)")

    s = sub.add_parser("kernel-sphere", help="p_t(r, eta) on a grid")
    common(s)
    s.add_argument("--t", required=True)
    s.add_argument("--r", required=True)
    s.add_argument("--eta", required=True)
    s.add_argument("--method", choices=["spectral", "integral", "auto"], default="auto")
    s.add_argument("--rel-tol", type=float, default=1e-10, help="relative accuracy target")
    s.set_defaults(func=cmd_kernel_sphere)

    s = sub.add_parser("kernel-cp", help="h_t(r, phi) on a grid")
    common(s)
    s.add_argument("--t", required=True)
    s.add_argument("--r", required=True)
    s.add_argument("--phi", required=True)
    s.add_argument("--method", choices=["spectral", "integral", "intertwined", "auto"], default="auto")
    s.add_argument("--rel-tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_kernel_cp)

    s = sub.add_parser("green", help="Green function of the conformal sub-Laplacian")
    common(s)
    s.add_argument("--r", required=True)
    s.add_argument("--eta", required=True)
    s.set_defaults(func=cmd_green)

    s = sub.add_parser("distance", help="sub-Riemannian distance from the pole")
    s.add_argument("--r", required=True)
    s.add_argument("--eta", required=True)
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("asymptotics", help="small-time leading terms")
    common(s)
    s.add_argument("--regime", required=True,
                   choices=["diagonal", "vertical", "horizontal", "general", "h-diagonal", "h-vertical"])
    s.add_argument("--t", required=True)
    s.add_argument("--r", default="0")
    s.add_argument("--fiber", "--eta", "--phi", dest="fiber", default="0", help="eta (sphere) or phi (CP)")
    s.add_argument("--form", choices=["corrected", "paper"], default="corrected")
    s.set_defaults(func=cmd_asymptotics)

    s = sub.add_parser("validate", help="run validation suites")
    s.add_argument("--suite", default="all", help=f"comma list from: {', '.join(SUITES)}; or 'all'")
    s.add_argument("--n", type=int, default=None, help="restrict n-dependent suites to this n")
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", None) is not None and args.n < 1:
        print("error: --n must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (HopfHeatError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
