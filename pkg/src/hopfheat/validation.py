"""Named validation suites shared by the CLI and the acceptance tests.

Each suite returns a SuiteResult with a single measured figure of merit,
the tolerance it is held to, and free-form detail rows for the report.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from . import asymptotics as asy
from .cp_kernel import cp_measure_density, h_t_integral, h_t_intertwined, h_t_spectral
from .green import green_sphere, green_transform_check
from .orthopoly import gegenbauer_c_all, jacobi_norm_sq, jacobi_p_all
from .pde import eigen_check, evolve, make_grid
from .sphere_kernel import (cyl_measure_density, intertwine_check, p_t_integral, p_t_spectral,
                            sphere_volume)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    elapsed: float = 0.0
    details: list = field(default_factory=list)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<16} measured={self.measured:.3e}  tol={self.tolerance:.1e}  ({self.elapsed:.2f}s)"


def _timed(fn):
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        res = fn(*a, **kw)
        res.elapsed = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


CROSS_T = (0.1, 0.5, 1.0)
CROSS_R = (0.0, 0.3, 0.7, 1.2)
CROSS_ETA = (0.0, 0.8, 1.6, 2.4, math.pi)


@_timed
def cross_rep(ns=(1, 2), tol=1e-6):
    """Spectral series vs integral representation of p_t on the reference grid."""
    worst, rows, positive = 0.0, [], True
    for n in ns:
        for t in CROSS_T:
            R, E = np.meshgrid(CROSS_R, CROSS_ETA, indexing="ij")
            a = p_t_spectral(n, t, R, E).value
            b = p_t_integral(n, t, R.ravel(), E.ravel()).value.reshape(R.shape)
            dev = np.abs(a - b) / np.abs(b)
            positive &= bool(np.all(a > 0) and np.all(b > 0))
            worst = max(worst, float(dev.max()))
            rows.append(f"n={n} t={t}: max rel dev {dev.max():.2e}")
    return SuiteResult("cross-rep", worst <= tol and positive, worst, tol, details=rows)


def _fd_residual(n, t, R, F, fn, which, h=1e-3, ht=1e-4):
    P = lambda tt, r, f: fn(n, tt, r, f).value
    p0 = P(t, R, F)
    prp, prm = P(t, R + h, F), P(t, R - h, F)
    pfp, pfm = P(t, R, F + h), P(t, R, F - h)
    fib_drift = 2 / np.tan(F) if which == "sphere" else 2 / np.tan(2 * F)
    L = ((prp - 2 * p0 + prm) / h ** 2 + ((4 * n - 1) / np.tan(R) - 3 * np.tan(R)) * (prp - prm) / (2 * h)
         + np.tan(R) ** 2 * ((pfp - 2 * p0 + pfm) / h ** 2 + fib_drift * (pfp - pfm) / (2 * h)))
    dt = (P(t + ht, R, F) - P(t - ht, R, F)) / (2 * ht)
    return np.abs(dt - L) / np.abs(dt)


@_timed
def heat_residual(ns=(1, 2), tol=1e-3, which="sphere"):
    """|d_t p - L p| / |d_t p| by finite differences on interior nodes, t in {0.5, 1}."""
    if which == "sphere":
        R, F = np.meshgrid(np.linspace(0.2, 1.2, 6), np.linspace(0.5, 2.5, 5), indexing="ij")
        fn = p_t_spectral
    else:
        R, F = np.meshgrid(np.linspace(0.2, 1.2, 6), np.linspace(0.2, 1.3, 5), indexing="ij")
        fn = h_t_spectral
    worst, rows = 0.0, []
    for n in ns:
        for t in (0.5, 1.0):
            res = _fd_residual(n, t, R, F, fn, which)
            worst = max(worst, float(res.max()))
            rows.append(f"{which} n={n} t={t}: max residual {res.max():.2e}")
    return SuiteResult("residual" if which == "sphere" else "cp-residual", worst <= tol, worst, tol,
                       details=rows)


def _gl_2d(f, a0, a1, b0, b1, order=64):
    x, w = np.polynomial.legendre.leggauss(order)
    xa = 0.5 * (a1 - a0) * (x + 1) + a0
    xb = 0.5 * (b1 - b0) * (x + 1) + b0
    A, B = np.meshgrid(xa, xb, indexing="ij")
    W = np.outer(w, w) * 0.25 * (a1 - a0) * (b1 - b0)
    return float(np.sum(W * f(A, B)))


@_timed
def normalization(ns=(1, 2), tol=1e-6):
    """Total mass of p_t against the cylindric measure, plus the t = 10 equilibrium."""
    worst, rows = 0.0, []
    for n in ns:
        for t in (0.5, 1.0):
            mass = _gl_2d(lambda R, E: p_t_spectral(n, t, R, E).value * cyl_measure_density(n, R, E),
                          0.0, math.pi / 2, 0.0, math.pi)
            worst = max(worst, abs(mass - 1))
            rows.append(f"n={n} t={t}: mass {mass!r}")
        vol = _gl_2d(lambda R, E: cyl_measure_density(n, R, E), 0.0, math.pi / 2, 0.0, math.pi)
        R, E = np.meshgrid(np.linspace(0, 1.5, 7), np.linspace(0, math.pi, 7), indexing="ij")
        p10 = p_t_spectral(n, 10.0, R, E).value
        spread = float(np.ptp(p10) / p10.mean())
        eq = abs(p10.mean() * vol - 1)
        rows.append(f"n={n} t=10: spread {spread:.1e}, |p*vol-1| {eq:.1e} (vol {vol!r} vs {sphere_volume(n)!r})")
        worst = max(worst, spread * 100, eq)
    return SuiteResult("normalization", worst <= tol, worst, tol, details=rows)


INTERTWINE_POINTS = ((1, 0.8, 0.4, 1.2), (1, 0.8, 0.0, 0.9), (2, 1.0, 0.6, 2.0))


@_timed
def intertwining(tol=1e-6):
    """CR-kernel intertwining against p_t at the three reference points."""
    rows, worst = [], 0.0
    for n, t, r, eta in INTERTWINE_POINTS:
        res = intertwine_check(n, t, r, eta)
        worst = max(worst, res)
        rows.append(f"n={n} t={t} r={r} eta={eta}: residual {res:.2e}")
    return SuiteResult("intertwining", worst <= tol, worst, tol, details=rows)


GREEN_POINTS = ((1, 0.5, 1.0), (1, 1.0, 0.5), (2, 0.7, 1.5))


@_timed
def green(tol=1e-3):
    """Time transform of p_t against the closed form, plus the r -> pi/2 spot value."""
    rows, worst = [], 0.0
    for n, r, eta in GREEN_POINTS:
        res = green_transform_check(n, r, eta)
        worst = max(worst, res)
        rows.append(f"n={n} r={r} eta={eta}: transform residual {res:.2e}")
    r_edge = math.nextafter(math.pi / 2, 0.0)
    spot = max(abs(green_sphere(1, r_edge, e) * 8 * math.pi ** 4 - 1) for e in (0.0, 1.0, math.pi))
    rows.append(f"n=1 r->pi/2: |G*8pi^4 - 1| = {spot:.1e} (tol 1e-12)")
    return SuiteResult("green", worst <= tol and spot <= 1e-12, worst, tol, details=rows)


CP_T = (0.2, 0.5, 1.0)
CP_R = (0.0, 0.4, 0.9)
CP_PHI = (0.0, 0.5, 1.0, math.pi / 2)


@_timed
def cp_routes(ns=(1, 2), tol=1e-5):
    """Spectral vs intertwined vs double-integral h_t on the reference grid."""
    worst, rows = 0.0, []
    for n in ns:
        for t in CP_T:
            w = 0.0
            for r in CP_R:
                for phi in CP_PHI:
                    a = h_t_spectral(n, t, r, phi).value
                    b = h_t_intertwined(n, t, r, phi).value
                    c = h_t_integral(n, t, r, phi).value
                    if min(a, b, c) <= 0:
                        w = math.inf
                    w = max(w, abs(a - b) / a, abs(a - c) / a)
            worst = max(worst, w)
            rows.append(f"n={n} t={t}: max rel dev {w:.2e}")
    return SuiteResult("cp-routes", worst <= tol, worst, tol, details=rows)


@_timed
def cp_normalization(ns=(1, 2), tol=1e-6):
    """Mass of h_t against c_n sin^{4n-1} r cos^3 r sin 2phi for t in {0.5, 1}."""
    worst, rows = 0.0, []
    for n in ns:
        for t in (0.5, 1.0):
            mass = _gl_2d(lambda R, P: h_t_spectral(n, t, R, P).value * cp_measure_density(n, R, P),
                          0.0, math.pi / 2, 0.0, math.pi / 2)
            worst = max(worst, abs(mass - 1))
            rows.append(f"n={n} t={t}: mass {mass!r}")
    return SuiteResult("cp-normalization", worst <= tol, worst, tol, details=rows)


ASYM_T = (0.04, 0.02, 0.01)


def asymptotic_cases():
    """(label, formula(t), oracle(t), band at the smallest t)."""
    return [
        ("diagonal n=1", lambda t: asy.p_asym_diagonal(1, t), lambda t: p_t_integral(1, t, 0.0, 0.0).value, 0.05),
        ("diagonal n=2", lambda t: asy.p_asym_diagonal(2, t), lambda t: p_t_integral(2, t, 0.0, 0.0).value, 0.05),
        ("vertical n=1 eta=1.5", lambda t: asy.p_asym_vertical(1, t, 1.5),
         lambda t: p_t_spectral(1, t, 0.0, 1.5).value, 0.05),
        ("horizontal n=1 r=0.8", lambda t: asy.p_asym_horizontal(1, t, 0.8),
         lambda t: p_t_integral(1, t, 0.8, 0.0).value, 0.05),
        ("horizontal n=2 r=0.5", lambda t: asy.p_asym_horizontal(2, t, 0.5),
         lambda t: p_t_integral(2, t, 0.5, 0.0).value, 0.05),
        ("general n=1 (0.5,1.0)", lambda t: asy.p_asym_general(1, t, 0.5, 1.0),
         lambda t: p_t_spectral(1, t, 0.5, 1.0).value, 0.05),
        ("h diagonal n=1", lambda t: asy.h_asym_diagonal(1, t), lambda t: h_t_spectral(1, t, 0.0, 0.0).value, 0.20),
        ("h diagonal n=2", lambda t: asy.h_asym_diagonal(2, t), lambda t: h_t_spectral(2, t, 0.0, 0.0).value, 0.20),
        ("h vertical n=1 phi=0.7", lambda t: asy.h_asym_vertical(1, t, 0.7),
         lambda t: h_t_spectral(1, t, 0.0, 0.7).value, 0.05),
    ]


def ratio_sequence(formula, oracle, ts=ASYM_T):
    return [oracle(t) / formula(t) for t in ts]


@_timed
def asymptotics_suite(ts=ASYM_T):
    """Oracle/formula ratios must approach 1 monotonically and sit in band at the last t."""
    rows, ok, worst = [], True, 0.0
    for label, formula, oracle, band in asymptotic_cases():
        rat = ratio_sequence(formula, oracle, ts)
        dev = [abs(x - 1) for x in rat]
        mono = all(dev[i + 1] < dev[i] for i in range(len(dev) - 1))
        inband = dev[-1] <= band
        ok &= mono and inband
        worst = max(worst, dev[-1] / band)
        # with t halving, 2 r(t/2) - r(t) removes the O(t) term and the
        # three-point combination also removes O(t^2): leading-constant checks
        lim = 2 * rat[-1] - rat[-2]
        lim2 = (8 * rat[-1] - 6 * rat[-2] + rat[-3]) / 3 if len(rat) >= 3 else lim
        rows.append(f"{'ok ' if mono and inband else 'BAD'} {label:<24} ratios "
                    + ", ".join(f"{x:.4f}" for x in rat)
                    + f"  monotone={mono} band={band:.0%} extrapolated={lim:.4f}/{lim2:.4f}")
    return SuiteResult("asymptotics", ok, worst, 1.0, details=rows)


@_timed
def distance_suite():
    """Diameter, horizontal distances, grid maximum, root residuals and eta -> 0 slope."""
    rows, errs = [], []
    d0 = asy.subriemannian_distance(0.0, math.pi)
    errs.append(abs(d0 - math.pi) / 1e-9)
    rows.append(f"d(0, pi) - pi = {d0 - math.pi:.1e}")
    for r in (0.3, 0.8, 1.2):
        e = abs(asy.subriemannian_distance(r, 0.0) - r)
        errs.append(e / 1e-6)
        rows.append(f"d({r}, 0) - r = {e:.1e}")
    rs = np.linspace(0, math.pi / 2, 51)[:-1]
    es = np.linspace(0, math.pi, 50)
    dmax = max(asy.subriemannian_distance(float(r), float(e)) for r in rs for e in es)
    errs.append(max(0.0, dmax - math.pi) / 1e-9)
    rows.append(f"grid max {dmax!r}")
    res = max(asy.solve_varphi(float(r), float(e)).residual for r in rs[1:] for e in es)
    errs.append(res / 1e-12)
    rows.append(f"max root residual {res:.1e}")
    slope_err = 0.0
    for r in (0.3, 0.5, 0.8, 1.2):
        h = 1e-4
        fd = asy.solve_varphi(r, h).varphi / h
        exact = -1 / (1 - r / math.tan(r))
        slope_err = max(slope_err, abs(fd - exact) / abs(exact))
    errs.append(slope_err / 1e-4)
    rows.append(f"eta->0 slope rel err {slope_err:.1e}")
    worst = max(errs)
    return SuiteResult("distance", worst <= 1.0, worst, 1.0, details=rows)


@_timed
def pde_suite(ns=(1, 2), tol=2e-3):
    """Crank-Nicolson p_0.5 -> p_0.6 on the interior window and eigenfunction checks."""
    rows, worst = [], 0.0
    for n in ns:
        g = make_grid(0.2, 1.2, 51, 0.4, 2.7, 116, "sphere", lambda R, E: p_t_spectral(n, 0.5, R, E).value)
        out = evolve(n, g, 0.5, 1e-3, 100)
        R, E = np.meshgrid(g.r_nodes, g.fiber_nodes, indexing="ij")
        exact = p_t_spectral(n, 0.6, R, E).value
        m = g.window(0.3, 1.1, 0.6, 2.5)
        dev = float(np.max(np.abs(out.values - exact)[m]) / np.max(np.abs(exact)[m]))
        worst = max(worst, dev / tol)
        rows.append(f"n={n} evolve 0.5->0.6: max-norm rel dev {dev:.2e}")
    eig = 0.0
    for n in ns:
        for k, m in ((0, 0), (0, 1), (1, 0), (1, 1)):
            est, lam = eigen_check(n, k, m)
            e = abs(est - lam) / max(abs(lam), 1.0)
            eig = max(eig, e)
    rows.append(f"eigenvalue max rel err {eig:.1e} (tol 1e-6)")
    worst = max(worst, eig / 1e-6)
    return SuiteResult("pde", worst <= 1.0, worst, 1.0, details=rows)


def rodrigues_jacobi(k, a, b):
    """Exact P_k^{(a,b)} (integer a, b) from the Rodrigues formula, as a numpy callable."""
    import sympy

    x = sympy.Symbol("x")
    w = sympy.Poly((1 - x) ** (a + k) * (1 + x) ** (b + k), x)
    q, rem = sympy.div(w.diff((x, k)), sympy.Poly((1 - x) ** a * (1 + x) ** b, x))
    assert rem.is_zero
    poly = q * sympy.Rational((-1) ** k, 2 ** k * sympy.factorial(k))
    coeffs = [float(c) for c in poly.all_coeffs()]
    return lambda xs: np.polyval(coeffs, xs)


@_timed
def orthopoly_suite(K=12, tol_rec=1e-10, tol_orth=1e-8):
    """Recurrence vs Rodrigues, and Gauss-Jacobi orthogonality of the recurrence values."""
    rows = []
    xs = np.linspace(-1, 1, 41)
    rec_err = 0.0
    for a, b in ((1, 2), (3, 1), (1, 5), (0, 0)):
        P = jacobi_p_all(K, a, b, xs)
        for k in range(K + 1):
            ref = rodrigues_jacobi(k, a, b)(xs) * np.ones_like(xs)
            rec_err = max(rec_err, float(np.max(np.abs(P[k] - ref) / np.maximum(1, np.abs(ref)))))
    rows.append(f"recurrence vs Rodrigues: {rec_err:.1e}")
    orth = 0.0
    for a, b in ((1.0, 2.0), (3.0, 4.0), (0.0, 0.0), (1.0, 7.0)):
        x, w = roots_jacobi(K + 2, a, b)
        P = jacobi_p_all(K, a, b, x)
        G = (P * w) @ P.T
        norms = np.array([jacobi_norm_sq(k, a, b) for k in range(K + 1)])
        orth = max(orth, float(np.max(np.abs(G - np.diag(norms)) / np.sqrt(np.outer(norms, norms)))))
    lam = 2.5
    x, w = roots_jacobi(K + 2, lam - 0.5, lam - 0.5)
    C = gegenbauer_c_all(K, lam, x)
    G = (C * w) @ C.T
    d = np.sqrt(np.diag(G))
    off = G / np.outer(d, d) - np.eye(K + 1)
    orth = max(orth, float(np.max(np.abs(off))))
    rows.append(f"orthogonality: {orth:.1e}")
    ok = rec_err <= tol_rec and orth <= tol_orth
    return SuiteResult("orthopoly", ok, max(rec_err / tol_rec, orth / tol_orth), 1.0, details=rows)


SUITES = {
    "cross-rep": cross_rep,
    "residual": heat_residual,
    "cp-residual": lambda ns=(1, 2): heat_residual(ns, which="cp"),
    "normalization": normalization,
    "cp-normalization": cp_normalization,
    "intertwining": lambda ns=None: intertwining(),
    "green": lambda ns=None: green(),
    "cp-routes": cp_routes,
    "asymptotics": lambda ns=None: asymptotics_suite(),
    "distance": lambda ns=None: distance_suite(),
    "pde": pde_suite,
    "orthopoly": lambda ns=None: orthopoly_suite(),
}


def run_suite(name, ns=(1, 2)):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](ns) if ns is not None else SUITES[name]()
