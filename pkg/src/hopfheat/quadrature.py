"""Vectorized adaptive quadrature.

Integrands take an array of nodes and return an array of values, one per
node (optionally with trailing component axes for vector-valued integrands).
Every panel that still needs work is evaluated in a single call, so the
cost per round is one numpy pass rather than one Python call per node.

An extended-precision counterpart (fixed composite Gauss-Legendre in
MPFR) serves the kernel routes when double precision cannot resolve the
cancellation in an oscillatory integrand.
"""
import functools
import math
import os
from dataclasses import dataclass, replace

import gmpy2
import numpy as np

from .errors import NonConvergence

ENV_RELTOL = "HOPFHEAT_QUAD_RELTOL"

# Gauss-Kronrod 10/21 abscissae and weights (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0])
_WGK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525040581, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338])

# full symmetric 21-point rule on [-1, 1]
_X21 = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_W21 = np.concatenate([_WGK[:-1], _WGK[::-1]])
_W10 = np.zeros(21)
_W10[1:10:2] = _WG
_W10[11:20:2] = _WG[::-1]

MAX_PANELS = 200_000


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_depth: int = 60
    tail_cutoff_sigma: float = 8.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.tail_cutoff_sigma < 6:
            raise ValueError("tail_cutoff_sigma must be >= 6")

    def with_(self, **kw):
        return replace(self, **kw)


def default_spec():
    """Default spec, honouring the HOPFHEAT_QUAD_RELTOL override."""
    env = os.environ.get(ENV_RELTOL)
    if env:
        return QuadratureSpec(rel_tol=float(env))
    return QuadratureSpec()


@dataclass
class QuadResult:
    value: object
    error_estimate: object
    evaluations: int
    l1: object = None  # integral of |f|, used as a roundoff scale

    def __iter__(self):
        return iter((self.value, self.error_estimate))


def _gk_panels(f, a, b):
    """Apply G10/K21 on panels [a_j, b_j]; returns (K, err, |f| integral)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * _X21[None, :]
    fx = np.asarray(f(x.ravel()))
    fx = fx.reshape(x.shape + fx.shape[1:])
    extra = (slice(None), slice(None)) + (None,) * (fx.ndim - 2)
    w21 = _W21[None, :][extra]
    w10 = _W10[None, :][extra]
    hh = h[(slice(None),) + (None,) * (fx.ndim - 2)]
    K = hh * np.sum(w21 * fx, axis=1)
    G = hh * np.sum(w10 * fx, axis=1)
    absf = hh * np.sum(w21 * np.abs(fx), axis=1)
    mean = K / (2 * hh)
    resasc = hh * np.sum(w21 * np.abs(fx - mean[:, None]), axis=1)
    diff = np.abs(K - G)
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.where(resasc > 0, resasc * np.minimum(1.0, (200 * diff / resasc) ** 1.5), diff)
    err = np.maximum(err, 50 * np.finfo(float).eps * absf)
    return K, err, absf


def integrate_finite(f, a, b, spec=None, n_init=1, breakpoints=None):
    """Adaptive G10/K21 integral of a vectorized ``f`` over [a, b].

    Panels are bisected until each carries at most its length-proportional
    share of the tolerance max(abs_tol, rel_tol*|I|, 100 eps * int|f|); the
    last term keeps strongly cancelling integrals from chasing roundoff. ``f`` may be vector
    valued (trailing axes); the tolerance then applies per component.
    Raises NonConvergence when bisection depth exceeds spec.max_depth.
    """
    spec = spec or default_spec()
    if b < a:
        raise ValueError("need a <= b")
    if b == a:
        v = np.asarray(f(np.array([float(a)])))[0] * 0.0
        return QuadResult(v, v * 0.0, 1, v * 0.0)
    if breakpoints is None:
        edges = np.linspace(a, b, int(max(n_init, 1)) + 1)
    else:
        edges = np.unique(np.concatenate([[a], np.asarray(breakpoints, float), [b]]))
        edges = edges[(edges >= a) & (edges <= b)]
    lo, hi = edges[:-1], edges[1:]
    depth = np.zeros(lo.size, dtype=int)
    length = b - a
    done_val = 0.0
    done_err = 0.0
    done_abs = 0.0
    evals = 0
    while True:
        K, err, absf = _gk_panels(f, lo, hi)
        evals += 21 * lo.size
        total = done_val + K.sum(axis=0)
        total_err = done_err + err.sum(axis=0)
        # floor at the roundoff level of the |f| integral: cancelling
        # components cannot be resolved below it in double precision
        tol = np.maximum(np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total)),
                         100 * np.finfo(float).eps * (done_abs + absf.sum(axis=0)))
        if np.all(total_err <= tol):
            return QuadResult(total, total_err, evals, done_abs + absf.sum(axis=0))
        share = tol * ((hi - lo) / length)[(slice(None),) + (None,) * (np.ndim(err) - 1)]
        bad = err > share
        if bad.ndim > 1:
            bad = bad.reshape(bad.shape[0], -1).any(axis=1)
        if not bad.any():
            # local shares met but the sum is marginally above tolerance:
            # refine the worst panel(s)
            e = err.reshape(err.shape[0], -1).max(axis=1)
            bad = e >= np.quantile(e, 0.9)
        good = ~bad
        done_val = done_val + K[good].sum(axis=0)
        done_err = done_err + err[good].sum(axis=0)
        done_abs = done_abs + absf[good].sum(axis=0)
        lo, hi, depth = lo[bad], hi[bad], depth[bad] + 1
        if depth.max() > spec.max_depth or 2 * lo.size > MAX_PANELS:
            raise NonConvergence(
                f"adaptive quadrature on [{a}, {b}] exceeded depth {spec.max_depth}; "
                f"error {np.max(total_err):.3e} vs tolerance {np.min(tol):.3e}",
                value=total, error_estimate=total_err)
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        depth = np.concatenate([depth, depth])


def integrate_gaussian_tail(f, t, spec=None, c_est=0.0, n_init=None):
    """Integral of f(y) exp(-y^2/4t) over [0, inf), truncated at y_max.

    y_max = tail_cutoff_sigma * sqrt(4t) + 4t * c_est, where c_est bounds
    the exponential growth rate of f. The Gaussian weight is applied here.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    spec = spec or default_spec()
    y_max = spec.tail_cutoff_sigma * math.sqrt(4 * t) + 4 * t * max(c_est, 0.0)

    def g(y):
        w = np.exp(-y * y / (4 * t))
        fy = np.asarray(f(y))
        return fy * w.reshape(w.shape + (1,) * (fy.ndim - 1))

    if n_init is None:
        n_init = max(1, int(math.ceil(y_max / math.sqrt(4 * t))))
    return integrate_finite(g, 0.0, y_max, spec, n_init=n_init)


# ---------------------------------------------------------------------------
# extended precision

@functools.lru_cache(maxsize=64)
def gauss_legendre_mp(order, bits):
    """Gauss-Legendre nodes and weights on [-1, 1] as mpfr at ``bits``."""
    x0, _ = np.polynomial.legendre.leggauss(order)
    with gmpy2.context(gmpy2.get_context(), precision=bits + 16):
        xs, ws = [], []
        for xi in x0:
            x = gmpy2.mpfr(float(xi))
            for _ in range(100):
                p0, p1 = gmpy2.mpfr(1), x
                for k in range(2, order + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = order * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < gmpy2.mpfr(2) ** (-(bits + 8)):
                    break
            p0, p1 = gmpy2.mpfr(1), x
            for k in range(2, order + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = order * (x * p1 - p0) / (x * x - 1)
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
    return np.array(xs, dtype=object), np.array(ws, dtype=object)


def composite_gauss_mp(f, edges, order, bits):
    """Fixed composite Gauss-Legendre sum of a vectorized mpfr integrand.

    ``edges`` are float panel boundaries. ``f`` receives an object array
    of mpfr nodes and returns mpfr values (trailing component axes allowed).
    Returns (value, l1) where l1 is the same rule applied to |f|.
    """
    xs, ws = gauss_legendre_mp(order, bits)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        e = np.array([gmpy2.mpfr(float(v)) for v in edges], dtype=object)
        c = (e[:-1] + e[1:]) / 2
        h = (e[1:] - e[:-1]) / 2
        nodes = (c[:, None] + h[:, None] * xs[None, :]).ravel()
        wts = (h[:, None] * ws[None, :]).ravel()
        fx = np.asarray(f(nodes))
        wshape = wts.reshape(wts.shape + (1,) * (fx.ndim - 1))
        val = np.sum(wshape * fx, axis=0)
        l1 = np.sum(wshape * np.frompyfunc(abs, 1, 1)(fx), axis=0)
    return val, l1


def integrate_mp(f, a, b, bits, panel_width, order=24):
    """Composite Gauss-Legendre in MPFR with a two-order error estimate.

    The rule is applied with ``order`` and ``order + 8`` points per panel;
    the difference is the error estimate and the higher order the value.
    """
    npan = max(1, int(math.ceil((b - a) / panel_width)))
    edges = np.linspace(a, b, npan + 1)
    lo_v, _ = composite_gauss_mp(f, edges, order, bits)
    hi_v, l1 = composite_gauss_mp(f, edges, order + 8, bits)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        err = np.frompyfunc(abs, 1, 1)(np.asarray(hi_v - lo_v, dtype=object))
    return QuadResult(hi_v, err, npan * (2 * order + 8), l1)
