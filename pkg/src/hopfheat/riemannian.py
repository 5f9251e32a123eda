"""Heat kernel q_t of the round sphere S^{4n+3} as a zonal function.

q_t(cos delta) = Gamma(2n+1)/(2 pi^{2n+2}) sum_m (m+2n+1) e^{-m(m+4n+2)t} C_m^{2n+1}(cos delta)

The series is evaluated for any x >= -1. Arguments x > 1 (needed by the
integral representation of the subelliptic kernel, where x = cos r cosh y)
use the ratio-scaled recurrence R_m = C_m(x) / rho^m, rho = x + sqrt(x^2-1),
so that e^{m log rho} can be merged with the Gaussian factor in the exponent
instead of overflowing.
"""
import math

import gmpy2
import numpy as np
from scipy.special import gammaln

from . import _arith as ar
from .core import KernelEval, Truncation, as_n
from .errors import DomainError, SeriesDivergenceGuard


def q_prefactor(n):
    return math.gamma(2 * n + 1) / (2 * math.pi ** (2 * n + 2))


def zonal_normalizer(n):
    """vol(S^{4n+2}); q_t(cos d) * this * sin^{4n+2} d integrates to 1 over [0, pi]."""
    return 2 * math.pi ** (2 * n + 1.5) / math.gamma(2 * n + 1.5)


def _log_bounds(n, t, lr, logscale, m):
    """log of (m+2n+1) e^{-m(m+4n+2)t} C_m(1) rho^m e^{logscale}, shape (M, P)."""
    lam = 2 * n + 1
    m = m[:, None]
    lc1 = gammaln(m + 2 * lam) - gammaln(m + 1) - gammaln(2 * lam)
    return np.log(m + 2 * n + 1) - m * (m + 4 * n + 2) * t + m * lr[None, :] + lc1 + logscale[None, :]


def series_extent(n, t, x, logscale=None, rel_tol=1e-18, max_index=20000):
    """Cutoff index M and per-point tail bound for the q_t series.

    Uses |C_m^l(x)| <= C_m^l(1) rho^m (rho = 1 on [-1, 1]). Terms past the
    bound's peak decay like a Gaussian in m, so the tail beyond the first
    index whose bound is rel_tol below the peak is summed explicitly over a
    generous stretch.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ls = np.zeros_like(x) if logscale is None else np.broadcast_to(np.asarray(logscale, float), x.shape)
    lr = np.log(np.where(x > 1, x + np.sqrt(np.maximum(x * x - 1, 0)), 1.0))
    peak = np.maximum(0.0, (lr - (4 * n + 2) * t) / (2 * t))
    width = math.sqrt((-math.log(rel_tol) + 20 * math.log(2 * n + 2) + 60) / t)
    cap = int(math.ceil(peak.max() + 2 * width + 4 * n + 20))
    if cap > 4 * max_index:
        raise SeriesDivergenceGuard(
            f"q_t series needs more than {max_index} terms at t={t}, x={x.max():.4g}")
    m = np.arange(cap + 1, dtype=float)
    L = _log_bounds(n, t, lr, ls, m)
    Lmax = L.max(axis=0)
    ok = (L < (Lmax + math.log(rel_tol))[None, :]) & (m[:, None] > peak[None, :])
    first = np.where(ok.any(axis=0), ok.argmax(axis=0), cap)
    M = int(first.max())
    if M >= cap or M > max_index:
        raise SeriesDivergenceGuard(
            f"q_t term bound still above tolerance at index {min(M, cap)} (t={t}); "
            "raise max_index or increase t")
    tail = np.exp(L[M + 1:]).sum(axis=0)
    return M, tail * q_prefactor(n)


def q_series(n, t, x, logscale=None, bits=None, rel_tol=1e-18, max_index=20000):
    """Core summation. Returns (value, abs_sum, tail_bound, M).

    value includes the factor e^{logscale}. In double precision x > 1 uses
    the scaled recurrence; under ``bits`` (MPFR) everything is unscaled.
    abs_sum is the sum of absolute terms, a roundoff scale for callers.
    """
    xf = np.atleast_1d(ar.to_float(x))
    if np.any(xf < -1 - 1e-15):
        raise DomainError("q_t needs x >= -1")
    lsf = None if logscale is None else np.broadcast_to(ar.to_float(logscale), xf.shape)
    M, tail = series_extent(n, t, xf, lsf, rel_tol if bits is None else min(rel_tol, 2.0 ** -bits),
                            max_index)
    lam = 2 * n + 1
    pref = q_prefactor(n)
    if bits is None:
        xv = xf
        big = xv > 1
        rho = np.where(big, xv + np.sqrt(np.maximum(xv * xv - 1, 0)), 1.0)
        lr = np.log(rho)
        ls = np.zeros_like(xv) if lsf is None else lsf
        r0 = np.ones_like(xv)
        tot = (2 * n + 1) * np.exp(ls)
        tot_abs = tot.copy()
        if M >= 1:
            r1 = 2 * lam * xv / rho
            term = (2 * n + 2) * np.exp(-(4 * n + 3) * t + lr + ls) * r1
            tot = tot + term
            tot_abs = tot_abs + np.abs(term)
            rm2, rm1 = r0, r1
            inv = 1 / rho
            inv2 = inv * inv
            for m in range(2, M + 1):
                r = (2 * xv * (m + lam - 1) * rm1 * inv - (m + 2 * lam - 2) * rm2 * inv2) / m
                term = (m + 2 * n + 1) * np.exp(-m * (m + 4 * n + 2) * t + m * lr + ls) * r
                tot = tot + term
                tot_abs = tot_abs + np.abs(term)
                rm2, rm1 = rm1, r
        val, vabs = pref * tot, pref * tot_abs
    else:
        with ar.working_precision(bits):
            xv = x if ar.is_mp(x) else ar.to_mp(xf, bits)
            xv = np.atleast_1d(xv)
            tm = ar.scalar(t, bits)
            c = gmpy2.factorial(2 * n) / (2 * gmpy2.const_pi() ** (2 * n + 2))
            rm2 = xv * 0 + 1
            tot = (2 * n + 1) * rm2
            tot_abs = tot.copy()
            if M >= 1:
                rm1 = 2 * lam * xv
                term = (2 * n + 2) * gmpy2.exp(-(4 * n + 3) * tm) * rm1
                tot = tot + term
                tot_abs = tot_abs + ar.absolute(term)
                for m in range(2, M + 1):
                    r = (2 * xv * (m + lam - 1) * rm1 - (m + 2 * lam - 2) * rm2) / m
                    term = (m + 2 * n + 1) * gmpy2.exp(-m * (m + 4 * n + 2) * tm) * r
                    tot = tot + term
                    tot_abs = tot_abs + ar.absolute(term)
                    rm2, rm1 = rm1, r
            if logscale is not None:
                ls = logscale if ar.is_mp(logscale) else ar.to_mp(lsf, bits)
                e = ar.exp(ls)
                tot, tot_abs = tot * e, tot_abs * e
            val, vabs = c * tot, c * tot_abs
    return val, vabs, tail, M


def q_t(params, t, x, trunc=None, precision="auto", rel_target=1e-12):
    """Riemannian heat kernel q_t at x = cos(delta) (x > 1 allowed).

    Returns KernelEval; error_estimate combines the explicit tail bound and
    a roundoff bound proportional to the sum of absolute terms. With
    precision="auto", points whose roundoff bound exceeds rel_target are
    re-summed in MPFR; an integer precision forces that many bits.
    """
    n = as_n(params)
    if t <= 0:
        raise DomainError("t must be positive")
    trunc = trunc or Truncation()
    scalar_in = np.ndim(x) == 0
    xf = np.atleast_1d(np.asarray(x, dtype=float))
    bits = None if precision in ("auto", "double", None) else int(precision)
    val, vabs, tail, M = q_series(n, t, xf, bits=bits, rel_tol=trunc.term_tol,
                                  max_index=trunc.max_index)
    val, vabs = ar.to_float(val), ar.to_float(vabs)
    eps = np.finfo(float).eps if bits is None else 2.0 ** -bits
    rnd = 4 * (M + 1) * eps * vabs
    if precision == "auto":
        cond = vabs / np.maximum(np.abs(val), np.finfo(float).tiny)
        redo = ar.needs_extended(cond, rel_target) | ~np.isfinite(val)
        if redo.any():
            b = ar.bits_for(np.max(cond[np.isfinite(cond)], initial=1.0), rel_target)
            v2, a2, _, M2 = q_series(n, t, xf[redo], bits=b, rel_tol=trunc.term_tol,
                                     max_index=trunc.max_index)
            val[redo] = ar.to_float(v2)
            rnd[redo] = 4 * (M2 + 1) * 2.0 ** -b * ar.to_float(a2)
            bits = b
    err = tail + rnd
    if scalar_in:
        val, err, tail, vabs = float(val[0]), float(err[0]), float(tail[0]), float(vabs[0])
    return KernelEval(val, err, {"terms_used": M + 1, "abs_sum": vabs, "bits": bits or 53,
                                 "truncation": trunc.report(np.max(tail))})


def q_t_small_time(params, t, delta):
    """Two-term small-time expansion of q_t(cos delta), delta in [0, pi)."""
    n = as_n(params)
    d = np.asarray(delta, dtype=float)
    if np.any(d >= np.pi) or np.any(d < 0):
        raise DomainError("small-time expansion needs delta in [0, pi)")
    small = d < 1e-4
    ds = np.where(small, 1.0, d)
    ratio = np.where(small, 1 + d * d / 6, ds / np.sin(ds))
    g = np.where(small, 1 / 3 + d * d / 45, (np.sin(ds) - ds * np.cos(ds)) / (ds * ds * np.sin(ds)))
    corr = (2 * n + 1) ** 2 - 2 * n * (2 * n + 1) * g
    v = (4 * np.pi * t) ** (-(2 * n + 1.5)) * ratio ** (2 * n + 1) * np.exp(-d * d / (4 * t)) * (1 + corr * t)
    return v if v.ndim else float(v)
