"""Subelliptic heat kernel h_t(r, phi) on CP^{2n+1} (fibration over HP^n).

Three routes:

* ``h_t_spectral``: eigenfunction series in Legendre and Jacobi polynomials,
* ``h_t_intertwined``: average of the sphere kernel p_t over the circle
  fiber, (1/2pi) int_0^pi p_t(r, arccos(cos phi cos theta)) d theta,
* ``h_t_integral``: the same average with p_t taken from its integral
  representation, i.e. the nested double integral.

The kernel depends on phi only through cos 2 phi; phi is accepted on
[0, pi] and values beyond pi/2 are flagged in the diagnostics.
"""
import math

import gmpy2
import numpy as np
from scipy.special import gammaln

from . import _arith as ar
from .core import KernelEval, Truncation, as_n
from .errors import DomainError, SeriesDivergenceGuard
from .orthopoly import jacobi_p_all
from .quadrature import default_spec, integrate_finite
from .sphere_kernel import p_t_integral, p_t_spectral

CP_T_FLOOR = 0.01
_CHUNK = 512


def _check(r, phi):
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any((r < 0) | (r >= np.pi / 2)):
        raise DomainError("r must lie in [0, pi/2)")
    if np.any((phi < 0) | (phi > np.pi)):
        raise DomainError("phi must lie in [0, pi]")
    return np.broadcast_arrays(r, phi)


def cp_measure_constant(params):
    """c_n such that h_t has unit mass against c_n sin^{4n-1} r cos^3 r sin 2phi dr dphi.

    The total volume of that measure is 1/h_inf, the reciprocal of the
    equilibrium value of the kernel.
    """
    n = as_n(params)
    return 8 * math.pi ** (2 * n + 2) / math.gamma(2 * n)


def cp_measure_density(params, r, phi):
    n = as_n(params)
    v = cp_measure_constant(n) * np.sin(r) ** (4 * n - 1) * np.cos(r) ** 3 * np.sin(2 * np.asarray(phi))
    return v if np.ndim(v) else float(v)


def _log_sigma(n, k, m):
    lb = gammaln(k + 2 * m + 2 * n + 1) - gammaln(2 * n) - gammaln(k + 2 * m + 2)
    return (gammaln(2 * n) - math.log(4) - (2 * n + 2) * math.log(math.pi)
            + np.log(2 * k + 2 * m + 2 * n + 1) + np.log(2 * m + 1) + lb)


def _eigen(n, k, m):
    """-eigenvalue of the (k, m) mode: 4k(k+2n+2m+1) + 8nm."""
    return 4 * k * (k + 2 * n + 2 * m + 1) + 8 * n * m


def _extent(n, t, cos_r, rel_tol, max_index):
    lt = -math.log(rel_tol) + 30
    m_cap = int(lt / (8 * n * t) + 40)
    if cos_r < 1:
        m_cap = int(min(m_cap, lt / max(-2 * math.log(max(cos_r, 1e-300)), 1e-300) + 40))
    k_cap = int(math.sqrt(lt / (4 * t)) + 20)
    if max(m_cap, k_cap) > max_index:
        raise SeriesDivergenceGuard(f"CP series needs more than {max_index} indices at t={t}")
    k = np.arange(k_cap + 1, dtype=float)[:, None]
    m = np.arange(m_cap + 1, dtype=float)[None, :]
    lpk = np.maximum(gammaln(k + 2 * n) - gammaln(k + 1) - gammaln(2 * n),
                     gammaln(k + 2 * m + 2) - gammaln(k + 1) - gammaln(2 * m + 2))
    lcr = 2 * m * math.log(cos_r) if cos_r > 0 else np.where(m == 0, 0.0, -np.inf)
    L = _log_sigma(n, k, m) - _eigen(n, k, m) * t + lcr + lpk
    keep = L >= L.max() + math.log(rel_tol)
    K = int(np.nonzero(keep.any(axis=1))[0].max())
    M = int(np.nonzero(keep.any(axis=0))[0].max())
    if K >= k_cap - 5 or M >= m_cap - 5:
        raise SeriesDivergenceGuard(f"CP truncation did not close at t={t}")
    B = np.exp(L)
    B[:K + 1, :M + 1] = 0.0
    return K, M, float(B.sum())


def _sum(n, t, r, phi, K, M, bits=None):
    ks = np.arange(K + 1)
    ms = np.arange(M + 1)
    lam = _eigen(n, ks[:, None], ms[None, :])
    if bits is None:
        coef = np.exp(_log_sigma(n, ks[:, None].astype(float), ms[None, :].astype(float)) - lam * t)
        x2, c2, cr2 = np.cos(2 * r), np.cos(2 * phi), np.cos(r) ** 2
        crm = cr2[None, :] ** ms[:, None]
    else:
        pre = gmpy2.factorial(2 * n - 1) / (4 * gmpy2.const_pi() ** (2 * n + 2))
        ints = np.array([[(2 * k + 2 * m + 2 * n + 1) * (2 * m + 1) * math.comb(k + 2 * m + 2 * n, 2 * n - 1)
                          for m in ms] for k in ks], dtype=object)
        tm = gmpy2.mpfr(float(t))
        ex = np.frompyfunc(lambda l: gmpy2.exp(-l * tm), 1, 1)(lam.astype(object))
        coef = pre * ints * ex
        rm, pm = ar.to_mp(r, bits), ar.to_mp(phi, bits)
        x2, c2, cr2 = ar.cos(2 * rm), ar.cos(2 * pm), ar.cos(rm) ** 2
        crm = np.stack([cr2 ** int(m) for m in ms])
    leg = jacobi_p_all(M, 0.0, 0.0, c2)                               # (M+1, P)
    J = jacobi_p_all(K, 2.0 * n - 1, (2.0 * ms + 1)[:, None], x2[None, :])
    term = coef[:, :, None] * J * (leg * crm)[None, :, :]
    return term.sum(axis=(0, 1)), ar.absolute(term).sum(axis=(0, 1))


def h_t_spectral(params, t, r, phi, trunc=None, precision="auto", rel_target=1e-10,
                 t_floor=CP_T_FLOOR):
    """h_t(r, phi) from the eigenfunction series; precision as in p_t_spectral."""
    n = as_n(params)
    if t < t_floor:
        raise SeriesDivergenceGuard(f"CP spectral route refuses t={t} below floor {t_floor}")
    trunc = trunc or Truncation()
    scalar_in = np.ndim(r) == 0 and np.ndim(phi) == 0
    rr, pp = _check(r, phi)
    shape = rr.shape
    rr, pp = rr.ravel(), pp.ravel()
    forced = None if precision in ("auto", "double", None) else int(precision)
    val, err = np.empty(rr.size), np.empty(rr.size)
    bits_used = np.full(rr.size, 53)
    terms = 0
    for s in range(0, rr.size, _CHUNK):
        sl = slice(s, s + _CHUNK)
        r_c, p_c = rr[sl], pp[sl]
        b0 = forced or 53
        K, M, tail = _extent(n, t, math.cos(r_c.min()), min(trunc.term_tol, 2.0 ** -b0), trunc.max_index)
        terms = max(terms, (K + 1) * (M + 1))
        if forced is None:
            v, a = _sum(n, t, r_c, p_c, K, M)
        else:
            with ar.working_precision(forced):
                v, a = _sum(n, t, r_c, p_c, K, M, bits=forced)
            v, a = ar.to_float(v), ar.to_float(a)
            bits_used[sl] = forced
        e = tail + 8 * 2.0 ** -b0 * a * math.sqrt(K + M + 2)
        if precision == "auto":
            cond = a / np.maximum(np.abs(v), np.finfo(float).tiny)
            redo = ar.needs_extended(cond, rel_target)
            rounds = 0
            while redo.any() and rounds < 4:
                idx = np.nonzero(redo)[0]
                b = int(ar.bits_for(cond[idx].max(), rel_target))
                K2, M2, tail2 = _extent(n, t, math.cos(r_c[idx].min()), min(trunc.term_tol, 2.0 ** -b),
                                        trunc.max_index)
                with ar.working_precision(b):
                    v2, _ = _sum(n, t, r_c[idx], p_c[idx], K2, M2, bits=b)
                v2 = ar.to_float(v2)
                v[idx] = v2
                e[idx] = tail2 + 8 * 2.0 ** -b * a[idx] * math.sqrt(K2 + M2 + 2)
                bits_used[sl][idx] = b
                terms = max(terms, (K2 + 1) * (M2 + 1))
                cond[idx] = a[idx] / np.maximum(np.abs(v2), np.finfo(float).tiny)
                redo = np.zeros_like(redo)
                redo[idx] = ar.bits_for(cond[idx], rel_target) > b
                rounds += 1
        val[sl], err[sl] = v, e + np.finfo(float).eps * np.abs(v)
    diag = {"terms_used": terms, "bits": bits_used.reshape(shape),
            "phi_beyond_half_pi": bool(np.any(pp > np.pi / 2))}
    if scalar_in:
        diag["bits"] = int(bits_used[0])
        return KernelEval(float(val[0]), float(err[0]), diag)
    return KernelEval(val.reshape(shape), err.reshape(shape), diag)


def _fiber_average(p_of_eta, phi, spec):
    """(1/2pi) int_0^pi p(arccos(cos phi cos theta)) d theta, vectorized p."""
    cp = math.cos(phi)

    def f(theta):
        eta = np.arccos(np.clip(cp * np.cos(theta), -1.0, 1.0))
        return p_of_eta(eta)

    res = integrate_finite(f, 0.0, math.pi, spec.with_(abs_tol=1e-300), n_init=4)
    return res.value / (2 * math.pi), res.error_estimate / (2 * math.pi), res.evaluations


def h_t_intertwined(params, t, r, phi, spec=None, rel_target=1e-10):
    """h_t(r, phi) as the fiber average of p_t (spectral route for p_t)."""
    n = as_n(params)
    spec = spec or default_spec()
    r, phi = float(r), float(phi)
    _check(r, phi)
    v, e, ev = _fiber_average(lambda eta: p_t_spectral(n, t, r, eta, rel_target=rel_target).value,
                              phi, spec)
    return KernelEval(float(v), float(e), {"quad_evaluations": ev})


def h_t_integral(params, t, r, phi, spec=None, rel_target=1e-10):
    """h_t(r, phi) from the nested double integral (inner: SL(2) integral in y)."""
    n = as_n(params)
    spec = spec or default_spec()
    r, phi = float(r), float(phi)
    _check(r, phi)
    v, e, ev = _fiber_average(lambda eta: p_t_integral(n, t, r, eta, spec, rel_target=rel_target).value,
                              phi, spec)
    return KernelEval(float(v), float(e), {"quad_evaluations": ev})
