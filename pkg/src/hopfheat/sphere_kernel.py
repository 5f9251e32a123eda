"""Subelliptic heat kernel p_t(r, eta) of the quaternionic Hopf fibration.

Two independent evaluation routes:

* ``p_t_spectral``: the double eigenfunction series in Jacobi polynomials
  and SU(2) characters,
* ``p_t_integral``: the SL(2) semigroup applied to the Riemannian kernel
  q_t at imaginary fiber angle, a single oscillatory integral over y.

Both are exact representations, and both cancel catastrophically for
small t away from eta = 0: the series by about exp(d^2/4t) and the integral
by about exp(2 pi eta/4t). With precision="auto" each route first runs in
double precision, measures the cancellation (sum of |terms| over |sum|),
and re-evaluates the affected points in MPFR with enough bits to meet
``rel_target``.

Also here: the SL(2) heat semigroup, the CR-sphere kernel p_t^{CR} and its
intertwining with p_t, and the cylindric Riemannian measure.
"""
import math

import gmpy2
import numpy as np
from scipy.special import gammaln

from . import _arith as ar
from .core import KernelEval, Truncation, as_n
from .errors import DomainError, SeriesDivergenceGuard
from .orthopoly import chebyshev_u_all, jacobi_p_all
from .quadrature import default_spec, integrate_finite, integrate_mp
from .riemannian import q_series

SPECTRAL_T_FLOOR = 0.01
INTEGRAL_T_FLOOR = 0.005
NEAR_PI = 1e-5
_CHUNK = 512


def _check_point(r, eta):
    r = np.asarray(r, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if np.any((r < 0) | (r >= np.pi / 2)):
        raise DomainError("r must lie in [0, pi/2)")
    if np.any((eta < 0) | (eta > np.pi)):
        raise DomainError("eta must lie in [0, pi]")
    return np.broadcast_arrays(r, eta)


def sphere_volume(params):
    """Riemannian volume of S^{4n+3}."""
    n = as_n(params)
    return 2 * math.pi ** (2 * n + 2) / math.gamma(2 * n + 2)


def cyl_measure_density(params, r, eta):
    """Riemannian measure of S^{4n+3} in cylindric coordinates (per dr deta)."""
    n = as_n(params)
    c = 8 * math.pi ** (2 * n + 1) / math.gamma(2 * n)
    v = c * np.sin(r) ** (4 * n - 1) * np.cos(r) ** 3 * np.sin(eta) ** 2
    return v if np.ndim(v) else float(v)


# ---------------------------------------------------------------------------
# spectral series

def _log_alpha(n, k, m):
    """log of alpha_{k,m} (k, m broadcastable float arrays)."""
    lb = gammaln(k + m + 2 * n + 1) - gammaln(2 * n) - gammaln(k + m + 2)
    return (gammaln(2 * n) - math.log(2) - (2 * n + 2) * math.log(math.pi)
            + np.log(2 * k + m + 2 * n + 1) + np.log(m + 1) + lb)


def _spectral_extent(n, t, cos_r, rel_tol, max_index):
    """Rectangle 0..K x 0..M of (k, m) holding every term above rel_tol*peak.

    Term bound: alpha e^{-lambda t} (m+1) cos^m r max(C(k+2n-1,k), C(k+m+1,k)),
    using |U_m| <= m+1 and the sup norm of Jacobi polynomials on [-1, 1].
    Returns (K, M, tail) with tail the summed bound outside the rectangle.
    """
    lt = -math.log(rel_tol) + 30
    m_cap = int(lt / (4 * n * t) + 40) if cos_r >= 1 else int(
        min(lt / (4 * n * t), lt / max(-math.log(cos_r), 1e-300)) + 40)
    k_cap = int(math.sqrt(lt / (4 * t)) + 20)
    if m_cap > max_index or k_cap > max_index:
        raise SeriesDivergenceGuard(f"spectral series needs more than {max_index} indices at t={t}")
    k = np.arange(k_cap + 1, dtype=float)[:, None]
    m = np.arange(m_cap + 1, dtype=float)[None, :]
    lpk = np.maximum(gammaln(k + 2 * n) - gammaln(k + 1) - gammaln(2 * n),
                     gammaln(k + m + 2) - gammaln(k + 1) - gammaln(m + 2))
    lcr = m * math.log(cos_r) if cos_r > 0 else np.where(m == 0, 0.0, -np.inf)
    L = _log_alpha(n, k, m) - 4 * (k * (k + 2 * n + m + 1) + n * m) * t + np.log(m + 1) + lcr + lpk
    keep = L >= L.max() + math.log(rel_tol)
    K = int(np.nonzero(keep.any(axis=1))[0].max())
    M = int(np.nonzero(keep.any(axis=0))[0].max())
    if K >= k_cap - 5 or M >= m_cap - 5:
        raise SeriesDivergenceGuard(f"spectral truncation did not close at t={t}")
    B = np.exp(L)
    B[:K + 1, :M + 1] = 0.0
    return K, M, float(B.sum())


def _spectral_sum(n, t, r, eta, K, M, bits=None):
    """Sum the (K+1) x (M+1) block of the series at points (r, eta) (1-d).

    Returns (value, abs_sum); both are floats for bits=None, mpfr otherwise.
    """
    ks = np.arange(K + 1)
    ms = np.arange(M + 1)
    lam = 4 * (ks[:, None] * (ks[:, None] + 2 * n + ms[None, :] + 1) + n * ms[None, :])
    if bits is None:
        coef = np.exp(_log_alpha(n, ks[:, None].astype(float), ms[None, :].astype(float)) - lam * t)
        x2, c, cr = np.cos(2 * r), np.cos(eta), np.cos(r)
    else:
        pre = gmpy2.factorial(2 * n - 1) / (2 * gmpy2.const_pi() ** (2 * n + 2))
        ints = np.array([[(2 * k + m + 2 * n + 1) * (m + 1) * math.comb(k + m + 2 * n, 2 * n - 1)
                          for m in ms] for k in ks], dtype=object)
        tm = gmpy2.mpfr(float(t))
        ex = np.frompyfunc(lambda l: gmpy2.exp(-l * tm), 1, 1)(lam.astype(object))
        coef = pre * ints * ex
        rm, em = ar.to_mp(r, bits), ar.to_mp(eta, bits)
        x2, c, cr = ar.cos(2 * rm), ar.cos(em), ar.cos(rm)
    U = chebyshev_u_all(M, c)                                    # (M+1, P)
    crm = np.stack([cr ** int(m) for m in ms]) if bits is not None else cr[None, :] ** ms[:, None]
    betas = (ms + 1.0)[:, None]
    J = jacobi_p_all(K, 2.0 * n - 1, betas, x2[None, :])          # (K+1, M+1, P)
    term = coef[:, :, None] * J * (U * crm)[None, :, :]
    val = term.sum(axis=(0, 1))
    vabs = ar.absolute(term).sum(axis=(0, 1))
    return val, vabs


def p_t_spectral(params, t, r, eta, trunc=None, precision="auto", rel_target=1e-10,
                 t_floor=SPECTRAL_T_FLOOR):
    """Heat kernel p_t(r, eta) from its eigenfunction expansion.

    r, eta broadcast; returns KernelEval with array (or scalar) value.
    precision: "auto" (double, escalating to MPFR where the cancellation
    ratio demands it), "double", or an integer number of MPFR bits.
    """
    n = as_n(params)
    if t < t_floor:
        raise SeriesDivergenceGuard(f"spectral route refuses t={t} below floor {t_floor}")
    trunc = trunc or Truncation()
    scalar_in = np.ndim(r) == 0 and np.ndim(eta) == 0
    rr, ee = _check_point(r, eta)
    shape = rr.shape
    rr, ee = rr.ravel(), ee.ravel()
    forced = None if precision in ("auto", "double", None) else int(precision)
    val = np.empty(rr.size)
    err = np.empty(rr.size)
    bits_used = np.full(rr.size, 53)
    terms = 0
    for s in range(0, rr.size, _CHUNK):
        sl = slice(s, s + _CHUNK)
        r_c, e_c = rr[sl], ee[sl]
        tol = trunc.term_tol if forced is None else min(trunc.term_tol, 2.0 ** -forced)
        K, M, tail = _spectral_extent(n, t, math.cos(r_c.min()), tol, trunc.max_index)
        terms = max(terms, (K + 1) * (M + 1))
        if forced is None:
            v, a = _spectral_sum(n, t, r_c, e_c, K, M)
            eps = np.finfo(float).eps
        else:
            with ar.working_precision(forced):
                v, a = _spectral_sum(n, t, r_c, e_c, K, M, bits=forced)
            v, a = ar.to_float(v), ar.to_float(a)
            eps = 2.0 ** -forced
            bits_used[sl] = forced
        e = tail + 8 * eps * a * math.sqrt(K + M + 2)
        if precision == "auto":
            cond = a / np.maximum(np.abs(v), np.finfo(float).tiny)
            redo = ar.needs_extended(cond, rel_target)
            rounds = 0
            while redo.any() and rounds < 4:
                idx = np.nonzero(redo)[0]
                b = ar.bits_for(cond[idx].max(), rel_target)
                tol_b = min(trunc.term_tol, 2.0 ** -b)
                K2, M2, tail2 = _spectral_extent(n, t, math.cos(r_c[idx].min()), tol_b, trunc.max_index)
                with ar.working_precision(b):
                    v2, _ = _spectral_sum(n, t, r_c[idx], e_c[idx], K2, M2, bits=b)
                v2 = ar.to_float(v2)
                v[idx] = v2
                e[idx] = tail2 + 8 * 2.0 ** -b * a[idx] * math.sqrt(K2 + M2 + 2)
                bits_used[sl][idx] = b
                terms = max(terms, (K2 + 1) * (M2 + 1))
                new_cond = a[idx] / np.maximum(np.abs(v2), np.finfo(float).tiny)
                # the double pass may have misjudged cond when it lost every digit
                cond[idx] = new_cond
                redo = np.zeros_like(redo)
                redo[idx] = ar.bits_for(new_cond, rel_target) > b
                rounds += 1
        val[sl], err[sl] = v, e + np.finfo(float).eps * np.abs(v)
    val, err = val.reshape(shape), err.reshape(shape)
    diag = {"terms_used": terms, "bits": bits_used.reshape(shape)}
    if scalar_in:
        return KernelEval(float(val), float(err), {"terms_used": terms, "bits": int(bits_used[0])})
    return KernelEval(val, err, diag)


# ---------------------------------------------------------------------------
# integral representation

def _fiber_factor(eta, y, t, mp=False):
    """sin(eta y/2t)/sin(eta) and its removable limits, per (node, eta).

    Near eta = pi the quotient N(eta)/sin(eta) is replaced by the derivative
    form N'(eta_m)/cos(eta_m), eta_m = (eta + pi)/2, which is second-order
    accurate in pi - eta and exact at eta = pi. Returns (factor, exponent
    eta_eff^2/4t) with factor shaped (nodes, etas).
    """
    y = y[:, None]
    out = []
    for e in eta:
        if e == 0:
            out.append((y / (2 * t), 0.0))
        elif math.pi - e < NEAR_PI:
            em = 0.5 * (e + math.pi)
            if mp:
                em = (gmpy2.mpfr(float(e)) + gmpy2.const_pi()) / 2
            w = em / (2 * t)
            f = ((y / (2 * t)) * ar.cos(w * y) + w * ar.sin(w * y)) / ar.cos(em)
            out.append((f, em * em / (4 * t)))
        else:
            ev = gmpy2.mpfr(float(e)) if mp else e
            out.append((ar.sin(ev * y / (2 * t)) / ar.sin(ev), ev * ev / (4 * t)))
    return out


def _y_cutoff(n, t, r, eta, tiny):
    """Upper integration limit from a scan of the absolute integrand envelope."""
    ycap = 80.0
    y = np.linspace(0, ycap, 801)[1:]
    with np.errstate(over="ignore", under="ignore"):
        _, qa, _, _ = q_series(n, t, math.cos(r) * np.cosh(y), logscale=-y * y / (4 * t))
        # |sin(eta y/2t)/sin eta| grows at most linearly in y
        s = y / (2 * t) + 1
        lenv = np.log(np.sinh(y)) + np.log(s) + np.log(np.maximum(qa, 1e-300))
    lenv = np.where(qa > 0, lenv, -np.inf)
    top = int(np.argmax(lenv))
    below = np.nonzero(lenv[top:] < lenv[top] + math.log(tiny))[0]
    if below.size == 0:
        return ycap
    return float(y[top + below[0]]) + 1.0


def _integral_fixed_r(n, t, r, etas, spec, bits=None, tiny=1e-22):
    """p_t(r, eta_j) for one r and several eta via a shared y-quadrature.

    Returns (values, error_estimates, l1) as float arrays; l1 is the
    integral of the absolute integrand (roundoff scale).
    """
    etas = np.asarray(etas, dtype=float)
    pref = math.exp(-t) / math.sqrt(math.pi * t)
    y_max = _y_cutoff(n, t, r, etas, tiny)
    e_eff = np.where(math.pi - etas < NEAR_PI, 0.5 * (etas + math.pi), etas)
    omega = float(e_eff.max()) / (2 * t)
    cr = math.cos(r)
    if bits is None:
        def parts(y):
            with np.errstate(over="ignore", under="ignore", invalid="ignore"):
                qv, qa, _, _ = q_series(n, t, cr * np.cosh(y), logscale=-y * y / (4 * t))
                sh = np.sinh(y)
                cols, acols = [], []
                for fac, ex in _fiber_factor(etas, y, t):
                    g = math.exp(ex)
                    cols.append(sh[:, None] * fac * (g * qv)[:, None])
                    acols.append(sh[:, None] * np.abs(fac) * (g * qa)[:, None])
            return (np.nan_to_num(np.concatenate(cols, axis=1)),
                    np.nan_to_num(np.concatenate(acols, axis=1)))

        n_init = int(max(4, y_max * omega / math.pi + y_max / math.sqrt(4 * t)))
        res = integrate_finite(lambda y: parts(y)[0], 0.0, y_max, spec.with_(abs_tol=1e-300),
                               n_init=n_init)
        # roundoff scale: integral of |sinh * factor| * (sum of |q terms|); the
        # absolute values have kinks, so a fixed fine grid is used instead of
        # adaptive refinement (only the order of magnitude matters)
        yg = np.linspace(0.0, y_max, 4001)
        a = np.trapezoid(parts(yg)[1], yg, axis=0)
        e = res.error_estimate + (100 * np.finfo(float).eps + tiny) * np.maximum(a, res.l1)
        return pref * res.value, pref * e, pref * np.maximum(a, res.l1)

    with ar.working_precision(bits):
        def g(y):
            qv, _, _, _ = q_series(n, t, gmpy2.mpfr(cr) * ar.cosh(y), bits=bits,
                                   logscale=-y * y / (4 * gmpy2.mpfr(float(t))))
            sh = ar.sinh(y)
            cols = []
            for fac, ex in _fiber_factor(etas, y, gmpy2.mpfr(float(t)), mp=True):
                cols.append(sh[:, None] * fac * (gmpy2.exp(ex) * qv)[:, None])
            return np.concatenate(cols, axis=1)

        h = min(2.0, 3 * math.sqrt(4 * t))
        z = math.e * omega * h / 4
        order = max(40, int(2.2 * z) + bits // 8)
        res = integrate_mp(g, 0.0, y_max, bits, h, order=order - 12)
        v = ar.to_float(res.value) * pref
        l1 = ar.to_float(res.l1)
        e = (ar.to_float(res.error_estimate) + (2.0 ** -bits + tiny) * l1) * pref
        return v, e, ar.to_float(res.l1) * pref


def p_t_integral(params, t, r, eta, spec=None, precision="auto", rel_target=1e-10,
                 t_floor=INTEGRAL_T_FLOOR):
    """Heat kernel p_t(r, eta) from the SL(2) integral representation.

    Points sharing an r value share one vector-valued quadrature. See
    p_t_spectral for the meaning of ``precision``.
    """
    n = as_n(params)
    if t < t_floor:
        raise SeriesDivergenceGuard(f"integral route refuses t={t} below floor {t_floor}")
    spec = spec or default_spec()
    scalar_in = np.ndim(r) == 0 and np.ndim(eta) == 0
    rr, ee = _check_point(r, eta)
    shape = rr.shape
    rr, ee = rr.ravel(), ee.ravel()
    val = np.empty(rr.size)
    err = np.empty(rr.size)
    bits_used = np.full(rr.size, 53)
    evals = 0
    forced = None if precision in ("auto", "double", None) else int(precision)
    for rv in np.unique(rr):
        idx = np.nonzero(rr == rv)[0]
        et = ee[idx]
        if forced is not None:
            v, e, a = _integral_fixed_r(n, t, rv, et, spec, bits=forced, tiny=2.0 ** -forced)
            bits_used[idx] = forced
        else:
            v, e, a = _integral_fixed_r(n, t, rv, et, spec)
            if precision == "auto":
                cond = a / np.maximum(np.abs(v), np.finfo(float).tiny)
                redo = ar.needs_extended(cond, rel_target) | (e > rel_target * np.abs(v))
                b = 0
                rounds = 0
                while redo.any() and rounds < 4:
                    c = float(cond[redo].max())
                    b = max(ar.bits_for(c, rel_target, margin_bits=40), b + 32)
                    v2, e2, _ = _integral_fixed_r(n, t, rv, et[redo], spec, bits=b,
                                                  tiny=rel_target / c * 1e-6)
                    v[redo], e[redo] = v2, e2
                    bits_used[idx[redo]] = b
                    # the double pass misjudges cond when it lost every digit
                    new_cond = a[redo] / np.maximum(np.abs(v2), np.finfo(float).tiny)
                    cond[redo] = new_cond
                    still = (ar.bits_for(new_cond, rel_target, margin_bits=40) > b) | (
                        rel_target / new_cond * 1e-6 < rel_target / c * 1e-6 * 1e-3)
                    redo[redo] = still
                    rounds += 1
        val[idx], err[idx] = v, e + np.finfo(float).eps * np.abs(v)
    val, err = val.reshape(shape), err.reshape(shape)
    if scalar_in:
        return KernelEval(float(val), float(err), {"bits": int(bits_used[0])})
    return KernelEval(val, err, {"bits": bits_used.reshape(shape), "quad_evaluations": evals})


# ---------------------------------------------------------------------------
# SL(2) semigroup, CR kernel, intertwining

def sl2_semigroup_apply(f, t, eta, spec=None, c_est=1.0):
    """(e^{t Delta_SL2} f)(eta) for a vectorized f of at most exponential growth.

    Uses sinh(eta r/2t) e^{-(r^2+eta^2)/4t} = (e^{-(r-eta)^2/4t} - e^{-(r+eta)^2/4t})/2
    so nothing overflows; eta = 0 takes the limit r/2t of the quotient.
    """
    if t <= 0 or eta < 0:
        raise DomainError("need t > 0 and eta >= 0")
    spec = spec or default_spec()
    w = math.sqrt(4 * t)
    r_max = eta + spec.tail_cutoff_sigma * w + 4 * t * (1 + max(c_est, 0.0)) + 1.0

    def g(r):
        fr = np.asarray(f(r), dtype=float)
        if eta == 0:
            k = np.sinh(r) * (r / (2 * t)) * np.exp(-r * r / (4 * t))
        else:
            k = np.sinh(r) / math.sinh(eta) * 0.5 * (np.exp(-(r - eta) ** 2 / (4 * t))
                                                     - np.exp(-(r + eta) ** 2 / (4 * t)))
        return k * fr

    res = integrate_finite(g, 0.0, r_max, spec, n_init=max(4, int(r_max / w)),
                           breakpoints=[eta] if 0 < eta < r_max else None)
    return math.exp(-t) / math.sqrt(math.pi * t) * float(res.value)


def _cr_series(n, t, r, theta, trunc, derivative=False):
    """p_t^{CR}(r, theta) on S^{4n+1} (or its theta-derivative), +-m paired."""
    lt = -math.log(trunc.term_tol) + 30
    m_cap = int(lt / (4 * n * t) + 40)
    k_cap = int(math.sqrt(lt / (4 * t)) + 20)
    if max(m_cap, k_cap) > trunc.max_index:
        raise SeriesDivergenceGuard(f"CR series needs more than {trunc.max_index} indices")
    ks = np.arange(k_cap + 1)[:, None].astype(float)
    ms = np.arange(m_cap + 1)[None, :].astype(float)
    lam = 4 * ks * (ks + ms + 2 * n) + 4 * ms * n
    lb = gammaln(ks + ms + 2 * n) - gammaln(2 * n) - gammaln(ks + ms + 1)
    lcoef = (gammaln(2 * n) - math.log(2) - (2 * n + 1) * math.log(math.pi)
             + np.log(2 * ks + ms + 2 * n) + lb - lam * t)
    coef = np.exp(lcoef) * np.where(ms > 0, 2.0, 1.0)
    r = np.atleast_1d(np.asarray(r, float))
    theta = np.atleast_1d(np.asarray(theta, float))
    J = jacobi_p_all(k_cap, 2.0 * n - 1, ms.T, np.cos(2 * r)[None, :])   # (K+1, M+1, P)
    crm = np.cos(r)[None, :] ** ms.T
    mt = ms.T * theta[None, :]
    ang = -ms.T * np.sin(mt) if derivative else np.cos(mt)
    term = coef[:, :, None] * J * (crm * ang)[None, :, :]
    return term.sum(axis=(0, 1)), np.abs(term).sum(axis=(0, 1))


def p_cr_t(n_cr, t, r, theta, trunc=None):
    """Subelliptic kernel of the CR sphere S^{4 n_cr + 1} at (r, theta)."""
    n = as_n(n_cr)
    if t <= 0:
        raise DomainError("t must be positive")
    trunc = trunc or Truncation()
    scalar_in = np.ndim(r) == 0 and np.ndim(theta) == 0
    th = np.asarray(theta, float)
    if np.any((th <= -np.pi - 1e-15) | (th > np.pi + 1e-15)):
        raise DomainError("theta must lie in (-pi, pi]")
    r, th = np.broadcast_arrays(np.asarray(r, float), th)
    v, a = _cr_series(n, t, r.ravel(), th.ravel(), trunc)
    e = 8 * np.finfo(float).eps * a * 10
    if scalar_in:
        return KernelEval(float(v[0]), float(e[0]), {})
    return KernelEval(v.reshape(r.shape), e.reshape(r.shape), {})


def intertwine_rhs(params, t, r, eta, trunc=None):
    """-(e^{4nt} / (2 pi sin eta cos r)) d/d theta p_t^{CR}(r, theta) at theta = eta."""
    n = as_n(params)
    trunc = trunc or Truncation()
    r = np.atleast_1d(np.asarray(r, float))
    eta = np.atleast_1d(np.asarray(eta, float))
    d, _ = _cr_series(n, t, r, eta, trunc, derivative=True)
    return -math.exp(4 * n * t) / (2 * math.pi * np.sin(eta) * np.cos(r)) * d


def intertwine_check(params, t, r, eta, trunc=None):
    """Relative residual between the CR-derived expression and p_t(r, eta)."""
    if not 0 < eta < math.pi or not 0 <= r < math.pi / 2:
        raise DomainError("intertwining needs eta in (0, pi) and r in [0, pi/2)")
    lhs = float(intertwine_rhs(params, t, r, eta, trunc)[0])
    p = p_t_spectral(params, t, r, eta, trunc).value
    return abs(lhs - p) / abs(p)
