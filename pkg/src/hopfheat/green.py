"""Green function of the conformal sub-Laplacian -L + 4n(n+1) on S^{4n+3}.

Closed form in cylindric coordinates, plus its numerical check as the
time transform  int_0^inf p_t(r, eta) e^{-4n(n+1) t} dt.
"""
import math

import numpy as np

from .asymptotics import p_asym_general, p_asym_vertical
from .core import KernelEval, as_n
from .errors import DomainError, PoleSingularity
from .quadrature import QuadratureSpec, integrate_finite
from .sphere_kernel import _check_point, p_t_spectral, sphere_volume

EPS_POLE = 1e-14


def green_sphere(params, r, eta, eps_pole=EPS_POLE):
    """Gamma(n) Gamma(n+1) / (8 pi^{2n+2} (1 - 2 cos r cos eta + cos^2 r)^{n+1})."""
    n = as_n(params)
    rr, ee = _check_point(r, eta)
    # 1 - 2 cos r cos eta + cos^2 r, rearranged to avoid cancellation near the pole
    den = 4 * np.sin(rr / 2) ** 4 + 4 * np.cos(rr) * np.sin(ee / 2) ** 2
    if np.any(den <= eps_pole):
        raise PoleSingularity("Green function evaluated at the pole r = 0, eta = 0")
    v = math.gamma(n) * math.gamma(n + 1) / (8 * math.pi ** (2 * n + 2)) * den ** (-(n + 1))
    return v if v.ndim else float(v)


def _head_bound(n, r, eta, t_min):
    """Bound on int_0^{t_min} p_t e^{-ct} dt from the steepest-descent leading term.

    A factor 2 covers the 1 + O(t) correction over the head window; the
    leading term itself is integrated by fixed Gauss-Legendre in t.
    """
    if r == 0:
        if eta == 0:
            return math.inf
        lead = lambda t: p_asym_vertical(n, t, eta) if eta < math.pi else 0.0
    else:
        lead = lambda t: p_asym_general(n, t, r, eta)
    x, w = np.polynomial.legendre.leggauss(40)
    ts = 0.5 * t_min * (x + 1)
    return 2.0 * 0.5 * t_min * sum(wi * lead(ti) for ti, wi in zip(ts, w))


def green_transform(params, r, eta, t_min=0.02, t_max=20.0, spec=None, rel_target=1e-8):
    """int_0^inf p_t(r, eta) e^{-4n(n+1)t} dt with explicit head and tail handling.

    [t_min, t_max] is integrated adaptively in s = log t with p_t from the
    spectral route. The tail beyond t_max uses the equilibrium value
    1/vol(S^{4n+3}) and the exact exponential integral; the head below
    t_min is bounded (not added) and enters the error estimate.
    """
    n = as_n(params)
    r, eta = float(r), float(eta)
    _check_point(r, eta)
    if not 0 < t_min < t_max:
        raise DomainError("need 0 < t_min < t_max")
    c = 4 * n * (n + 1)
    spec = spec or QuadratureSpec(rel_tol=1e-8, abs_tol=1e-300)

    def f(s):
        ts = np.exp(s)
        p = np.array([p_t_spectral(n, float(t), r, eta, rel_target=rel_target).value for t in ts])
        return ts * p * np.exp(-c * ts)

    res = integrate_finite(f, math.log(t_min), math.log(t_max), spec, n_init=6)
    tail = math.exp(-c * t_max) / (c * sphere_volume(n))
    head = _head_bound(n, r, eta, t_min)
    val = float(res.value) + tail
    err = float(res.error_estimate) + head + tail * 1e-6
    return KernelEval(val, err, {"quad_evaluations": res.evaluations, "head_bound": head, "tail": tail})


def green_transform_check(params, r, eta, t_min=0.02, t_max=20.0, spec=None):
    """Relative residual |time transform - green_sphere| / green_sphere."""
    g = green_sphere(params, r, eta)
    tr = green_transform(params, r, eta, t_min, t_max, spec)
    return abs(tr.value - g) / g
