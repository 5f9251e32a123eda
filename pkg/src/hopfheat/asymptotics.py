"""Small-time asymptotics of p_t and h_t, and the sub-Riemannian distance.

Formulas marked "corrected" differ from the published displays; the
published form stays available through ``form="paper"``. Each correction
was derived independently and checked against high-precision kernel
values (see the decision ledger for the derivations and ratio tables).
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import as_n
from .errors import DomainError, NoBracket
from .quadrature import QuadratureSpec, integrate_finite

_Y_MAX = 90.0


def _y_over_sinh(y):
    y = np.asarray(y, dtype=float)
    small = y < 1e-4
    ys = np.where(small, 1.0, y)
    return np.where(small, 1 - y * y / 6, ys / np.sinh(ys))


def _hyp_g(y):
    """(sinh y - y cosh y)/(y^2 sinh y), with its series near 0."""
    y = np.asarray(y, dtype=float)
    small = y < 1e-3
    ys = np.where(small, 1.0, y)
    exact = (1 - ys / np.tanh(ys)) / (ys * ys)
    return np.where(small, -1 / 3 + y * y / 45, exact)


def compute_An_Bn(params, spec=None, form="corrected"):
    """(A_n, B_n) of the diagonal expansion p_t(0,0) ~ (4 pi t)^{-(2n+3)} (A_n + B_n t).

    ``form="corrected"`` uses +2n(2n+1) g(y) inside B_n, the sign obtained by
    expanding the integral representation at r = eta = 0; ``form="paper"``
    uses the published minus sign.
    """
    n = as_n(params)
    if form not in ("corrected", "paper"):
        raise ValueError("form must be 'corrected' or 'paper'")
    spec = spec or QuadratureSpec(rel_tol=1e-13, abs_tol=1e-300)
    s = 1.0 if form == "corrected" else -1.0

    def f(y):
        base = y * y * _y_over_sinh(y) ** (2 * n)
        return np.stack([base, base * (4 * n * n + 4 * n + s * 2 * n * (2 * n + 1) * _hyp_g(y))], axis=-1)

    res = integrate_finite(f, 0.0, _Y_MAX, spec, n_init=16)
    A, B = 4 * math.pi * res.value
    return float(A), float(B)


def p_asym_diagonal(params, t, form="corrected"):
    n = as_n(params)
    if t <= 0:
        raise DomainError("t must be positive")
    A, B = compute_An_Bn(n, form=form)
    return math.exp(-(2 * n + 3) * math.log(4 * math.pi * t)) * (A + B * t)


def p_asym_vertical(params, t, eta, form="corrected"):
    """Leading term of p_t(0, eta) on the vertical cut-locus, eta in (0, pi).

    The corrected form carries the extra factor (1 - eta/2pi)^{2n-1}, which
    comes from the residue of the fiber integrand at y = i pi.
    """
    n = as_n(params)
    if t <= 0:
        raise DomainError("t must be positive")
    if not 0 < eta < math.pi:
        raise DomainError("eta must lie in (0, pi)")
    lg = (-math.log(4 * math.pi * math.sin(eta)) - 6 * n * math.log(2) - (4 * n + 1) * math.log(t)
          - math.lgamma(2 * n) + math.log(math.pi - eta) + (2 * n - 1) * math.log(eta)
          - (2 * math.pi * eta - eta * eta) / (4 * t))
    if form == "corrected":
        lg += (2 * n - 1) * math.log1p(-eta / (2 * math.pi))
    elif form != "paper":
        raise ValueError("form must be 'corrected' or 'paper'")
    return math.exp(lg)


def p_asym_horizontal(params, t, r):
    n = as_n(params)
    if t <= 0:
        raise DomainError("t must be positive")
    if not 0 < r < math.pi / 2:
        raise DomainError("r must lie in (0, pi/2); r = 0 is the diagonal regime")
    lg = (-(2 * n + 1.5) * math.log(4 * math.pi * t) + (2 * n + 1) * math.log(r / math.sin(r))
          - r * r / (4 * t) - 1.5 * math.log(1 - r / math.tan(r)))
    return math.exp(lg)


@dataclass(frozen=True)
class VarphiSolution:
    varphi: float
    u: float
    fpp: float
    residual: float = 0.0


def varphi_equation(phi, r, eta):
    """F(phi) = phi + eta - cos r sin phi arccos(u)/sqrt(1-u^2), u = cos r cos phi."""
    cr = math.cos(r)
    u = cr * math.cos(phi)
    return phi + eta - cr * math.sin(phi) * math.acos(u) / math.sqrt(1 - u * u)


def _psi_equation(psi, r, eps):
    # F(psi - pi) with eta = pi - eps, arranged so nothing cancels near psi = 0
    cr = math.cos(r)
    w = cr * math.cos(psi)
    return psi - eps + cr * math.sin(psi) * (math.pi - math.acos(w)) / math.sqrt(1 - w * w)


def _solve(r, eta):
    """Root as (phi, psi) with psi = phi + pi; psi is exact where phi is near -pi."""
    if eta == 0:
        return 0.0, math.pi
    if eta <= math.pi / 2:
        phi = brentq(varphi_equation, -math.pi, 0.0, args=(r, eta), xtol=1e-300, rtol=1e-15, maxiter=500)
        return phi, phi + math.pi
    eps = math.pi - eta
    if eps == 0:
        return -math.pi, 0.0
    psi = brentq(_psi_equation, 0.0, math.pi, args=(r, eps), xtol=1e-300, rtol=1e-15, maxiter=500)
    return psi - math.pi, psi


def solve_varphi(r, eta):
    """Critical angle of the steepest-descent saddle for the point (r, eta).

    The root is searched on [-pi, 0], the branch whose slope at eta = 0 is
    -1/(1 - r cot r). F(0) = eta >= 0 and F(-pi) = eta - pi <= 0, so the
    bracket always holds for r in (0, pi/2); for eta > pi/2 the equation is
    solved in psi = phi + pi to keep the root accurate near -pi.
    """
    if not 0 < r < math.pi / 2:
        raise NoBracket(f"r={r} outside (0, pi/2): F has no sign change")
    if not 0 <= eta <= math.pi:
        raise DomainError("eta must lie in [0, pi]")
    phi, psi = _solve(r, eta)
    cr = math.cos(r)
    u = cr * math.cos(phi)
    res = abs(varphi_equation(phi, r, eta)) if eta <= math.pi / 2 else abs(_psi_equation(psi, r, math.pi - eta))
    if res > 1e-12:
        raise NoBracket(f"root residual {res:.3e} above 1e-12 at r={r}, eta={eta}")
    return VarphiSolution(phi, u, 2 * math.sin(r) ** 2 / (1 - u * u), res)


def _saddle(r, eta):
    """(phi, u, |phi+eta|/|sin phi|, sin phi / sin eta) with the endpoint limits."""
    if eta < 1e-12:
        eta = 0.0   # the eta -> 0 limits are exact to O(eta); sin(phi) may underflow
    phi, psi = _solve(r, eta)
    u = math.cos(r) * math.cos(phi)
    if eta == 0:
        q = 1 - r / math.tan(r)
        return phi, u, r / math.tan(r), -1 / q
    if eta > math.pi / 2:
        eps = math.pi - eta
        if eps == 0:
            c = 1 / (1 + (math.pi - r) / math.tan(r))
            return phi, u, (1 - c) / c, -c
        return phi, u, abs(psi - eps) / math.sin(psi), -math.sin(psi) / math.sin(eps)
    return phi, u, abs(phi + eta) / abs(math.sin(phi)), math.sin(phi) / math.sin(eta)


def subriemannian_distance(r, eta):
    """d(r, eta) from the pole: sqrt(2 pi eta - eta^2) at r = 0, the saddle formula otherwise."""
    if not 0 <= r < math.pi / 2:
        raise DomainError("r must lie in [0, pi/2)")
    if not 0 <= eta <= math.pi:
        raise DomainError("eta must lie in [0, pi]")
    if r == 0:
        return math.sqrt(2 * math.pi * eta - eta * eta)
    _, _, ratio, _ = _saddle(r, eta)
    return ratio * math.tan(r)


def p_asym_general(params, t, r, eta):
    """Steepest-descent leading term of p_t(r, eta), r in (0, pi/2).

    The displayed expression carries a leading minus sign that cancels
    against sin(phi) < 0 on the root branch; the absolute value is returned.
    At eta = 0 it reduces exactly to ``p_asym_horizontal``.
    """
    n = as_n(params)
    if t <= 0:
        raise DomainError("t must be positive")
    if not 0 < r < math.pi / 2:
        raise DomainError("r must lie in (0, pi/2)")
    _, u, ratio, sratio = _saddle(r, eta)
    au = math.acos(u)
    s1 = math.sqrt(1 - u * u)
    d2 = (ratio * math.tan(r)) ** 2
    lg = (-(2 * n + 1.5) * math.log(4 * math.pi * t) + math.log(abs(sratio) / math.sin(r))
          + (2 * n + 1) * math.log(au) - 0.5 * math.log(1 - u * au / s1)
          - d2 / (4 * t) - n * math.log(1 - u * u))
    return math.exp(lg)


def general_exponent(t, r, eta):
    """The Gaussian exponent d^2/4t used by ``p_asym_general``."""
    _, _, ratio, _ = _saddle(r, eta)
    return (ratio * math.tan(r)) ** 2 / (4 * t)


def _jn(n):
    """int_0^inf y^{2n+1}/sinh^{2n} y dy."""
    f = lambda y: y * _y_over_sinh(y) ** (2 * n)
    return float(integrate_finite(f, 0.0, _Y_MAX, QuadratureSpec(rel_tol=1e-13, abs_tol=1e-300),
                                  n_init=16).value)


def h_asym_diagonal(params, t, form="corrected"):
    """Leading term of h_t(0, 0).

    Corrected: J_n / (2 (4 pi t)^{2n+2}) with J_n = int y^{2n+1}/sinh^{2n} y dy
    (J_1 = 3 zeta(3)/2), from the fiber average of the sphere kernel.
    Paper: 1/((2n-1) 2^{4n+4} pi^{2n} t^{4n+2}).
    """
    n = as_n(params)
    if t <= 0:
        raise DomainError("t must be positive")
    if form == "corrected":
        return _jn(n) / 2 * math.exp(-(2 * n + 2) * math.log(4 * math.pi * t))
    if form == "paper":
        return math.exp(-math.log(2 * n - 1) - (4 * n + 4) * math.log(2) - 2 * n * math.log(math.pi)
                        - (4 * n + 2) * math.log(t))
    raise ValueError("form must be 'corrected' or 'paper'")


def h_asym_vertical(params, t, phi, form="corrected"):
    """Leading term of h_t(0, phi) on the CP vertical cut-locus, phi in (0, pi/2).

    The corrected form multiplies the published one by
    (1 - phi/pi)(1 - phi/2pi)^{2n-1}.
    """
    n = as_n(params)
    if t <= 0:
        raise DomainError("t must be positive")
    s2 = math.sin(2 * phi)
    if not (0 < phi < math.pi / 2) or s2 <= 0:
        raise DomainError("need phi in (0, pi/2) so that sin 2phi > 0")
    lg = (-math.log(2 * math.pi) - math.lgamma(2 * n) - (6 * n + 2) * math.log(2)
          - (4 * n + 0.5) * math.log(t) + (phi * phi - 2 * math.pi * phi) / (4 * t)
          + (2 * n - 1) * math.log(phi) - 0.5 * math.log(s2)
          + 0.5 * math.log(2 * math.pi / (math.pi - phi)))
    if form == "corrected":
        lg += math.log1p(-phi / math.pi) + (2 * n - 1) * math.log1p(-phi / (2 * math.pi))
    elif form != "paper":
        raise ValueError("form must be 'corrected' or 'paper'")
    return math.exp(lg)
