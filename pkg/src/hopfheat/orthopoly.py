"""Jacobi and Gegenbauer polynomials by three-term recurrence.

All evaluators accept arbitrary real arguments (no clamping to [-1, 1]):
the integral representation of the sphere kernel needs Gegenbauer values
at cos r cosh y >= 1. The ``*_all`` variants return every degree up to a
cutoff and are precision generic, so they also run on mpfr object arrays.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

SMALL_SIN = 1e-8


@dataclass(frozen=True)
class JacobiIndex:
    k: int
    alpha: float
    beta: float

    def __post_init__(self):
        if self.k < 0 or int(self.k) != self.k:
            raise ValueError(f"degree must be a non-negative integer, got {self.k}")
        if self.alpha <= -1 or self.beta <= -1:
            raise ValueError("alpha and beta must exceed -1")


@dataclass(frozen=True)
class GegenbauerIndex:
    m: int
    lam: float

    def __post_init__(self):
        if self.m < 0 or int(self.m) != self.m:
            raise ValueError(f"degree must be a non-negative integer, got {self.m}")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")


def jacobi_p_all(K, alpha, beta, x):
    """P_0 .. P_K of P_k^{(alpha, beta)}(x), stacked along a new leading axis.

    ``alpha``, ``beta`` and ``x`` broadcast against each other, so one call
    can sweep a whole family of beta values (e.g. beta = m + 1 for many m).
    Works on float arrays and on mpfr object arrays alike.
    """
    x = np.asarray(x) if not isinstance(x, np.ndarray) else x
    # coefficients stay in float: for integer indices they are exact
    # integers, so dividing mpfr values by them adds no extra rounding
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    one = (x * 0 + 1) * np.ones(np.broadcast(a, b).shape)
    out = [one]
    if K >= 1:
        out.append((a + 1) * one + (a + b + 2) * (x - 1) / 2)
    for k in range(2, K + 1):
        s = 2 * k + a + b
        c1 = 2 * k * (k + a + b) * (s - 2)
        c2a = (s - 1) * s * (s - 2)
        c2b = (s - 1) * (a * a - b * b)
        c3 = 2 * (k + a - 1) * (k + b - 1) * s
        out.append(((c2a * x + c2b) * out[-1] - c3 * out[-2]) / c1)
    return np.stack(out)


def jacobi_p(k, alpha, beta, x):
    """Jacobi polynomial P_k^{(alpha, beta)}(x) in the Rodrigues normalization."""
    JacobiIndex(k, alpha, beta)
    x = np.asarray(x, dtype=float)
    v = jacobi_p_all(k, float(alpha), float(beta), x)[-1]
    return v if v.ndim else float(v)


def jacobi_norm_sq(k, alpha, beta):
    """Squared L2 norm of P_k^{(alpha, beta)} against (1-x)^alpha (1+x)^beta on [-1, 1]."""
    JacobiIndex(k, alpha, beta)
    ab = alpha + beta
    if k == 0:
        # closed form of the k = 0 case avoids Gamma(ab + 1) at ab = -1
        return float(np.exp((ab + 1) * np.log(2) + gammaln(alpha + 1)
                            + gammaln(beta + 1) - gammaln(ab + 2)))
    lg = ((ab + 1) * np.log(2) - np.log(2 * k + ab + 1)
          + gammaln(k + alpha + 1) + gammaln(k + beta + 1)
          - gammaln(k + 1) - gammaln(k + ab + 1))
    return float(np.exp(lg))


def gegenbauer_c_all(M, lam, x):
    """C_0 .. C_M of the Gegenbauer family C_m^{lam}(x), stacked on axis 0."""
    x = np.asarray(x) if not isinstance(x, np.ndarray) else x
    one = x * 0 + 1
    out = [one]
    if M >= 1:
        out.append(2 * lam * x)
    for m in range(2, M + 1):
        out.append((2 * x * (m + lam - 1) * out[-1] - (m + 2 * lam - 2) * out[-2]) / m)
    return np.stack(out)


def gegenbauer_c(m, lam, x):
    """Gegenbauer polynomial C_m^{lam}(x), C_1 = 2 lam x normalization."""
    GegenbauerIndex(m, lam)
    x = np.asarray(x, dtype=float)
    v = gegenbauer_c_all(m, float(lam), x)[-1]
    return v if v.ndim else float(v)


def vertical_character(m, eta):
    """sin((m+1) eta) / sin(eta), the SU(2) zonal character, on [0, pi].

    Removable singularities at eta = 0 and eta = pi are filled by their
    second-order Taylor expansions when |sin eta| < 1e-8.
    """
    m = np.asarray(m)
    eta = np.asarray(eta, dtype=float)
    if np.any((eta < 0) | (eta > np.pi)):
        raise ValueError("eta must lie in [0, pi]")
    m, eta = np.broadcast_arrays(m, eta)
    s = np.sin(eta)
    near0 = (np.abs(s) < SMALL_SIN) & (eta < np.pi / 2)
    nearpi = (np.abs(s) < SMALL_SIN) & (eta >= np.pi / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sin((m + 1) * eta) / s
    eps = np.where(nearpi, np.pi - eta, eta)
    lim = (m + 1) * (1 - m * (m + 2) * eps ** 2 / 6)
    out = np.where(near0, lim, out)
    out = np.where(nearpi, np.where(m % 2 == 0, 1, -1) * lim, out)
    return out if out.ndim else float(out)


def chebyshev_u_all(M, c):
    """U_0 .. U_M at c = cos(eta); U_m(cos eta) = sin((m+1) eta)/sin(eta).

    Recurrence form of ``vertical_character`` with no endpoint singularity;
    used inside the kernels, including under extended precision.
    """
    one = c * 0 + 1
    out = [one]
    if M >= 1:
        out.append(2 * c)
    for _ in range(2, M + 1):
        out.append(2 * c * out[-1] - out[-2])
    return np.stack(out)
