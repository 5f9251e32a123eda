import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from hopfheat.errors import DomainError, SeriesDivergenceGuard
from hopfheat.riemannian import q_t
from hopfheat.sphere_kernel import (cyl_measure_density, intertwine_check, p_cr_t, p_t_integral,
                                    p_t_spectral, sl2_semigroup_apply, sphere_volume)

# confirmed by both routes at 300 bits
GOLDEN = [
    (1, 0.1, 0.0, math.pi, 7.346463667193718e-09),
    (2, 0.1, 1.2, math.pi, 0.002093716507797054),
    (1, 0.1, 0.7, 2.4, 6.302919157578598e-06),
]


@pytest.mark.parametrize("n,t,r,eta,want", GOLDEN)
def test_golden_both_routes(n, t, r, eta, want):
    assert p_t_spectral(n, t, r, eta).value == pytest.approx(want, rel=1e-9)
    assert p_t_integral(n, t, r, eta).value == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize("n,t,r,eta", [(1, 0.5, 0.4, 1.0), (1, 1.0, 0.3, 0.5), (2, 0.5, 0.7, 2.0)])
def test_cross_representation(n, t, r, eta):
    a = p_t_spectral(n, t, r, eta)
    b = p_t_integral(n, t, r, eta)
    assert a.value == pytest.approx(b.value, rel=1e-6)
    assert a.error_estimate >= 0 and b.error_estimate >= 0


@pytest.mark.parametrize("n,t", [(1, 0.3), (2, 0.6)])
def test_pole_reduction(n, t):
    # at r = eta = 0: sum alpha_{k,m} e^{-lambda t} (m+1) binom(2n-1+k, k), summed in mpmath
    mp.mp.dps = 30
    pre = mp.gamma(2 * n) / (2 * mp.pi ** (2 * n + 2))
    s = mp.mpf(0)
    for m in range(200):
        for k in range(60):
            lam = 4 * (k * (k + 2 * n + m + 1) + n * m)
            s += (pre * (2 * k + m + 2 * n + 1) * (m + 1) * mp.binomial(k + m + 2 * n, 2 * n - 1)
                  * mp.exp(-lam * t) * (m + 1) * mp.binomial(2 * n - 1 + k, k))
    assert p_t_spectral(n, t, 0.0, 0.0).value == pytest.approx(float(s), rel=1e-12)
    assert p_t_integral(n, t, 0.0, 0.0).value == pytest.approx(float(s), rel=1e-10)


def test_diagonal_integrand_direct_quadrature():
    n, t = 1, 0.5
    f = lambda y: math.sinh(y) * y / (2 * t) * math.exp(-y * y / (4 * t)) * q_t(n, t, math.cosh(y)).value
    val = math.exp(-t) / math.sqrt(math.pi * t) * quad(f, 0, 30, epsabs=0, epsrel=1e-12, limit=400)[0]
    assert p_t_integral(n, t, 0.0, 0.0).value == pytest.approx(val, rel=1e-9)


@pytest.mark.parametrize("n", [1, 2])
def test_long_time_constant(n):
    vol = quad(lambda r: quad(lambda e: cyl_measure_density(n, r, e), 0, math.pi)[0], 0, math.pi / 2)[0]
    assert vol == pytest.approx(sphere_volume(n), rel=1e-10)
    R, E = np.meshgrid([0.0, 0.5, 1.4], [0.0, 1.0, math.pi])
    vals = p_t_spectral(n, 10.0, R, E).value
    np.testing.assert_allclose(vals, 1 / vol, rtol=1e-8)


def test_measure_density():
    assert cyl_measure_density(1, math.pi / 4, math.pi / 2) == pytest.approx(math.pi ** 3, rel=1e-14)
    assert cyl_measure_density(2, 0.0, 0.5) == 0.0
    assert cyl_measure_density(1, 0.3, math.pi) == pytest.approx(0.0, abs=1e-30)


def test_forced_precision_matches_auto():
    a = p_t_spectral(1, 0.2, 0.5, 2.0).value
    b = p_t_spectral(1, 0.2, 0.5, 2.0, precision=200).value
    assert a == pytest.approx(b, rel=1e-10)


def test_vectorized_matches_scalar():
    R, E = np.meshgrid([0.1, 0.9], [0.3, 2.9])
    v = p_t_spectral(2, 0.4, R, E).value
    for i in range(2):
        for j in range(2):
            assert v[i, j] == pytest.approx(p_t_spectral(2, 0.4, R[i, j], E[i, j]).value, rel=1e-14)


def test_floors_and_domain():
    with pytest.raises(SeriesDivergenceGuard):
        p_t_spectral(1, 0.005, 0.3, 0.3)
    with pytest.raises(DomainError):
        p_t_spectral(1, 0.5, 1.6, 0.3)
    with pytest.raises(DomainError):
        p_t_integral(1, 0.5, 0.3, 3.5)


@pytest.mark.parametrize("t,eta", [(0.3, 0.7), (1.5, 2.0), (0.3, 0.0)])
def test_semigroup_fixes_constants(t, eta):
    assert sl2_semigroup_apply(lambda r: np.ones_like(r), t, eta) == pytest.approx(1.0, rel=1e-9)


def test_semigroup_cosh_fixed_grid_oracle():
    t, eta = 0.2, 0.5
    y = np.linspace(0, 12, 1_000_001)
    g = (np.sinh(y) * np.sinh(eta * y / (2 * t)) / np.sinh(eta) * np.exp(-(y * y + eta * eta) / (4 * t))
         * np.cosh(y))
    oracle = math.exp(-t) / math.sqrt(math.pi * t) * np.trapezoid(g, y)
    val = sl2_semigroup_apply(np.cosh, t, eta)
    assert val == pytest.approx(oracle, rel=1e-9)
    assert val == pytest.approx(2.0546684710110403, rel=1e-12)


def test_cr_kernel_even_and_equilibrium():
    a = p_cr_t(1, 1.0, 0.5, 0.3).value
    assert a == pytest.approx(p_cr_t(1, 1.0, 0.5, -0.3).value, rel=1e-14)
    # (k, m) = (0, 0) term: Gamma(2n+1)/(2 pi^{2n+1})
    assert p_cr_t(1, 20.0, 0.4, 1.1).value == pytest.approx(1 / math.pi ** 3, rel=1e-12)
    assert p_cr_t(2, 20.0, 0.4, 1.1).value == pytest.approx(24 / (2 * math.pi ** 5), rel=1e-12)


@pytest.mark.parametrize("n,t,r,eta", [(1, 0.8, 0.4, 1.2), (1, 0.8, 0.0, 0.9), (2, 1.0, 0.6, 2.0)])
def test_intertwining(n, t, r, eta):
    assert intertwine_check(n, t, r, eta) < 1e-6


@settings(max_examples=25, deadline=None)
@given(n=st.sampled_from([1, 2]), t=st.floats(0.3, 1.5), r=st.floats(0.0, 1.4), eta=st.floats(0.0, math.pi))
def test_property_positive_and_consistent(n, t, r, eta):
    a = p_t_spectral(n, t, r, eta).value
    b = p_t_integral(n, t, r, eta).value
    assert a > 0
    assert a == pytest.approx(b, rel=1e-6)
