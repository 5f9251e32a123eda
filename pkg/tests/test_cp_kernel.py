import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from hopfheat.cp_kernel import (cp_measure_constant, cp_measure_density, h_t_integral, h_t_intertwined,
                                h_t_spectral)
from hopfheat.errors import DomainError, SeriesDivergenceGuard

GOLDEN = 0.01624249824940799   # h_t at n=1, t=0.5, r=0.4, phi=0.6 (three routes agree)


def test_golden_three_routes():
    assert h_t_spectral(1, 0.5, 0.4, 0.6).value == pytest.approx(GOLDEN, rel=1e-10)
    assert h_t_intertwined(1, 0.5, 0.4, 0.6).value == pytest.approx(GOLDEN, rel=1e-8)
    assert h_t_integral(1, 0.5, 0.4, 0.6).value == pytest.approx(GOLDEN, rel=1e-8)


@pytest.mark.parametrize("n,t,r,phi", [(1, 0.3, 0.2, 1.0), (2, 0.6, 0.7, 0.3), (1, 1.0, 0.0, 0.0)])
def test_spectral_vs_intertwined(n, t, r, phi):
    a = h_t_spectral(n, t, r, phi).value
    b = h_t_intertwined(n, t, r, phi).value
    assert a == pytest.approx(b, rel=1e-8)


@pytest.mark.parametrize("n", [1, 2])
def test_measure_volume_matches_equilibrium(n):
    c = cp_measure_constant(n)
    mass = quad(lambda r: np.sin(r) ** (4 * n - 1) * np.cos(r) ** 3, 0, math.pi / 2)[0] * \
        quad(lambda p: math.sin(2 * p), 0, math.pi / 2)[0]
    # total volume equals the reciprocal of the (0, 0) eigen-coefficient
    sigma00 = math.gamma(2 * n) / (4 * math.pi ** (2 * n + 2)) * (2 * n + 1) * math.comb(2 * n, 2 * n - 1)
    assert c * mass == pytest.approx(1 / sigma00, rel=1e-13)
    if n == 1:
        assert c == pytest.approx(8 * math.pi ** 4, rel=1e-15)


@pytest.mark.parametrize("n", [1, 2])
def test_kernel_has_unit_mass(n):
    t = 0.5
    xr, wr = np.polynomial.legendre.leggauss(64)
    r = math.pi / 4 * (xr + 1)
    p = math.pi / 4 * (xr + 1)
    R, P = np.meshgrid(r, p, indexing="ij")
    vals = h_t_spectral(n, t, R, P).value * cp_measure_density(n, R, P)
    mass = (math.pi / 4) ** 2 * np.einsum("i,j,ij->", wr, wr, vals)
    assert mass == pytest.approx(1.0, rel=1e-10)


def test_equilibrium():
    R, P = np.meshgrid([0.0, 0.5, 1.3], [0.1, 0.8, 1.5])
    np.testing.assert_allclose(h_t_spectral(1, 10.0, R, P).value, 6 / (4 * math.pi ** 4), rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(t=st.floats(0.2, 2.0), r=st.floats(0.0, 1.5), phi=st.floats(0.0, math.pi / 2))
def test_property_reflection_and_positivity(t, r, phi):
    a = h_t_spectral(1, t, r, phi)
    b = h_t_spectral(1, t, r, math.pi - phi)
    assert a.value > 0
    assert a.value == pytest.approx(b.value, rel=1e-10)
    assert b.diagnostics["phi_beyond_half_pi"] == (math.pi - phi > math.pi / 2)


def test_domain_and_floor():
    with pytest.raises(SeriesDivergenceGuard):
        h_t_spectral(1, 0.005, 0.3, 0.3)
    with pytest.raises(DomainError):
        h_t_spectral(1, 0.5, math.pi / 2, 0.3)
    with pytest.raises(DomainError):
        h_t_intertwined(1, 0.5, 0.3, -0.1)
