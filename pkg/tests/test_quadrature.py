import math

import gmpy2
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hopfheat.errors import NonConvergence
from hopfheat.quadrature import (_W10, _W21, _X21, QuadratureSpec, default_spec, gauss_legendre_mp,
                                 integrate_finite, integrate_gaussian_tail, integrate_mp)


def test_kronrod_exact_to_degree_31():
    for d in range(32):
        exact = (1 - (-1) ** (d + 1)) / (d + 1)
        assert np.dot(_W21, _X21 ** d) == pytest.approx(exact, abs=1e-14)
    for d in range(20):
        exact = (1 - (-1) ** (d + 1)) / (d + 1)
        assert np.dot(_W10, _X21 ** d) == pytest.approx(exact, abs=1e-14)


def test_smooth_integrals():
    assert integrate_finite(np.sin, 0, math.pi).value == pytest.approx(2.0, rel=1e-12)
    r = integrate_finite(lambda x: np.exp(-x * x), -8, 8, QuadratureSpec(rel_tol=1e-13))
    assert r.value == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    assert r.error_estimate >= 0


def test_endpoint_singularity_converges():
    r = integrate_finite(lambda x: 1 / np.sqrt(x), 0.0, 1.0, QuadratureSpec(rel_tol=1e-7))
    assert r.value == pytest.approx(2.0, rel=1e-6)


def test_vector_valued():
    f = lambda x: np.stack([np.cos(x), x ** 2], axis=-1)
    r = integrate_finite(f, 0, 1)
    np.testing.assert_allclose(r.value, [math.sin(1), 1 / 3], rtol=1e-12)


def test_breakpoints_kink():
    r = integrate_finite(lambda x: np.abs(x - 0.3), 0, 1, breakpoints=[0.3])
    assert r.value == pytest.approx(0.3 ** 2 / 2 + 0.7 ** 2 / 2, rel=1e-14)


def test_nonconvergence_raises():
    with pytest.raises(NonConvergence):
        integrate_finite(lambda x: np.sign(np.sin(1 / np.maximum(x, 1e-300))), 0, 1,
                         QuadratureSpec(rel_tol=1e-14, abs_tol=1e-300, max_depth=6))


def test_gaussian_tail():
    t = 0.3
    r = integrate_gaussian_tail(lambda y: np.ones_like(y), t)
    assert r.value == pytest.approx(math.sqrt(math.pi * t), rel=1e-9)
    r = integrate_gaussian_tail(np.cosh, t, c_est=1.0)
    assert r.value == pytest.approx(math.sqrt(math.pi * t) * math.exp(t), rel=1e-9)


def test_spec_validation_and_env(monkeypatch):
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(tail_cutoff_sigma=3)
    monkeypatch.setenv("HOPFHEAT_QUAD_RELTOL", "1e-6")
    assert default_spec().rel_tol == 1e-6
    monkeypatch.delenv("HOPFHEAT_QUAD_RELTOL")
    assert default_spec().rel_tol == 1e-9


def test_mp_gauss_legendre_exactness():
    xs, ws = gauss_legendre_mp(20, 200)
    with gmpy2.context(gmpy2.get_context(), precision=200):
        for d in (0, 10, 38):
            s = sum(w * x ** d for x, w in zip(xs, ws))
            assert abs(s - gmpy2.mpfr(2) / (d + 1)) < gmpy2.mpfr(2) ** -180


def test_integrate_mp_cancelling():
    # int_0^{2pi} cos(40 x) e^{-x} dx, computed at 160 bits
    def f(x):
        return np.frompyfunc(lambda v: gmpy2.cos(40 * v) * gmpy2.exp(-v), 1, 1)(x)

    with gmpy2.context(gmpy2.get_context(), precision=160):
        r = integrate_mp(f, 0.0, 2 * math.pi, 160, panel_width=0.5, order=40)
    exact = (1 - math.exp(-2 * math.pi)) / (1 + 1600)
    assert float(r.value) == pytest.approx(exact, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(deg=st.integers(0, 12), a=st.floats(-3, 0), w=st.floats(0.1, 4))
def test_polynomials_exact(deg, a, w):
    b = a + w
    r = integrate_finite(lambda x: x ** deg, a, b)
    exact = (b ** (deg + 1) - a ** (deg + 1)) / (deg + 1)
    assert r.value == pytest.approx(exact, rel=1e-11, abs=1e-12)
