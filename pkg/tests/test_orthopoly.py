import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from scipy.special import eval_chebyu, eval_gegenbauer, eval_jacobi, roots_jacobi

from hopfheat.orthopoly import (GegenbauerIndex, JacobiIndex, chebyshev_u_all, gegenbauer_c,
                                gegenbauer_c_all, jacobi_norm_sq, jacobi_p, jacobi_p_all,
                                vertical_character)
from hopfheat.validation import rodrigues_jacobi

# exact rationals from sympy.jacobi / sympy.gegenbauer
GOLDEN = [
    (3, 1, 2, 0.3, -1163 / 2000),
    (5, 0.5, 3, -0.7, -544358381 / 163840000),
]


@pytest.mark.parametrize("k,a,b,x,want", GOLDEN)
def test_jacobi_golden(k, a, b, x, want):
    assert jacobi_p(k, a, b, x) == pytest.approx(want, rel=1e-13)


def test_gegenbauer_golden_outside_interval():
    assert gegenbauer_c(6, 3, 1.3) == pytest.approx(4449.793728, rel=1e-13)
    assert gegenbauer_c(4, 5, 0.2) == pytest.approx(-0.008, rel=1e-12)


@pytest.mark.parametrize("a,b", [(1, 2), (3, 1), (1, 5)])
def test_recurrence_matches_rodrigues(a, b):
    xs = np.linspace(-1, 1, 33)
    P = jacobi_p_all(10, a, b, xs)
    for k in range(11):
        np.testing.assert_allclose(P[k], rodrigues_jacobi(k, a, b)(xs), rtol=1e-10, atol=1e-10)


def test_recurrence_matches_scipy_noninteger():
    xs = np.linspace(-1, 1, 21)
    P = jacobi_p_all(15, 0.7, 2.3, xs)
    for k in range(16):
        np.testing.assert_allclose(P[k], eval_jacobi(k, 0.7, 2.3, xs), rtol=1e-11, atol=1e-11)


def test_beta_family_broadcast():
    betas = np.arange(1.0, 6.0)[:, None]
    xs = np.linspace(-0.9, 0.9, 7)[None, :]
    P = jacobi_p_all(6, 1.0, betas, xs)
    for i, b in enumerate(betas[:, 0]):
        np.testing.assert_allclose(P[:, i, :], jacobi_p_all(6, 1.0, b, xs[0]), rtol=1e-14)


@pytest.mark.parametrize("a,b", [(1.0, 2.0), (3.0, 4.0), (0.5, 0.5)])
def test_orthogonality_gauss_jacobi(a, b):
    K = 14
    x, w = roots_jacobi(K + 2, a, b)
    P = jacobi_p_all(K, a, b, x)
    G = (P * w) @ P.T
    norms = np.array([jacobi_norm_sq(k, a, b) for k in range(K + 1)])
    np.testing.assert_allclose(G / np.sqrt(np.outer(norms, norms)), np.eye(K + 1), atol=1e-8)


def test_norm_k0_beta_minus_alpha():
    # k = 0 with alpha + beta = -1 would hit Gamma(0) in the general formula
    assert jacobi_norm_sq(0, -0.5, -0.5) == pytest.approx(math.pi, rel=1e-14)


def test_gegenbauer_matches_scipy():
    xs = np.array([-1.0, -0.3, 0.4, 1.0, 1.7, 3.0])
    C = gegenbauer_c_all(9, 2.5, xs)
    for m in range(10):
        np.testing.assert_allclose(C[m], eval_gegenbauer(m, 2.5, xs), rtol=1e-12)


def test_chebyshev_u_and_character():
    eta = np.linspace(0.05, np.pi - 0.05, 17)
    U = chebyshev_u_all(8, np.cos(eta))
    for m in range(9):
        np.testing.assert_allclose(U[m], eval_chebyu(m, np.cos(eta)), rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(vertical_character(m, eta), U[m], rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("m", [0, 1, 4, 7])
def test_character_endpoint_limits(m):
    assert vertical_character(m, 0.0) == m + 1
    assert vertical_character(m, math.pi) == (-1) ** m * (m + 1)
    assert vertical_character(m, 1e-9) == pytest.approx(m + 1, rel=1e-12)


def test_index_validation():
    with pytest.raises(ValueError):
        JacobiIndex(-1, 0.0, 0.0)
    with pytest.raises(ValueError):
        JacobiIndex(2, -1.0, 0.0)
    with pytest.raises(ValueError):
        GegenbauerIndex(2, 0.0)
    with pytest.raises(ValueError):
        vertical_character(1, 4.0)


def test_mpfr_path_agrees_with_double():
    import gmpy2
    xs = np.array([gmpy2.mpfr(v) for v in (-0.4, 0.2, 0.9)], dtype=object)
    with gmpy2.context(gmpy2.get_context(), precision=120):
        P = jacobi_p_all(8, 3.0, 4.0, xs)
    np.testing.assert_allclose(np.array(P[-1], dtype=float), jacobi_p(8, 3, 4, [-0.4, 0.2, 0.9]), rtol=1e-13)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(0, 12), a=st.floats(0, 6), b=st.floats(0, 6), x=st.floats(-1, 1))
def test_reflection_symmetry(k, a, b, x):
    lhs = jacobi_p(k, a, b, -x)
    rhs = (-1) ** k * jacobi_p(k, b, a, x)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(k=st.integers(0, 15), a=st.floats(0, 8), b=st.floats(0, 8))
def test_value_at_one(k, a, b):
    want = math.exp(math.lgamma(k + a + 1) - math.lgamma(k + 1) - math.lgamma(a + 1))
    assert jacobi_p(k, a, b, 1.0) == pytest.approx(want, rel=1e-11)


def test_sympy_oracle_spot():
    x = sympy.Symbol("x")
    expr = sympy.jacobi(4, 2, 3, x)
    f = sympy.lambdify(x, expr, "numpy")
    xs = np.linspace(-1, 1, 9)
    np.testing.assert_allclose(jacobi_p(4, 2, 3, xs), f(xs), rtol=1e-12, atol=1e-12)
