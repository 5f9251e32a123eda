import math

import numpy as np
import pytest
from scipy.integrate import quad

from hopfheat.errors import DomainError
from hopfheat.riemannian import q_t, q_t_small_time, zonal_normalizer


@pytest.mark.parametrize("n,t", [(1, 0.3), (1, 1.0), (2, 0.5)])
def test_normalization(n, t):
    S = zonal_normalizer(n)
    f = lambda d: q_t(n, t, math.cos(d)).value * math.sin(d) ** (4 * n + 2)
    mass = S * quad(f, 0, math.pi, epsabs=0, epsrel=1e-12, limit=200)[0]
    assert mass == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n", [1, 2])
def test_equilibrium(n):
    # t -> infinity leaves the m = 0 term (2n+1) Gamma(2n+1)/(2 pi^{2n+2}) = 1/vol(S^{4n+3})
    want = math.gamma(2 * n + 2) / (2 * math.pi ** (2 * n + 2))
    vals = q_t(n, 30.0, np.array([-1.0, 0.0, 0.7, 1.0])).value
    np.testing.assert_allclose(vals, want, rtol=1e-12)


@pytest.mark.parametrize("n,delta", [(1, 0.0), (1, 0.5), (2, 1.0)])
def test_small_time_expansion_second_order(n, delta):
    # the two-term expansion leaves an O(t^2) remainder: halving t cuts it ~4x
    err = [abs(q_t(n, t, math.cos(delta)).value / q_t_small_time(n, t, delta) - 1) for t in (0.01, 0.005)]
    assert err[1] < 0.06
    assert err[0] / err[1] > 3.5


def test_small_delta_limit_continuous():
    a = q_t_small_time(1, 0.1, 1e-4 * 0.999)
    b = q_t_small_time(1, 0.1, 1e-4 * 1.001)
    assert a == pytest.approx(b, rel=1e-6)


def test_x_above_one_matches_mp():
    # the integral route feeds x = cos r cosh y > 1; compare scaled double with forced MPFR
    x = np.array([1.5, 4.0, 30.0])
    a = q_t(1, 0.2, x, precision="double").value
    b = q_t(1, 0.2, x, precision=160).value
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_auto_escalates_on_cancellation():
    r = q_t(1, 0.005, math.cos(1.0))
    assert r.diagnostics["bits"] > 53
    assert r.value == pytest.approx(q_t(1, 0.005, math.cos(1.0), precision=256).value, rel=1e-10)


def test_domain():
    with pytest.raises(DomainError):
        q_t(1, -1.0, 0.2)
    with pytest.raises(DomainError):
        q_t(1, 0.5, -1.5)
    with pytest.raises(DomainError):
        q_t_small_time(1, 0.1, math.pi)
