import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rackcasimir.kernel import CoincidentPointsError, g0, g0_derivs, spectral_parameter

points = st.tuples(st.floats(-2, 2), st.floats(-2, 2))


def test_value_and_sign():
    # -K0(1)/(2 pi)
    assert g0(1.0, [0.0, 0.0], [1.0, 0.0]) == pytest.approx(-0.4210244382407083 / (2 * math.pi), rel=1e-13)


def test_coincident_points_rejected():
    with pytest.raises(CoincidentPointsError):
        g0(1.0, [0.3, 0.2], [0.3, 0.2])


def test_mu_must_be_positive():
    with pytest.raises(ValueError):
        g0(0.0, [0, 0], [1, 0])
    with pytest.raises(ValueError):
        spectral_parameter(0.0, 0.0)
    assert spectral_parameter(3.0, 4.0) == pytest.approx(5.0)


@given(points, points, st.floats(0.05, 20))
def test_symmetry(x, y, mu):
    if math.dist(x, y) < 1e-3:
        return
    assert g0(mu, x, y) == g0(mu, y, x)


def _fd_mixed(mu, x, y, h=1e-4):
    out = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            ei, ej = np.eye(2)[i] * h, np.eye(2)[j] * h
            out[i, j] = (
                g0(mu, x + ei, y + ej) - g0(mu, x + ei, y - ej) - g0(mu, x - ei, y + ej) + g0(mu, x - ei, y - ej)
            ) / (4 * h * h)
    return out


@pytest.mark.parametrize("mu", [0.3, 1.0, 7.0])
def test_derivatives_against_finite_differences(mu):
    x, y = np.array([0.2, -0.1]), np.array([0.9, 0.4])
    d = g0_derivs(mu, x, y)
    h = 1e-6
    fd_grad = [(g0(mu, x + e * h, y) - g0(mu, x - e * h, y)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(d.grad_x, fd_grad, rtol=1e-7)
    np.testing.assert_allclose(d.grad_y, -d.grad_x)
    np.testing.assert_allclose(d.mixed, _fd_mixed(mu, x, y), rtol=1e-5, atol=1e-9)


@given(points, points, st.floats(0.1, 10))
def test_mixed_trace_is_helmholtz(x, y, mu):
    # away from x = y: tr(d_x d_y g0) = -Laplacian g0 = -mu^2 g0
    if math.dist(x, y) < 0.05:
        return
    d = g0_derivs(mu, x, y)
    assert np.trace(d.mixed) == pytest.approx(-mu * mu * d.value, rel=1e-9, abs=1e-300)
