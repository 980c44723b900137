r"""Modified Bessel functions :math:`I_0, I_1, K_0, K_1, K_2` for real positive arguments.

Two regimes are used:

* :math:`x \le 2`: ascending power series (Abramowitz & Stegun 9.6.10/9.6.11),
  which converge to machine precision in fewer than 20 terms.
* :math:`x > 2`: Steed's continued fraction (Temme's CF2) for the pair
  :math:`K_0, K_1`, which converges in a few dozen iterations at ``x = 2`` and
  faster beyond.

``K_2`` follows from the recurrence :math:`K_2 = K_0 + 2K_1/x`.

For the hot loops of the boundary-element code, ``k0_fast``/``k012_fast``
replace the continued fraction by piecewise Chebyshev interpolants of
:math:`\sqrt{x} e^x K_{0,1}(x)` on geometrically growing panels, generated at
import time from the continued fraction itself.

All scalar kernels are compiled with numba and exposed as ufunc-style array
functions. The functions ``k0_regular`` and ``i0`` support singularity
subtraction in the boundary-element quadrature:

.. math::
    K_0(x) = -\ln(x/2)\, I_0(x) + R(x),

where :math:`R` is an even, entire function of :math:`x`.
"""
import math

import numpy as np
from numba import njit, vectorize
from numpy.polynomial import chebyshev as _cheb

EULER_GAMMA = 0.57721566490153286061
_SERIES_SWITCH = 2.0
_EPS = 1e-16
# exp(-x) underflows to zero in double precision beyond this
_UNDERFLOW = 745.0


@njit(cache=True)
def _i0_series(x):
    t = 0.25 * x * x
    term = 1.0
    s = 1.0
    k = 0
    while True:
        k += 1
        term *= t / (k * k)
        s += term
        if term < _EPS * s:
            break
    return s


@njit(cache=True)
def _i1_series(x):
    t = 0.25 * x * x
    term = 0.5 * x
    s = term
    k = 0
    while True:
        k += 1
        term *= t / (k * (k + 1))
        s += term
        if term < _EPS * s:
            break
    return s


@njit(cache=True)
def _k0_regular_series(x):
    # R(x) = K0(x) + ln(x/2) I0(x) = sum_k (x^2/4)^k / (k!)^2 * psi(k+1)
    t = 0.25 * x * x
    term = 1.0
    harm = 0.0
    s = -EULER_GAMMA
    k = 0
    while True:
        k += 1
        term *= t / (k * k)
        harm += 1.0 / k
        inc = term * (harm - EULER_GAMMA)
        s += inc
        if abs(inc) < _EPS * max(abs(s), 1e-300) and k > 2:
            break
    return s


@njit(cache=True)
def _k1_series(x):
    t = 0.25 * x * x
    lx = math.log(0.5 * x)
    # psi(k+1) + psi(k+2) at k = 0
    psi_a = -EULER_GAMMA
    psi_b = 1.0 - EULER_GAMMA
    term = 1.0
    s = psi_a + psi_b
    k = 0
    while True:
        k += 1
        term *= t / (k * (k + 1))
        psi_a += 1.0 / k
        psi_b += 1.0 / (k + 1)
        inc = term * (psi_a + psi_b)
        s += inc
        if abs(inc) < _EPS * abs(s) and k > 2:
            break
    return 1.0 / x + lx * _i1_series(x) - 0.25 * x * s


@njit(cache=True)
def _k01_scaled_cf2(x):
    """Return (e^x K0(x), e^x K1(x)) for x > 2 by Steed's method."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    delh = d
    h = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10000):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    k0s = math.sqrt(math.pi / (2.0 * x)) / s
    k1s = k0s * (x + 0.5 - a1 * h) / x
    return k0s, k1s


@njit(cache=True)
def _k0(x):
    if x <= _SERIES_SWITCH:
        return _k0_regular_series(x) - math.log(0.5 * x) * _i0_series(x)
    if x > _UNDERFLOW:
        return 0.0
    k0s, _ = _k01_scaled_cf2(x)
    return k0s * math.exp(-x)


@njit(cache=True)
def _k1(x):
    if x <= _SERIES_SWITCH:
        return _k1_series(x)
    if x > _UNDERFLOW:
        return 0.0
    _, k1s = _k01_scaled_cf2(x)
    return k1s * math.exp(-x)


@njit(cache=True)
def k012_scalar(x):
    """(K0, K1, K2) at a single positive ``x``; shared CF2 evaluation."""
    if x <= _SERIES_SWITCH:
        k0 = _k0_regular_series(x) - math.log(0.5 * x) * _i0_series(x)
        k1 = _k1_series(x)
    elif x > _UNDERFLOW:
        return 0.0, 0.0, 0.0
    else:
        k0s, k1s = _k01_scaled_cf2(x)
        e = math.exp(-x)
        k0 = k0s * e
        k1 = k1s * e
    return k0, k1, k0 + 2.0 * k1 / x


@vectorize(["float64(float64)"], cache=True)
def _k0_ufunc(x):
    if x <= 0.0:
        return math.nan
    return _k0(x)


@vectorize(["float64(float64)"], cache=True)
def _k1_ufunc(x):
    if x <= 0.0:
        return math.nan
    return _k1(x)


@vectorize(["float64(float64)"], cache=True)
def _i0_ufunc(x):
    return _i0_series(abs(x))


@vectorize(["float64(float64)"], cache=True)
def _k0_regular_ufunc(x):
    if x <= _SERIES_SWITCH:
        return _k0_regular_series(abs(x))
    return _k0(x) + math.log(0.5 * x) * _i0_series(x)


def _check_positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("modified Bessel K requires x > 0")
    return x


def bessel_k(order, x):
    """Modified Bessel function of the second kind, ``K_order(x)``.

    Parameters
    ----------
    order : {0, 1, 2}
    x : float or array_like
        Strictly positive argument.

    Returns
    -------
    float or ndarray
    """
    x = _check_positive(x)
    if order == 0:
        out = _k0_ufunc(x)
    elif order == 1:
        out = _k1_ufunc(x)
    elif order == 2:
        out = _k0_ufunc(x) + 2.0 * _k1_ufunc(x) / x
    else:
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    return out[()] if out.ndim == 0 else out


def k0(x):
    return bessel_k(0, x)


def k1(x):
    return bessel_k(1, x)


def i0(x):
    """Modified Bessel function of the first kind ``I_0(x)`` (series; use for moderate x)."""
    out = _i0_ufunc(np.asarray(x, dtype=float))
    return out[()] if out.ndim == 0 else out


def k0_regular(x):
    """Smooth remainder ``K0(x) + ln(x/2) I0(x)``; finite at ``x = 0``."""
    out = _k0_regular_ufunc(np.asarray(x, dtype=float))
    return out[()] if out.ndim == 0 else out


_CHEB_RATIO = 1.6
_CHEB_DEGREE = 14


def _build_chebyshev_tables():
    edges = [_SERIES_SWITCH]
    while edges[-1] < _UNDERFLOW:
        edges.append(edges[-1] * _CHEB_RATIO)
    xc = np.cos(np.pi * (np.arange(_CHEB_DEGREE + 1) + 0.5) / (_CHEB_DEGREE + 1))
    c0 = np.empty((len(edges) - 1, _CHEB_DEGREE + 1))
    c1 = np.empty_like(c0)
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        z = lo + 0.5 * (hi - lo) * (xc + 1.0)
        vals = np.array([_k01_scaled_cf2(t) for t in z]) * np.sqrt(z)[:, None]
        c0[i] = _cheb.chebfit(xc, vals[:, 0], _CHEB_DEGREE)
        c1[i] = _cheb.chebfit(xc, vals[:, 1], _CHEB_DEGREE)
    return np.array(edges), c0, c1


_CHEB_EDGES, _CHEB_K0, _CHEB_K1 = _build_chebyshev_tables()
_LOG_RATIO = math.log(_CHEB_RATIO)


@njit(cache=True)
def _clenshaw(c, x):
    b1 = 0.0
    b2 = 0.0
    x2 = 2.0 * x
    for k in range(c.shape[0] - 1, 0, -1):
        b1, b2 = x2 * b1 - b2 + c[k], b1
    return x * b1 - b2 + c[0]


@njit(cache=True)
def _scaled_panel(z, edges, coef0, coef1):
    i = int(math.log(z / edges[0]) / _LOG_RATIO)
    if i >= edges.shape[0] - 1:
        i = edges.shape[0] - 2
    if z < edges[i]:
        i -= 1
    elif z > edges[i + 1]:
        i += 1
    lo = edges[i]
    hi = edges[i + 1]
    x = (2.0 * z - lo - hi) / (hi - lo)
    rs = 1.0 / math.sqrt(z)
    return _clenshaw(coef0[i], x) * rs, _clenshaw(coef1[i], x) * rs


@njit(cache=True)
def k0_fast(z):
    """K0 for z > 0 using the Chebyshev tables above x = 2."""
    if z <= _SERIES_SWITCH:
        return _k0_regular_series(z) - math.log(0.5 * z) * _i0_series(z)
    if z > _UNDERFLOW:
        return 0.0
    k0s, _ = _scaled_panel(z, _CHEB_EDGES, _CHEB_K0, _CHEB_K1)
    return k0s * math.exp(-z)


@njit(cache=True)
def k012_fast(z):
    """(K0, K1, K2) for z > 0 using the Chebyshev tables above x = 2."""
    if z <= _SERIES_SWITCH:
        k0 = _k0_regular_series(z) - math.log(0.5 * z) * _i0_series(z)
        k1 = _k1_series(z)
    elif z > _UNDERFLOW:
        return 0.0, 0.0, 0.0
    else:
        k0s, k1s = _scaled_panel(z, _CHEB_EDGES, _CHEB_K0, _CHEB_K1)
        e = math.exp(-z)
        k0 = k0s * e
        k1 = k1s * e
    return k0, k1, k0 + 2.0 * k1 / z


