"""Analytic references for flat Dirichlet boundaries.

* single infinite line: one mirror source;
* two parallel lines ``x1 = 0`` and ``x1 = l``: the doubly reflected image
  series;
* closed-form massless Casimir forces between flat plates.

All Green functions follow the kernel convention ``(Laplacian - mu^2) G = delta``
and are renormalized, i.e. the direct free-space term is removed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernel import INV_2PI
from .special import bessel_k

ZETA3 = 1.2020569031595942854
# terms with K0 argument beyond this are below 1e-18 and dropped
_SERIES_CUTOFF = 42.0
_MAX_IMAGES = 2_000_000


class OracleError(ValueError):
    pass


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def mirror(y, plate_point, plate_normal):
    """Reflection of ``y`` across the line through ``plate_point`` with normal ``plate_normal``."""
    n = _unit(plate_normal)
    y = np.asarray(y, dtype=float)
    return y - 2.0 * ((y - plate_point) @ n)[..., None] * n


def halfplane_gren(mu, plate_point, plate_normal, x, y):
    """``+K0(mu |x - y*|) / (2 pi)`` for a single Dirichlet line.

    ``plate_normal`` points into the vacuum side; both points must lie there.
    """
    n = _unit(plate_normal)
    p = np.asarray(plate_point, dtype=float)
    for pt in (x, y):
        if np.any((np.asarray(pt, dtype=float) - p) @ n < 0):
            raise OracleError("points must lie on the vacuum side of the plate")
    ys = mirror(y, p, n)
    r = np.linalg.norm(np.asarray(x, dtype=float) - ys, axis=-1)
    return INV_2PI * bessel_k(0, mu * r)


def _hessian_g0(mu, r_vec):
    r = np.linalg.norm(r_vec, axis=-1)
    z = mu * r
    e = r_vec / r[..., None]
    k1, k2 = bessel_k(1, z), bessel_k(2, z)
    return (mu * mu * INV_2PI) * (
        (k1 / z)[..., None, None] * np.eye(2) - k2[..., None, None] * e[..., :, None] * e[..., None, :]
    )


def halfplane_mixed(mu, plate_point, plate_normal, x):
    """Coincidence value and ``D[i, j] = d/dx_i d/dy_j G_ren`` for a single line."""
    n = _unit(plate_normal)
    p = np.asarray(plate_point, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any((x - p) @ n <= 0):
        raise OracleError("point must lie strictly on the vacuum side of the plate")
    r_vec = x - mirror(x, p, n)
    value = INV_2PI * bessel_k(0, mu * np.linalg.norm(r_vec, axis=-1))
    reflect = np.eye(2) - 2.0 * np.outer(n, n)
    return value, _hessian_g0(mu, r_vec) @ reflect


@dataclass(frozen=True)
class ImageSeriesSetup:
    """Two Dirichlet lines at ``x1 = 0`` and ``x1 = gap``.

    ``truncation`` is the largest image index kept; by default it is the
    smallest count for which every dropped term is below ``1e-12`` of the sum.
    """

    gap: float
    mu: float
    truncation: int | None = None

    def __post_init__(self):
        if not self.gap > 0 or not self.mu > 0:
            raise OracleError("gap and mu must be positive")
        if self.truncation is None:
            n = math.ceil((_SERIES_CUTOFF / self.mu + 2.0 * self.gap) / (2.0 * self.gap)) + 1
            if n > _MAX_IMAGES:
                raise OracleError(
                    f"image series needs {n} terms at mu={self.mu}, gap={self.gap}; "
                    "threshold unreachable"
                )
            object.__setattr__(self, "truncation", n)


def _check_between(setup, *pts):
    for pt in pts:
        x1 = np.asarray(pt, dtype=float)[..., 0]
        if np.any((x1 <= 0) | (x1 >= setup.gap)):
            raise OracleError("points must lie strictly between the plates")


def _series_tail_check(last, total):
    if np.any(np.abs(last) > 1e-12 * np.maximum(np.abs(total), 1e-300)):
        raise OracleError("image series truncated before reaching the 1e-12 threshold")


def parallel_plates_gren(setup: ImageSeriesSetup, x, y):
    """Renormalized Green function between the two lines, for single points."""
    _check_between(setup, x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mu, l, N = setup.mu, setup.gap, setup.truncation
    n = np.arange(-N, N + 1)
    dx2 = (x[1] - y[1]) ** 2
    direct = np.sqrt((x[0] - y[0] - 2.0 * n * l) ** 2 + dx2)
    image = np.sqrt((x[0] + y[0] - 2.0 * n * l) ** 2 + dx2)
    direct = direct[n != 0]
    # G = sum_n [g0(direct_n) - g0(image_n)], g0 = -K0/(2pi)
    terms_d = -INV_2PI * bessel_k(0, mu * direct)
    terms_i = INV_2PI * bessel_k(0, mu * image)
    total = np.sum(terms_d) + np.sum(terms_i)
    _series_tail_check(terms_i[0] + terms_i[-1] + terms_d[0] + terms_d[-1], total)
    return float(total)


def parallel_plates_mixed(setup: ImageSeriesSetup, x):
    """Coincidence value and mixed-derivative matrix between the two lines.

    ``x`` may be a single point or an array of points.
    """
    _check_between(setup, x)
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    mu, l, N = setup.mu, setup.gap, setup.truncation
    c = mu * mu * INV_2PI

    k = np.arange(1, N + 1)
    zd = 2.0 * k * l * mu
    k0d, k1d = bessel_k(0, zd), bessel_k(1, zd)
    # direct images at +-2kl contribute identically
    val_d = -2.0 * INV_2PI * np.sum(k0d)
    d11_d = 2.0 * c * np.sum(k0d + k1d / zd)
    d22_d = -2.0 * c * np.sum(k1d / zd)

    n = np.arange(-N, N + 1)
    zi = mu * np.abs(2.0 * pts[:, :1] - 2.0 * n[None, :] * l)
    k0i, k1i = bessel_k(0, zi), bessel_k(1, zi)
    val = val_d + INV_2PI * np.sum(k0i, axis=1)
    D = np.zeros((len(pts), 2, 2))
    D[:, 0, 0] = d11_d + c * np.sum(k0i + k1i / zi, axis=1)
    D[:, 1, 1] = d22_d + c * np.sum(k1i / zi, axis=1)
    _series_tail_check(k0i[:, 0] + k0i[:, -1] + 2 * k0d[-1], val * 2 * math.pi)
    if np.ndim(x) == 1:
        return float(val[0]), D[0]
    return val, D


class ImageSeriesOperator:
    """Drop-in for a boundary-element operator on two flat plates."""

    def __init__(self, gap: float, mu: float):
        self.setup = ImageSeriesSetup(gap, mu)
        self.mu = mu

    def eval_gren_mixed(self, x):
        return parallel_plates_mixed(self.setup, x)

    def eval_gren(self, x, y):
        return parallel_plates_gren(self.setup, x, y)


class ImageSeriesProvider:
    """``mu -> ImageSeriesOperator`` for plates at ``x1 = 0`` and ``x1 = gap``."""

    def __init__(self, gap: float):
        self.gap = gap

    def __call__(self, mu: float) -> ImageSeriesOperator:
        return ImageSeriesOperator(self.gap, mu)

    def distance_to(self, points) -> np.ndarray:
        x1 = np.atleast_2d(np.asarray(points, dtype=float))[:, 0]
        return np.minimum(x1, self.gap - x1)


def flat_plate_force(dimensionality: str, gap: float, mass: float = 0.0) -> float:
    """Massless Dirichlet Casimir force between flat plates, negative = attraction.

    ``2d``: per unit plate length, ``-zeta(3) / (8 pi l^3)``;
    ``3d``: per unit plate area, ``-pi^2 / (480 l^4)``.
    """
    if mass != 0:
        raise OracleError("closed form available only for the massless field")
    if not gap > 0:
        raise OracleError("gap must be positive")
    if dimensionality == "2d":
        return -ZETA3 / (8.0 * math.pi * gap**3)
    if dimensionality == "3d":
        return -(math.pi**2) / (480.0 * gap**4)
    raise OracleError(f"dimensionality must be '2d' or '3d', got {dimensionality!r}")
