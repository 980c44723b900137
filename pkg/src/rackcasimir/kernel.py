"""Free-space fundamental solution of the 2D modified Helmholtz operator.

``g0`` solves ``(Laplacian - mu^2) g0 = delta``, hence

    g0(mu, x, y) = -K0(mu |x - y|) / (2 pi).

The sign matters: the renormalized Green function is ``G - g0`` and a sign
slip here flips the boundary data of the whole boundary-element problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import bessel_k

COINCIDENCE_TOL = 1e-14
INV_2PI = 1.0 / (2.0 * math.pi)


class CoincidentPointsError(ValueError):
    pass


def spectral_parameter(q, m=0.0):
    """``mu = sqrt(q^2 + m^2)``; rejects ``mu == 0``."""
    mu = np.sqrt(np.asarray(q, dtype=float) ** 2 + m * m)
    if np.any(mu <= 0):
        raise ValueError("spectral parameter mu must be positive (q = m = 0 is excluded)")
    return mu


def _separation(x, y):
    r_vec = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.linalg.norm(r_vec, axis=-1)
    if np.any(r < COINCIDENCE_TOL):
        raise CoincidentPointsError("kernel evaluated at coincident points")
    return r_vec, r


def g0(mu: float, x, y):
    """Free-space Green function ``-K0(mu r) / (2 pi)``; broadcasts over leading axes."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    _, r = _separation(x, y)
    return -INV_2PI * bessel_k(0, mu * r)


@dataclass(frozen=True)
class KernelDerivatives:
    value: np.ndarray
    grad_x: np.ndarray
    grad_y: np.ndarray
    mixed: np.ndarray  # mixed[..., i, j] = d/dx_i d/dy_j g0


def g0_derivs(mu: float, x, y) -> KernelDerivatives:
    """Value, gradients and mixed Hessian ``d2 g0 / dx_i dy_j`` in closed form.

    With ``z = mu r`` and ``e = (x - y) / r``::

        grad_x  =  mu K1(z) e / (2 pi)
        mixed   = -mu^2 / (2 pi) * (K1(z)/z * I - K2(z) e e^T)
    """
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    r_vec, r = _separation(x, y)
    z = mu * r
    k0, k1, k2 = bessel_k(0, z), bessel_k(1, z), bessel_k(2, z)
    e = r_vec / np.asarray(r)[..., None]
    value = -INV_2PI * k0
    grad_x = (mu * INV_2PI * k1)[..., None] * e
    eye = np.eye(2)
    hess = (mu * mu * INV_2PI) * (
        (k1 / z)[..., None, None] * eye - k2[..., None, None] * e[..., :, None] * e[..., None, :]
    )
    return KernelDerivatives(value, grad_x, -grad_x, -hess)
