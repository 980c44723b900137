"""Renormalized stress components from the spectral integral of ``G_ren``.

For each spectral node ``mu(q) = sqrt(q^2 + m^2)`` the integrands are

    i11 = 1/2 D11 - 1/2 D22 - 1/2 mu^2 G_ren(x, x)
    i12 = 1/2 D12

with ``D_ij = d/dx_i d/dy_j G_ren(x, y)`` at ``y = x``. The stress is the
weighted integral over ``q`` with weight ``1/pi`` (two spatial dimensions) or
``sqrt(q^2 + m^2) / (2 pi)`` (three spatial dimensions, translation
invariance along the third axis).

Sign and normalization of the returned stress: ``G_ren`` here is built from
the Green function of ``Laplacian - mu^2``, which is minus the two-point
function of the field, so ``T11 = -int w i11`` and ``T12 = <d1 phi d2 phi> =
-int w D12 = -2 int w i12``. With this, ``T11`` between flat plates equals the
(negative, attractive) Casimir pressure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_kronrod

DIMENSIONS = ("2d", "3d")


class QuadratureError(RuntimeError):
    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


@dataclass(frozen=True)
class StressConfig:
    """Physics and spectral-quadrature controls.

    ``q_panels`` geometric panels on ``[0, q_max_factor / gap]`` are refined by
    bisection (up to ``q_max_panels``) until the Gauss-Kronrod error is below
    ``q_tol`` relative to the largest component.
    """

    dimensionality: str = "2d"
    mass: float = 0.0
    q_panels: int = 5
    q_order: int = 3
    q_tol: float = 1e-3
    q_max_panels: int = 10
    q_max_factor: float = 16.0

    def __post_init__(self):
        if self.dimensionality not in DIMENSIONS:
            raise ValueError(f"dimensionality must be one of {DIMENSIONS}")
        if not self.mass >= 0:
            raise ValueError(f"mass must be >= 0, got {self.mass}")
        if self.q_panels < 2:
            raise ValueError("q_panels must be >= 2")
        if self.q_max_panels < self.q_panels:
            raise ValueError("q_max_panels must be >= q_panels")
        if not self.q_tol > 0:
            raise ValueError("q_tol (truncation threshold) must be positive")
        if self.q_order < 1 or not self.q_max_factor > 0:
            raise ValueError("q_order >= 1 and q_max_factor > 0 required")


@dataclass(frozen=True)
class StressSample:
    point: tuple
    t11: float
    t12: float
    quadrature_error_estimate: float


def spectral_weight(q, mass: float, dimensionality: str):
    q = np.asarray(q, dtype=float)
    if dimensionality == "2d":
        return np.full_like(q, 1.0 / math.pi)
    if dimensionality == "3d":
        return np.sqrt(q * q + mass * mass) / (2.0 * math.pi)
    raise ValueError(f"unknown dimensionality {dimensionality!r}")


def spectral_nodes(q_max: float, cfg: StressConfig):
    """Initial geometric panel breakpoints ``0, q_max 2^-(P-1), ..., q_max``."""
    inner = q_max * 2.0 ** -np.arange(cfg.q_panels - 1, -1, -1)
    return np.concatenate([[0.0], inner])


def integrate_spectral(integrand, q_max: float, cfg: StressConfig, gap: float, n_checked=None):
    """Adaptive Gauss-Kronrod integral of a vector-valued ``integrand(q)`` on ``[0, q_max]``.

    Returns ``(value, error)``, where ``error`` holds the Kronrod-minus-Gauss
    differences (conservative) plus an exponential tail bound ``|f(q_last)| / (2 gap)``.
    Only the first ``n_checked`` components drive refinement. Nodes are
    interior to every panel, so ``q = 0`` is never sampled.
    """
    xk, wk, wg = gauss_kronrod(cfg.q_order)
    cache = {}

    def panel(a, b):
        key = (a, b)
        if key not in cache:
            q = 0.5 * (a + b) + 0.5 * (b - a) * xk
            f = np.array([integrand(qq) for qq in q])
            half = 0.5 * (b - a)
            kr = half * wk @ f
            # |K - G| bounds the Gauss error; the Kronrod value is far better
            err = np.abs(kr - half * wg @ f)
            cache[key] = (kr, err, f[-1], q[-1])
        return cache[key]

    edges = list(spectral_nodes(q_max, cfg))
    panels = [(a, b) for a, b in zip(edges[:-1], edges[1:])]
    while True:
        results = [panel(a, b) for a, b in panels]
        value = np.sum([r[0] for r in results], axis=0)
        errs = np.array([r[1] for r in results])
        nc = len(value) if n_checked is None else n_checked
        scale = max(float(np.max(np.abs(value[:nc]))), 1e-300)
        worst = np.max(errs[:, :nc], axis=1)
        if np.sum(worst) <= cfg.q_tol * scale:
            break
        if len(panels) >= cfg.q_max_panels:
            total = np.sum(errs, axis=0)
            raise QuadratureError(
                f"spectral quadrature did not reach tolerance {cfg.q_tol:g} within "
                f"{cfg.q_max_panels} panels (achieved {np.sum(worst) / scale:.3g})",
                value,
                total,
            )
        i = int(np.argmax(worst))
        a, b = panels[i]
        m = 0.5 * (a + b)
        panels[i : i + 1] = [(a, m), (m, b)]
    last_f, last_q = results[-1][2], results[-1][3]
    tail = np.abs(last_f) * math.exp(-2.0 * gap * (q_max - last_q)) / (2.0 * gap)
    return value, np.sum(errs, axis=0) + tail


def t_integrand(op, x, mu):
    """Integrands ``(i11, i12)`` at interior point(s) ``x`` for operator ``op`` at ``mu``."""
    value, D = op.eval_gren_mixed(x)
    value = np.asarray(value)
    D = np.asarray(D)
    i11 = 0.5 * D[..., 0, 0] - 0.5 * D[..., 1, 1] - 0.5 * mu * mu * value
    # D is symmetric for the exact G_ren; averaging removes collocation asymmetry
    i12 = 0.25 * (D[..., 0, 1] + D[..., 1, 0])
    return i11, i12


def physical_stress(i11_integral, i12_integral):
    """Map weighted integrals of ``(i11, i12)`` to ``(T11, T12)``."""
    return -i11_integral, -2.0 * i12_integral


def q_upper_limit(cfg: StressConfig, gap: float) -> float:
    return cfg.q_max_factor / gap


def stress_at(op_provider, x, cfg: StressConfig) -> StressSample:
    """Renormalized ``T11`` and ``T12`` at an interior point.

    ``op_provider(mu)`` returns an operator with ``eval_gren_mixed``; it must
    also expose ``distance_to(points)`` (distance to the nearest plate), which
    sets the spectral cutoff.
    """
    x = np.asarray(x, dtype=float)
    gap = float(op_provider.distance_to(x[None, :])[0])
    m = cfg.mass

    def integrand(q):
        mu = math.sqrt(q * q + m * m)
        i11, i12 = t_integrand(op_provider(mu), x, mu)
        w = float(spectral_weight(q, m, cfg.dimensionality))
        return np.array([w * float(i11), w * float(i12)])

    value, err = integrate_spectral(integrand, q_upper_limit(cfg, gap), cfg, gap, n_checked=1)
    t11, t12 = physical_stress(value[0], value[1])
    return StressSample(
        (float(x[0]), float(x[1])), float(t11), float(t12), float(max(err[0], 2 * err[1]))
    )
