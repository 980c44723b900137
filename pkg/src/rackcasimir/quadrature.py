"""Quadrature rules: Gauss-Legendre, log-weighted Gauss, Gauss-Kronrod, and
composite panel rules built from them."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import roots_genlaguerre


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Nodes and weights on ``[-1, 1]``."""
    x, w = npleg.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def log_gauss(n: int, n_discrete: int = 200):
    """Nodes and weights for ``int_0^1 f(s) (-ln s) ds``.

    Built by the Stieltjes procedure on a discretization of the measure
    (substituting ``s = exp(-y)`` turns it into a generalized Laguerre
    weight, which Gauss-Laguerre resolves to machine precision), followed by
    Golub-Welsch.
    """
    y, w = roots_genlaguerre(n_discrete, 1.0)
    s = np.exp(-y)
    alpha = np.zeros(n)
    beta = np.zeros(n)
    p_prev = np.zeros_like(s)
    p = np.ones_like(s)
    norm_prev = 1.0
    for k in range(n):
        norm = np.sum(w * p * p)
        alpha[k] = np.sum(w * s * p * p) / norm
        if k > 0:
            beta[k] = norm / norm_prev
        p, p_prev = (s - alpha[k]) * p - beta[k] * p_prev, p
        norm_prev = norm
    off = np.sqrt(beta[1:])
    nodes, vecs = np.linalg.eigh(np.diag(alpha) + np.diag(off, 1) + np.diag(off, -1))
    weights = vecs[0] ** 2 * np.sum(w)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def gauss_kronrod(n: int):
    """Kronrod extension of the ``n``-point Gauss rule on ``[-1, 1]``.

    Returns ``(nodes, kronrod_weights, gauss_weights)`` over the ``2n + 1``
    nodes; ``gauss_weights`` is zero at the Kronrod-only nodes.
    """
    xg, wg = npleg.leggauss(n)
    # Stieltjes polynomial E_{n+1} = P_{n+1} + sum_k c_k P_k with
    # int E P_n P_j = 0 for j = 0..n
    xq, wq = npleg.leggauss(3 * n + 4)
    P = np.array([npleg.legval(xq, np.eye(n + 2)[k]) for k in range(n + 2)])
    M = np.einsum("q,kq,q,jq->jk", wq, P[: n + 1], P[n], P[: n + 1])
    rhs = -np.einsum("q,q,q,jq->j", wq, P[n + 1], P[n], P[: n + 1])
    coef = np.linalg.lstsq(M, rhs, rcond=None)[0]
    xk = np.sort(npleg.legroots(np.append(coef, 1.0)).real)
    nodes = np.sort(np.concatenate([xg, xk]))
    V = np.array([npleg.legval(nodes, np.eye(2 * n + 1)[k]) for k in range(2 * n + 1)])
    moments = np.zeros(2 * n + 1)
    moments[0] = 2.0
    wk = np.linalg.solve(V, moments)
    gw = np.zeros_like(nodes)
    for x, w in zip(xg, wg):
        gw[np.argmin(np.abs(nodes - x))] = w
    for arr in (nodes, wk, gw):
        arr.setflags(write=False)
    return nodes, wk, gw


def composite_gauss(a: float, b: float, panels: int, order: int):
    """Composite Gauss-Legendre nodes/weights on ``[a, b]`` with equal panels."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    centre = 0.5 * (edges[:-1] + edges[1:])
    nodes = (centre[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights
