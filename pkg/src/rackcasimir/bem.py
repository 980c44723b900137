"""Single-layer boundary-element solver for the renormalized Green function.

For a fixed spectral parameter ``mu`` the renormalized Green function
``G_ren(x, y) = G(x, y) - g0(x, y)`` solves the homogeneous modified
Helmholtz equation in the gap with Dirichlet data ``-g0(mu, x, xi)`` on the
plates. It is represented as a single-layer potential

    G_ren(x, y) = sum_j  int_{elem j} sigma(xi) g0(mu, y, xi) dxi

with midpoint collocation. On each element the density is a polynomial
reconstructed from the element's own nodal value and those of its two
neighbours on the same straight edge (degree 1 or 2); elements touching a
corner or a curve end fall back to a constant. Columns of the collocation
matrix therefore collect contributions from up to three elements.

In discrete form ``G_ren(x, y) = k(y)^T A^{-1} b(x)`` with
``b_c(x) = -g0(mu, x, node_c)``, so mixed derivatives
``d/dx_i d/dy_j G_ren`` only need analytic derivatives of ``k`` and ``b``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.linalg import lapack, lu_factor, lu_solve

from .geometry import BoundaryMesh
from .quadrature import gauss_legendre, log_gauss
from .special import _i0_series, _k0_regular_series, k0_fast, k012_fast

logger = logging.getLogger(__name__)

INV_2PI = 1.0 / (2.0 * math.pi)
CONDITION_LIMIT = 1e12
# pairs with mu * distance beyond this contribute below 1e-20 and are skipped
_FAR_CUTOFF = 46.0
# elements closer than this many lengths are integrated on sub-panels
_NEAR_FACTOR = 2.0
_NEAR_PANELS = 4
_EVAL_NEAR_PANELS = 8
_GAUSS_ORDER = 8
# lower Gauss orders for well-separated, well-resolved elements
_TIER_ORDERS = (8, 4, 3)
_TIER_DIST = (3.0, 10.0)
_TIER_MUH = (2.0, 1.0)


class BEMError(RuntimeError):
    pass


class SingularMatrixError(BEMError):
    pass


class SourceTooCloseError(ValueError):
    """Interior point within one element length of a plate."""


@njit(cache=True)
def _basis(deg, t, out):
    # Lagrange polynomials on nodes t = -2, 0, 2 (neighbour midpoints in
    # local coordinates of equal-length elements)
    if deg == 2:
        out[0] = 0.125 * t * (t - 2.0)
        out[1] = 1.0 - 0.25 * t * t
        out[2] = 0.125 * t * (t + 2.0)
    elif deg == 1:
        out[0] = -0.25 * t
        out[1] = 1.0
        out[2] = 0.25 * t
    else:
        out[0] = 0.0
        out[1] = 1.0
        out[2] = 0.0


@njit(cache=True)
def _segment_distance(px, py, sx, sy, tx, ty, h):
    dx = px - sx
    dy = py - sy
    s = dx * tx + dy * ty
    if s < 0.0:
        s = 0.0
    elif s > h:
        s = h
    ex = dx - s * tx
    ey = dy - s * ty
    return math.sqrt(ex * ex + ey * ey)


@njit(cache=True)
def _tier(dist, h, mu):
    muh = mu * h
    if dist < _TIER_DIST[0] * h or muh > _TIER_MUH[0]:
        return 0
    if dist < _TIER_DIST[1] * h or muh > _TIER_MUH[1]:
        return 1
    return 2


def _tier_rules():
    n = max(_TIER_ORDERS)
    x = np.zeros((len(_TIER_ORDERS), n))
    w = np.zeros_like(x)
    for i, order in enumerate(_TIER_ORDERS):
        x[i, :order], w[i, :order] = gauss_legendre(order)
    return x, w, np.array(_TIER_ORDERS, dtype=np.int64)


_RULES = _tier_rules()


@njit(cache=True)
def _k0_regular(z):
    if z <= 2.0:
        return _k0_regular_series(z)
    return k0_fast(z) + math.log(0.5 * z) * _i0_series(z)


@njit(cache=True)
def _assemble(mu, mid, start, tangent, length, degree, stencil, tx_, tw_, tn_, lx, lw):
    n = mid.shape[0]
    A = np.zeros((n, n))
    L = np.zeros(3)
    m = np.zeros(3)
    gx = tx_[0]
    gw = tw_[0]
    ng = tn_[0]
    nl = lx.shape[0]
    for j in range(n):
        h = length[j]
        tx = tangent[j, 0]
        ty = tangent[j, 1]
        cx = mid[j, 0]
        cy = mid[j, 1]
        deg = degree[j]
        for c in range(n):
            px = mid[c, 0]
            py = mid[c, 1]
            m[0] = 0.0
            m[1] = 0.0
            m[2] = 0.0
            if c == j:
                # K0(mu r) = -ln(s) I0 - ln(mu h / 4) I0 + R on each half, r = h s / 2
                lnc = math.log(0.25 * mu * h)
                for side in (-1.0, 1.0):
                    for i in range(nl):
                        s = lx[i]
                        z = 0.5 * mu * h * s
                        _basis(deg, side * s, L)
                        val = lw[i] * _i0_series(z)
                        for k in range(3):
                            m[k] += val * L[k]
                    for i in range(ng):
                        s = 0.5 * (gx[i] + 1.0)
                        z = 0.5 * mu * h * s
                        _basis(deg, side * s, L)
                        val = 0.5 * gw[i] * (_k0_regular(z) - lnc * _i0_series(z))
                        for k in range(3):
                            m[k] += val * L[k]
                scale = -INV_2PI * 0.5 * h
            else:
                dist = _segment_distance(px, py, start[j, 0], start[j, 1], tx, ty, h)
                if mu * dist > _FAR_CUTOFF:
                    continue
                panels = _NEAR_PANELS if dist < _NEAR_FACTOR * h else 1
                tier = _tier(dist, h, mu)
                for p in range(panels):
                    a0 = -1.0 + 2.0 * p / panels
                    hw = 1.0 / panels
                    for i in range(tn_[tier]):
                        t = a0 + hw * (tx_[tier, i] + 1.0)
                        off = 0.5 * h * t
                        rx = px - (cx + off * tx)
                        ry = py - (cy + off * ty)
                        z = mu * math.sqrt(rx * rx + ry * ry)
                        _basis(deg, t, L)
                        val = tw_[tier, i] * hw * k0_fast(z)
                        for k in range(3):
                            m[k] += val * L[k]
                scale = -INV_2PI * 0.5 * h
            for k in range(3):
                col = stencil[j, k]
                if col >= 0:
                    A[c, col] += scale * m[k]
    return A


@njit(cache=True)
def _potential_rows(mu, points, mid, start, tangent, length, degree, stencil, tx_, tw_, tn_):
    """k(y) and its y-gradient for every point: shapes (P, N) and (P, N, 2)."""
    npts = points.shape[0]
    n = mid.shape[0]
    K = np.zeros((npts, n))
    dK = np.zeros((npts, n, 2))
    L = np.zeros(3)
    for p in range(npts):
        px = points[p, 0]
        py = points[p, 1]
        for j in range(n):
            h = length[j]
            tx = tangent[j, 0]
            ty = tangent[j, 1]
            dist = _segment_distance(px, py, start[j, 0], start[j, 1], tx, ty, h)
            if mu * dist > _FAR_CUTOFF:
                continue
            panels = _EVAL_NEAR_PANELS if dist < _NEAR_FACTOR * h else 1
            tier = _tier(dist, h, mu)
            v0 = 0.0
            v1 = 0.0
            v2 = 0.0
            gx0 = 0.0
            gx1 = 0.0
            gx2 = 0.0
            gy0 = 0.0
            gy1 = 0.0
            gy2 = 0.0
            for q in range(panels):
                a0 = -1.0 + 2.0 * q / panels
                hw = 1.0 / panels
                for i in range(tn_[tier]):
                    t = a0 + hw * (tx_[tier, i] + 1.0)
                    off = 0.5 * h * t
                    rx = px - (mid[j, 0] + off * tx)
                    ry = py - (mid[j, 1] + off * ty)
                    r = math.sqrt(rx * rx + ry * ry)
                    k0, k1, _ = k012_fast(mu * r)
                    w = tw_[tier, i] * hw
                    # g0 = -K0/(2pi); d/dy g0(y, xi) = mu K1 (y - xi) / (2 pi r)
                    val = -w * k0
                    gr = w * mu * k1 / r
                    _basis(degree[j], t, L)
                    v0 += val * L[0]
                    v1 += val * L[1]
                    v2 += val * L[2]
                    gx0 += gr * rx * L[0]
                    gx1 += gr * rx * L[1]
                    gx2 += gr * rx * L[2]
                    gy0 += gr * ry * L[0]
                    gy1 += gr * ry * L[1]
                    gy2 += gr * ry * L[2]
            scale = INV_2PI * 0.5 * h
            for k in range(3):
                col = stencil[j, k]
                if col < 0:
                    continue
                if k == 0:
                    K[p, col] += scale * v0
                    dK[p, col, 0] += scale * gx0
                    dK[p, col, 1] += scale * gy0
                elif k == 1:
                    K[p, col] += scale * v1
                    dK[p, col, 0] += scale * gx1
                    dK[p, col, 1] += scale * gy1
                else:
                    K[p, col] += scale * v2
                    dK[p, col, 0] += scale * gx2
                    dK[p, col, 1] += scale * gy2
    return K, dK


@njit(cache=True)
def _source_terms(mu, points, nodes):
    """b_c(x) = -g0(mu, x, node_c) and its x-gradient: (N, P) and (N, P, 2)."""
    npts = points.shape[0]
    n = nodes.shape[0]
    b = np.zeros((n, npts))
    db = np.zeros((n, npts, 2))
    for p in range(npts):
        for c in range(n):
            rx = points[p, 0] - nodes[c, 0]
            ry = points[p, 1] - nodes[c, 1]
            r = math.sqrt(rx * rx + ry * ry)
            z = mu * r
            if z > 700.0:
                continue
            k0, k1, _ = k012_fast(z)
            b[c, p] = INV_2PI * k0
            # d/dx K0(mu |x - node|) = -mu K1 (x - node) / r
            db[c, p, 0] = -INV_2PI * mu * k1 * rx / r
            db[c, p, 1] = -INV_2PI * mu * k1 * ry / r
    return b, db


def stencils(mesh: BoundaryMesh, basis_degree: int):
    """Per-element polynomial degree and column indices ``(prev, self, next)``."""
    n = mesh.size
    idx = np.arange(n)
    prev, nxt = mesh.prev, mesh.next
    interior = (prev >= 0) & (nxt >= 0)
    interior &= mesh.edge[np.maximum(prev, 0)] == mesh.edge
    interior &= mesh.edge[np.maximum(nxt, 0)] == mesh.edge
    degree = np.where(interior, basis_degree, 0).astype(np.int64)
    cols = np.column_stack(
        [np.where(interior, prev, -1), idx, np.where(interior, nxt, -1)]
    ).astype(np.int64)
    if basis_degree == 0:
        cols[:, [0, 2]] = -1
    return degree, cols


def _as_points(x):
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[-1] != 2:
        raise ValueError("points must have two coordinates")
    return np.ascontiguousarray(pts)


@dataclass
class GreenOperator:
    """Factorized collocation system at one spectral parameter."""

    mu: float
    mesh: BoundaryMesh
    basis_degree: int
    lu: tuple = field(repr=False)
    rcond: float
    degree: np.ndarray = field(repr=False)
    stencil: np.ndarray = field(repr=False)

    @property
    def condition_estimate(self) -> float:
        return math.inf if self.rcond == 0 else 1.0 / self.rcond

    @property
    def usable(self) -> bool:
        return self.condition_estimate <= CONDITION_LIMIT

    def _check_points(self, pts):
        d = self.mesh.distance_to(pts)
        limit = float(np.max(self.mesh.length))
        bad = d < limit
        if np.any(bad):
            raise SourceTooCloseError(
                f"point {pts[bad][0]} lies {d[bad][0]:.3g} from a plate, less than one "
                f"element length ({limit:.3g})"
            )

    def source_terms(self, x):
        pts = _as_points(x)
        return _source_terms(self.mu, pts, self.mesh.mid)

    def potential_rows(self, y):
        pts = _as_points(y)
        m = self.mesh
        return _potential_rows(
            self.mu, pts, m.mid, m.start, m.tangent, m.length, self.degree, self.stencil, *_RULES
        )

    def solve_density(self, source) -> np.ndarray:
        """Density ``sigma`` whose single layer equals ``-g0(mu, source, .)`` at the nodes."""
        pts = _as_points(source)
        self._check_points(pts)
        b, _ = _source_terms(self.mu, pts, self.mesh.mid)
        sigma = lu_solve(self.lu, b)
        return sigma[:, 0] if np.ndim(source) == 1 else sigma

    def eval_gren(self, x, y):
        """``G_ren(mu, x, y)`` for interior points ``x`` (source) and ``y``."""
        xs, ys = _as_points(x), _as_points(y)
        self._check_points(xs)
        self._check_points(ys)
        b, _ = _source_terms(self.mu, xs, self.mesh.mid)
        sigma = lu_solve(self.lu, b)
        K, _ = self.potential_rows(ys)
        if len(xs) == len(ys):
            out = np.einsum("pn,np->p", K, sigma)
        else:
            out = K @ sigma
        return out[0] if np.ndim(x) == 1 and np.ndim(y) == 1 else out

    def eval_gren_mixed(self, x):
        """Coincidence value and mixed derivatives at interior point(s).

        Returns ``(value, D)`` with ``D[..., i, j] = d/dx_i d/dy_j G_ren(x, y)``
        at ``y = x``.
        """
        pts = _as_points(x)
        self._check_points(pts)
        npts = len(pts)
        b, db = _source_terms(self.mu, pts, self.mesh.mid)
        rhs = np.concatenate([b, db[:, :, 0], db[:, :, 1]], axis=1)
        sol = lu_solve(self.lu, rhs)
        s0, s1, s2 = sol[:, :npts], sol[:, npts : 2 * npts], sol[:, 2 * npts :]
        K, dK = self.potential_rows(pts)
        value = np.einsum("pn,np->p", K, s0)
        D = np.empty((npts, 2, 2))
        for i, si in enumerate((s1, s2)):
            for j in range(2):
                D[:, i, j] = np.einsum("pn,np->p", dK[:, :, j], si)
        if np.ndim(x) == 1:
            return value[0], D[0]
        return value, D


def assemble(mesh: BoundaryMesh, mu: float, basis_degree: int = 2) -> GreenOperator:
    """Assemble and LU-factorize the collocation matrix at spectral parameter ``mu``."""
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if basis_degree not in (0, 1, 2):
        raise ValueError(f"basis_degree must be 0, 1 or 2, got {basis_degree}")
    A = assembly_matrix(mesh, mu, basis_degree)
    degree, cols = stencils(mesh, basis_degree)
    anorm = np.max(np.sum(np.abs(A), axis=0))
    lu, piv = lu_factor(A, check_finite=True)
    if np.any(np.diag(lu) == 0):
        raise SingularMatrixError(f"collocation matrix is singular at mu={mu}")
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    op = GreenOperator(float(mu), mesh, basis_degree, (lu, piv), float(rcond), degree, cols)
    if not op.usable:
        warnings.warn(
            f"collocation matrix condition estimate {op.condition_estimate:.3g} exceeds "
            f"{CONDITION_LIMIT:.0e} at mu={mu}",
            RuntimeWarning,
            stacklevel=2,
        )
    return op


def assembly_matrix(mesh: BoundaryMesh, mu: float, basis_degree: int = 2) -> np.ndarray:
    """Unfactorized collocation matrix ``A[c, k]`` (exposed for testing)."""
    degree, cols = stencils(mesh, basis_degree)
    lx, lw = log_gauss(_GAUSS_ORDER)
    return _assemble(
        float(mu),
        np.ascontiguousarray(mesh.mid),
        np.ascontiguousarray(mesh.start),
        np.ascontiguousarray(mesh.tangent),
        np.ascontiguousarray(mesh.length),
        degree,
        cols,
        *_RULES,
        np.ascontiguousarray(lx),
        np.ascontiguousarray(lw),
    )
