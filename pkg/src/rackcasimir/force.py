"""Force per period from the stress flux through a lateral line in the gap.

The force on the upper plate per period is the flux of the stress tensor
through the line ``{(x0, y0 + w) : 0 <= w <= a}``:

    F_n = int_0^a T11(x0, y0 + w) dw,    F_t = int_0^a T12(x0, y0 + w) dw.

``F_n`` is the transverse (x1) component, negative for attraction; ``F_t``
is the lateral (x2) component. Both dimensionalities come out of the same
spectral loop: only the weight in ``q`` differs.

The spectral loop is outermost: one boundary-element operator is assembled
per spectral node and reused for every point on every requested line.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bem import assemble
from .geometry import (
    LOWER,
    UPPER,
    BoundaryMesh,
    RackGeometry,
    Scene,
    mesh_scene,
    refine,
)
from .quadrature import composite_gauss
from .stress import (
    DIMENSIONS,
    StressConfig,
    integrate_spectral,
    physical_stress,
    q_upper_limit,
    spectral_weight,
    t_integrand,
)

logger = logging.getLogger(__name__)

COMPONENTS = ("normal", "tangential")


class PathError(ValueError):
    """Integration line leaves the gap or comes too close to a plate."""


@dataclass(frozen=True)
class Numerics:
    """Discretization controls shared by all force computations."""

    target_element_size: float = 0.05
    basis_degree: int = 2
    periods_realized: int = 7
    w_panels: int = 8
    w_order: int = 8
    w_tol: float = 1e-3
    w_max_doublings: int = 2
    mesh_error: bool = True
    refinement_factor: int = 2

    def __post_init__(self):
        if not self.target_element_size > 0:
            raise ValueError("target_element_size must be positive")
        if self.basis_degree not in (0, 1, 2):
            raise ValueError("basis_degree must be 0, 1 or 2")
        if self.periods_realized < 3 or self.periods_realized % 2 == 0:
            raise ValueError("periods_realized must be odd and >= 3")
        if self.w_panels < 1 or self.w_order < 1 or self.w_max_doublings < 1:
            raise ValueError("w quadrature needs >= 1 panel, order and doubling")
        if not self.w_tol > 0:
            raise ValueError("w_tol must be positive")
        if int(self.refinement_factor) != self.refinement_factor or self.refinement_factor < 2:
            raise ValueError("refinement_factor must be an integer >= 2")


@dataclass(frozen=True)
class ForcePath:
    x0: float
    y0: float = 0.0
    a: float = 2.0


@dataclass
class ForceCurve:
    v: float
    dimensionality: str
    component: str
    samples: list = field(default_factory=list)  # (s, F per period, error estimate)
    a: float = 2.0

    @property
    def s(self):
        return np.array([p[0] for p in self.samples])

    @property
    def force(self):
        return np.array([p[1] for p in self.samples])

    @property
    def error(self):
        return np.array([p[2] for p in self.samples])

    def per_length(self):
        return self.force / self.a


class OperatorProvider:
    """``mu -> GreenOperator`` for a fixed mesh."""

    def __init__(self, mesh: BoundaryMesh, basis_degree: int = 2):
        self.mesh = mesh
        self.basis_degree = basis_degree
        self.assembled = 0
        self.max_condition = 1.0

    def __call__(self, mu: float):
        self.assembled += 1
        op = assemble(self.mesh, mu, self.basis_degree)
        self.max_condition = max(self.max_condition, op.condition_estimate)
        return op

    def distance_to(self, points):
        return self.mesh.distance_to(points)


def _index(dim, comp):
    return DIMENSIONS.index(dim), COMPONENTS.index(comp)


@dataclass
class PathForces:
    """Forces on several lines, arrays of shape ``(lines, 2 dims, 2 components)``."""

    x0: np.ndarray
    value: np.ndarray
    q_error: np.ndarray
    w_error: np.ndarray
    nodes: int
    rounding: np.ndarray | None = None

    def get(self, dim="2d", comp="normal", line=0):
        d, c = _index(dim, comp)
        return float(self.value[line, d, c])

    def quadrature_error(self, dim="2d", comp="normal", line=0):
        d, c = _index(dim, comp)
        parts = [self.q_error[line, d, c], self.w_error[line, d, c]]
        if self.rounding is not None:
            parts.append(self.rounding[line, d, c])
        return float(max(parts))


def default_x0(scene: Scene) -> float:
    """Middle of the band between the highest lower-plate and lowest upper-plate point."""
    top = float(np.max(scene.curves[LOWER][:, 0]))
    bottom = float(np.min(scene.curves[UPPER][:, 0]))
    return 0.5 * (top + bottom)


def check_path(mesh: BoundaryMesh, scene: Scene, path: ForcePath, samples: int = 257):
    w = np.linspace(0.0, path.a, samples)
    pts = np.column_stack([np.full_like(w, path.x0), path.y0 + w])
    top = np.interp(pts[:, 1], *_profile_height(scene.curves[LOWER]))
    bottom = np.interp(pts[:, 1], *_profile_height(scene.curves[UPPER]))
    if np.any(pts[:, 0] <= top) or np.any(pts[:, 0] >= bottom):
        raise PathError(f"integration line x0={path.x0} leaves the gap")
    d = float(np.min(mesh.distance_to(pts)))
    limit = float(np.max(mesh.length))
    if d < limit:
        raise PathError(
            f"integration line x0={path.x0} passes {d:.3g} from a plate, less than one "
            f"element length ({limit:.3g})"
        )
    return d


def _profile_height(curve):
    # curves are monotone in x2 (positive lateral runs on every edge)
    return curve[:, 1], curve[:, 0]


def _w_levels(path: ForcePath, numerics: Numerics):
    levels = []
    for k in range(numerics.w_max_doublings + 1):
        w, wt = composite_gauss(0.0, path.a, numerics.w_panels * 2**k, numerics.w_order)
        levels.append((w, wt))
    return levels


def path_forces(provider, paths, mass: float, stress_cfg: StressConfig, numerics: Numerics):
    """Forces for every line in ``paths`` (all sharing the same spectral nodes)."""
    levels = [_w_levels(p, numerics) for p in paths]
    dists = [float(np.min(provider.distance_to(np.column_stack([np.full(65, p.x0),
                                                                p.y0 + np.linspace(0, p.a, 65)]))))
             for p in paths]
    gap = min(dists)
    n_lines = len(paths)
    nodes = [0]

    def line_integrals(op, mu):
        out = np.zeros((n_lines, 2, 2))  # (line, value/delta, i11/i12)
        for li, (p, lv) in enumerate(zip(paths, levels)):
            prev = None
            for k, (w, wt) in enumerate(lv):
                pts = np.column_stack([np.full_like(w, p.x0), p.y0 + w])
                i11, i12 = t_integrand(op, pts, mu)
                cur = np.array([wt @ i11, wt @ i12])
                if prev is not None:
                    delta = np.abs(cur - prev)
                    if delta[0] <= numerics.w_tol * abs(cur[0]) or k == len(lv) - 1:
                        out[li, 0] = cur
                        out[li, 1] = delta
                        break
                prev = cur
        return out

    def integrand(q):
        mu = math.sqrt(q * q + mass * mass)
        nodes[0] += 1
        op = provider(mu)
        vals = line_integrals(op, mu)
        w2 = float(spectral_weight(q, mass, "2d"))
        w3 = float(spectral_weight(q, mass, "3d"))
        main = np.concatenate([w2 * vals[:, 0, :], w3 * vals[:, 0, :]], axis=1)
        delta = np.concatenate([w2 * vals[:, 1, :], w3 * vals[:, 1, :]], axis=1)
        # refinement is driven by the normal components only
        return np.concatenate([main[:, [0, 2]].ravel(), main[:, [1, 3]].ravel(), delta.ravel()])

    value, err = integrate_spectral(
        integrand, q_upper_limit(stress_cfg, gap), stress_cfg, gap, n_checked=2 * n_lines
    )
    nl = n_lines
    normal = value[: 2 * nl].reshape(nl, 2)  # (line, dim)
    shear = value[2 * nl : 4 * nl].reshape(nl, 2)
    delta = value[4 * nl :].reshape(nl, 4)  # (line, [2d n, 2d t, 3d n, 3d t])
    normal_err = err[: 2 * nl].reshape(nl, 2)
    shear_err = err[2 * nl : 4 * nl].reshape(nl, 2)

    out = np.zeros((nl, 2, 2))
    q_err = np.zeros_like(out)
    w_err = np.zeros_like(out)
    for d in range(2):
        t11, t12 = physical_stress(normal[:, d], shear[:, d])
        out[:, d, 0], out[:, d, 1] = t11, t12
        q_err[:, d, 0], q_err[:, d, 1] = normal_err[:, d], 2.0 * shear_err[:, d]
        w_err[:, d, 0], w_err[:, d, 1] = delta[:, 2 * d], 2.0 * delta[:, 2 * d + 1]
    # backward-stable solves lose about cond * eps relative to the stress scale
    cond = getattr(provider, "max_condition", 1.0)
    scale = np.abs(out[:, :, :1])
    rounding = np.broadcast_to(cond * np.finfo(float).eps * scale, out.shape).copy()
    return PathForces(np.array([p.x0 for p in paths]), out, q_err, w_err, nodes[0], rounding)


@dataclass
class ForceReport:
    """Forces for both dimensionalities and components with error budget.

    ``value``/``error``: arrays ``(2 dims, 2 components)``; ``parts`` keeps
    the individual absolute deltas (``w``, ``q``, ``mesh``, ``truncation``).
    """

    geometry: RackGeometry | None
    x0: float
    value: np.ndarray
    error: np.ndarray
    parts: dict
    refined_value: np.ndarray | None = None

    def get(self, dim="2d", comp="normal"):
        d, c = _index(dim, comp)
        return float(self.value[d, c])

    def err(self, dim="2d", comp="normal"):
        d, c = _index(dim, comp)
        return float(self.error[d, c])


def scene_and_mesh(geom: RackGeometry, numerics: Numerics, periods=None):
    scene = geom.scene(periods or numerics.periods_realized)
    return scene, mesh_scene(scene, numerics.target_element_size)


def compute_forces(
    geom: RackGeometry,
    stress_cfg: StressConfig,
    numerics: Numerics = Numerics(),
    x0=None,
    y0: float = 0.0,
    truncation_check: bool = False,
) -> ForceReport:
    """Both components in both dimensionalities for one geometry, with errors.

    The error is the maximum of the w- and q-quadrature estimates and, when
    enabled, the mesh-refinement delta (``numerics.mesh_error``) and the
    delta from realizing two more periods (``truncation_check``).
    """
    scene, mesh = scene_and_mesh(geom, numerics)
    if x0 is None:
        x0 = default_x0(scene)
    path = ForcePath(x0, y0, geom.a)
    check_path(mesh, scene, path)
    mass = stress_cfg.mass
    base = path_forces(OperatorProvider(mesh, numerics.basis_degree), [path], mass, stress_cfg, numerics)
    parts = {"w": base.w_error[0], "q": base.q_error[0], "rounding": base.rounding[0]}
    refined_value = None
    if numerics.mesh_error:
        fine = refine(mesh, numerics.refinement_factor)
        ref = path_forces(OperatorProvider(fine, numerics.basis_degree), [path], mass, stress_cfg, numerics)
        refined_value = ref.value[0]
        parts["mesh"] = np.abs(ref.value[0] - base.value[0])
    if truncation_check:
        scene2, mesh2 = scene_and_mesh(geom, numerics, numerics.periods_realized + 2)
        more = path_forces(
            OperatorProvider(mesh2, numerics.basis_degree), [path], mass, stress_cfg, numerics
        )
        parts["truncation"] = np.abs(more.value[0] - base.value[0])
    error = np.max(np.stack(list(parts.values())), axis=0)
    return ForceReport(geom, x0, base.value[0], error, parts, refined_value)


def force_per_period(
    geom: RackGeometry,
    cfg: StressConfig,
    component: str = "normal",
    path: ForcePath | None = None,
    numerics: Numerics = Numerics(),
):
    """``(F, error_estimate)`` for one component at ``cfg.dimensionality``."""
    if component not in COMPONENTS:
        raise ValueError(f"component must be one of {COMPONENTS}")
    x0 = None if path is None else path.x0
    y0 = 0.0 if path is None else path.y0
    rep = compute_forces(geom, cfg, numerics, x0=x0, y0=y0)
    return rep.get(cfg.dimensionality, component), rep.err(cfg.dimensionality, component)


def estimate_error(
    geom: RackGeometry,
    cfg: StressConfig,
    component: str = "normal",
    path: ForcePath | None = None,
    refinement_factor: int = 2,
    numerics: Numerics = Numerics(),
):
    """Relative error from mesh refinement and from realizing two more periods:
    ``max(|F_fine - F|, |F_more - F|) / |F_fine|``."""
    num = replace(numerics, mesh_error=True, refinement_factor=refinement_factor)
    rep = compute_forces(
        geom,
        cfg,
        num,
        x0=None if path is None else path.x0,
        y0=0.0 if path is None else path.y0,
        truncation_check=True,
    )
    d, c = _index(cfg.dimensionality, component)
    delta = max(rep.parts["mesh"][d, c], rep.parts["truncation"][d, c])
    return float(delta / abs(rep.refined_value[d, c]))


def x0_independence(
    geom: RackGeometry,
    cfg: StressConfig,
    component: str,
    x0_list,
    numerics: Numerics = Numerics(),
):
    """Largest pairwise difference of F across lines ``x0_list``, relative to max |F|."""
    scene, mesh = scene_and_mesh(geom, numerics)
    paths = [ForcePath(x0, 0.0, geom.a) for x0 in x0_list]
    for p in paths:
        check_path(mesh, scene, p)
    res = path_forces(OperatorProvider(mesh, numerics.basis_degree), paths, cfg.mass, cfg, numerics)
    d, c = _index(cfg.dimensionality, component)
    vals = res.value[:, d, c]
    return float((np.max(vals) - np.min(vals)) / np.max(np.abs(vals)))


def sweep_forces(geom: RackGeometry, s_grid, cfg: StressConfig, numerics: Numerics = Numerics(), map_fn=map):
    """One :func:`compute_forces` report per shift (in ``s_grid`` order)."""
    s_grid = [float(s) for s in s_grid]
    if any(not (0 <= s < geom.a) for s in s_grid):
        raise ValueError("s_grid values must lie in [0, a)")
    if any(b <= a for a, b in zip(s_grid[:-1], s_grid[1:])):
        raise ValueError("s_grid must be strictly increasing")
    jobs = [(geom.with_shift(s), cfg, numerics) for s in s_grid]
    return list(map_fn(_sweep_job, jobs))


def _sweep_job(job):
    geom, cfg, numerics = job
    return compute_forces(geom, cfg, numerics)


def curves_from_reports(geom: RackGeometry, reports, dims=DIMENSIONS, comps=COMPONENTS):
    curves = {}
    for dim in dims:
        for comp in comps:
            curve = ForceCurve(geom.v, dim, comp, a=geom.a)
            for rep in reports:
                curve.samples.append((rep.geometry.shift, rep.get(dim, comp), rep.err(dim, comp)))
            curves[dim, comp] = curve
    return curves


def sweep_shift(geom: RackGeometry, s_grid, cfg: StressConfig, component: str = "normal",
                numerics: Numerics = Numerics()) -> ForceCurve:
    """Force curve over ``s_grid`` for ``cfg.dimensionality`` and ``component``."""
    reports = sweep_forces(geom, s_grid, cfg, numerics)
    return curves_from_reports(geom, reports, (cfg.dimensionality,), (component,))[
        cfg.dimensionality, component
    ]
