"""JSON run configuration.

A run configuration has five blocks; unknown keys are rejected everywhere.

``geometry``
    Either the rack parameters (``a, u, v, s, l, H, tilt_rule``) or an
    explicit lower profile ``{"vertices": [[x1, x2], ...], "a": ..., "center": [c1, c2]}``;
    the upper plate is the point reflection through ``center`` shifted by ``s``.
``physics``
    ``dimensionality`` (``"2d"``, ``"3d"`` or a list of both) and ``mass``.
``numerics``
    Mesh, boundary-element, spectral and line quadrature controls.
``sweep``
    ``s_grid`` (list, or ``{"start", "stop", "count"}`` with ``stop`` excluded),
    ``v_list`` and ``components``.
``output``
    ``directory``, ``prefix`` and ``svg``.
"""
from __future__ import annotations

import json
import math
from dataclasses import MISSING, asdict, dataclass, field, fields, replace

import numpy as np

from .force import COMPONENTS, ForcePath, Numerics, check_path, default_x0
from .geometry import GeometryError, ProfileGeometry, RackGeometry, mesh_scene
from .stress import DIMENSIONS, StressConfig


class ConfigError(ValueError):
    pass


_STRESS_KEYS = ("q_panels", "q_order", "q_tol", "q_max_panels", "q_max_factor")

DESCRIPTIONS = {
    "geometry.a": "period of both plates",
    "geometry.u": "face (tooth top) edge length",
    "geometry.v": "valley edge length; v < u tilts the faces",
    "geometry.s": "lateral shift of the upper plate",
    "geometry.l": "perpendicular distance between the facing edges at s = 0",
    "geometry.H": "tooth height (0 gives flat plates)",
    "geometry.tilt_rule": "face tilt from (u, v): sine, tangent or none",
    "geometry.vertices": "explicit lower profile for one period (alternative to rack parameters)",
    "geometry.center": "point-reflection centre for the upper plate (with vertices)",
    "physics.dimensionality": "'2d', '3d' or a list of both",
    "physics.mass": "field mass m >= 0",
    "numerics.target_element_size": "boundary element length h",
    "numerics.basis_degree": "density polynomial degree per element (0, 1 or 2)",
    "numerics.periods_realized": "odd number of periods meshed per plate",
    "numerics.q_panels": "initial geometric panels in q",
    "numerics.q_order": "Gauss order of the Gauss-Kronrod pair in q",
    "numerics.q_tol": "relative q-quadrature tolerance",
    "numerics.q_max_panels": "maximum q panels after bisection",
    "numerics.q_max_factor": "q cutoff times the smallest line-to-plate distance",
    "numerics.w_panels": "initial line quadrature panels per period",
    "numerics.w_order": "Gauss points per line panel",
    "numerics.w_tol": "relative change that stops line-panel doubling",
    "numerics.w_max_doublings": "maximum line-panel doublings",
    "numerics.mesh_error": "include the mesh-refinement delta in error estimates",
    "numerics.refinement_factor": "element split factor for the refinement delta",
    "numerics.x0": "transverse coordinate of the integration line (null: middle of the gap band)",
    "numerics.y0": "lateral start of the integration line",
    "sweep.s_grid": "shift values in [0, a): list or {start, stop, count} with stop excluded",
    "sweep.v_list": "valley lengths to sweep (rack geometry only; null keeps geometry.v)",
    "sweep.components": "subset of ['normal', 'tangential']",
    "output.directory": "output directory (overridden by --out)",
    "output.prefix": "CSV/SVG file name prefix",
    "output.svg": "also write one SVG line chart per CSV",
}


@dataclass(frozen=True)
class PhysicsBlock:
    dimensionality: tuple = ("2d",)
    mass: float = 0.0


@dataclass(frozen=True)
class NumericsBlock:
    target_element_size: float = 0.05
    basis_degree: int = 2
    periods_realized: int = 7
    q_panels: int = 5
    q_order: int = 3
    q_tol: float = 1e-3
    q_max_panels: int = 10
    q_max_factor: float = 16.0
    w_panels: int = 8
    w_order: int = 8
    w_tol: float = 1e-3
    w_max_doublings: int = 2
    mesh_error: bool = True
    refinement_factor: int = 2
    x0: float | None = None
    y0: float = 0.0


@dataclass(frozen=True)
class SweepBlock:
    s_grid: tuple = tuple(np.linspace(0.0, 2.0, 21, endpoint=False).tolist())
    v_list: tuple | None = (0.5, 0.4, 0.3)
    components: tuple = COMPONENTS


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "out"
    prefix: str = "force"
    svg: bool = True


@dataclass(frozen=True)
class RunConfig:
    geometry: RackGeometry | ProfileGeometry = field(default_factory=RackGeometry)
    physics: PhysicsBlock = field(default_factory=PhysicsBlock)
    numerics: NumericsBlock = field(default_factory=NumericsBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def stress_config(self, dimensionality: str | None = None) -> StressConfig:
        n = self.numerics
        return StressConfig(
            dimensionality=dimensionality or self.physics.dimensionality[0],
            mass=self.physics.mass,
            **{k: getattr(n, k) for k in _STRESS_KEYS},
        )

    def force_numerics(self) -> Numerics:
        n = self.numerics
        keys = [f.name for f in fields(Numerics)]
        return Numerics(**{k: getattr(n, k) for k in keys})

    def geometries(self):
        """One geometry per swept ``v`` (or just the configured one)."""
        g = self.geometry
        if isinstance(g, ProfileGeometry) or self.sweep.v_list is None:
            return [g]
        return [_replace_v(g, v) for v in self.sweep.v_list]

    def path(self, geom, scene) -> ForcePath:
        x0 = self.numerics.x0 if self.numerics.x0 is not None else default_x0(scene)
        return ForcePath(float(x0), self.numerics.y0, geom.a)


def _replace_v(g: RackGeometry, v):
    return replace(g, v=float(v))


def _check_keys(block: dict, allowed, name):
    if not isinstance(block, dict):
        raise ConfigError(f"'{name}' must be a JSON object")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in '{name}': {', '.join(unknown)}")


def _block_fields(cls):
    return [f.name for f in fields(cls)]


def _build(cls, block, name, convert=None):
    block = dict(block or {})
    _check_keys(block, _block_fields(cls), name)
    if convert:
        block = convert(block)
    try:
        return cls(**block)
    except TypeError as exc:
        raise ConfigError(f"'{name}': {exc}") from exc


def _number(block, key, kind=float, optional=False):
    if key not in block:
        return
    val = block[key]
    if optional and val is None:
        return
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key} must be a number, got {val!r}")
    if kind is int:
        if int(val) != val:
            raise ConfigError(f"{key} must be an integer, got {val!r}")
        block[key] = int(val)
    else:
        if not math.isfinite(val):
            raise ConfigError(f"{key} must be finite")
        block[key] = float(val)


def _geometry(block):
    block = dict(block or {})
    if "vertices" in block:
        _check_keys(block, ("vertices", "a", "center", "s"), "geometry")
        for key in ("vertices", "a", "center"):
            if key not in block:
                raise ConfigError(f"explicit geometry needs '{key}'")
        _number(block, "a")
        _number(block, "s")
        return ProfileGeometry(**block)
    _check_keys(block, _block_fields(RackGeometry), "geometry")
    for key in ("a", "u", "v", "s", "l", "H"):
        _number(block, key)
    return RackGeometry(**block)


def _physics(block):
    dims = block.get("dimensionality", ["2d"])
    if isinstance(dims, str):
        dims = [dims]
    dims = tuple(dims)
    if not dims or any(d not in DIMENSIONS for d in dims) or len(set(dims)) != len(dims):
        raise ConfigError(f"dimensionality must be a subset of {list(DIMENSIONS)}, got {dims}")
    block["dimensionality"] = tuple(d for d in DIMENSIONS if d in dims)
    _number(block, "mass")
    return block


def _numerics(block):
    for key in ("basis_degree", "periods_realized", "q_panels", "q_order", "q_max_panels",
                "w_panels", "w_order", "w_max_doublings", "refinement_factor"):
        _number(block, key, int)
    for key in ("target_element_size", "q_tol", "q_max_factor", "w_tol", "y0"):
        _number(block, key)
    _number(block, "x0", optional=True)
    if "mesh_error" in block and not isinstance(block["mesh_error"], bool):
        raise ConfigError("mesh_error must be true or false")
    return block


def _sweep(block):
    grid = block.get("s_grid")
    if isinstance(grid, dict):
        _check_keys(grid, ("start", "stop", "count"), "sweep.s_grid")
        try:
            grid = np.linspace(grid["start"], grid["stop"], int(grid["count"]), endpoint=False)
        except KeyError as exc:
            raise ConfigError(f"sweep.s_grid needs {exc}") from exc
        block["s_grid"] = tuple(float(x) for x in grid)
    elif grid is not None:
        block["s_grid"] = tuple(float(x) for x in grid)
    if block.get("v_list") is not None:
        block["v_list"] = tuple(float(x) for x in block["v_list"])
    comps = block.get("components")
    if comps is not None:
        if isinstance(comps, str):
            comps = [comps]
        if not comps or any(c not in COMPONENTS for c in comps):
            raise ConfigError(f"components must be a subset of {list(COMPONENTS)}")
        block["components"] = tuple(c for c in COMPONENTS if c in comps)
    return block


def parse_config(data: dict) -> RunConfig:
    """Build and fully validate a :class:`RunConfig` from a JSON object."""
    _check_keys(data, _block_fields(RunConfig), "config")
    try:
        cfg = RunConfig(
            geometry=_geometry(data.get("geometry")),
            physics=_build(PhysicsBlock, data.get("physics"), "physics", _physics),
            numerics=_build(NumericsBlock, data.get("numerics"), "numerics", _numerics),
            sweep=_build(SweepBlock, data.get("sweep"), "sweep", _sweep),
            output=_build(OutputBlock, data.get("output"), "output"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    validate_config(cfg)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)


def validate_config(cfg: RunConfig, full: bool = True):
    """Re-check every module precondition the run will hit.

    With ``full`` each swept geometry and shift is meshed and the integration
    line is checked against it.
    """
    try:
        for dim in cfg.physics.dimensionality:
            cfg.stress_config(dim)
        num = cfg.force_numerics()
        grid = cfg.sweep.s_grid
        if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
            raise ConfigError("sweep.s_grid must be strictly increasing")
        for geom in cfg.geometries():
            if any(not (0 <= s < geom.a) for s in grid):
                raise ConfigError(f"sweep.s_grid values must lie in [0, a) = [0, {geom.a})")
            if not full:
                continue
            for s in grid:
                g = geom.with_shift(s)
                scene = g.scene(num.periods_realized)
                mesh = mesh_scene(scene, num.target_element_size)
                check_path(mesh, scene, cfg.path(g, scene))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(cfg: RunConfig) -> dict:
    out = asdict(cfg)
    for block in out.values():
        for k, v in block.items():
            if isinstance(v, tuple):
                block[k] = [list(x) if isinstance(x, tuple) else x for x in v]
    return out


def schema() -> dict:
    """Every configurable key with its default and meaning."""
    blocks = {
        "geometry": RackGeometry,
        "physics": PhysicsBlock,
        "numerics": NumericsBlock,
        "sweep": SweepBlock,
        "output": OutputBlock,
    }
    out = {}
    for name, cls in blocks.items():
        entries = {}
        for f in fields(cls):
            default = f.default if f.default is not MISSING else f.default_factory()
            if isinstance(default, tuple):
                default = list(default)
            entries[f.name] = {"default": default, "description": DESCRIPTIONS[f"{name}.{f.name}"]}
        if name == "geometry":
            for key in ("vertices", "center"):
                entries[key] = {"default": None, "description": DESCRIPTIONS[f"geometry.{key}"]}
        out[name] = entries
    return out
