"""Casimir forces between periodically profiled Dirichlet plates.

Boundary elements give the renormalized Green function of the modified
Helmholtz operator; the renormalized stress is a weighted spectral integral
of its coincidence limit, and the force per period is the stress flux
through one lateral period inside the gap.
"""
from .bem import GreenOperator, assemble
from .config import ConfigError, RunConfig, load_config, parse_config
from .force import (
    ForceCurve,
    ForcePath,
    Numerics,
    compute_forces,
    estimate_error,
    force_per_period,
    sweep_shift,
    x0_independence,
)
from .geometry import (
    BoundaryMesh,
    GeometryError,
    Profile,
    ProfileGeometry,
    RackGeometry,
    Scene,
    assemble_scene,
    build_rack_profile,
    mesh_scene,
    refine,
)
from .kernel import g0
from .special import bessel_k
from .stress import StressConfig, StressSample, stress_at

__version__ = "0.1.0"
