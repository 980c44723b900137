import numpy as np
import pytest

from rackcasimir.force import (
    ForceCurve,
    ForcePath,
    Numerics,
    PathError,
    compute_forces,
    estimate_error,
    force_per_period,
    sweep_shift,
    x0_independence,
)
from rackcasimir.geometry import RackGeometry
from rackcasimir.oracle import flat_plate_force
from rackcasimir.stress import StressConfig

COARSE = Numerics(target_element_size=0.1, periods_realized=5, mesh_error=False)
FLAT = RackGeometry(H=0.0)


@pytest.fixture(scope="module")
def flat_report():
    return compute_forces(FLAT, StressConfig(), COARSE)


@pytest.mark.parametrize("dim,tol", [("2d", 2e-2), ("3d", 3e-2)])
def test_flat_plates_coarse(flat_report, dim, tol):
    assert flat_report.x0 == pytest.approx(0.5)
    per_length = flat_report.get(dim, "normal") / FLAT.a
    assert per_length == pytest.approx(flat_plate_force(dim, 1.0), rel=tol)
    assert abs(flat_report.get(dim, "tangential")) < 1e-3 * abs(flat_report.get(dim, "normal"))


def test_force_per_period_interface():
    f, err = force_per_period(FLAT, StressConfig(dimensionality="3d"), "normal", ForcePath(0.5, 0.0, 2.0), COARSE)
    assert f / 2 == pytest.approx(flat_plate_force("3d", 1.0), rel=3e-2)
    assert 0 < err < 1e-2 * abs(f)
    with pytest.raises(ValueError):
        force_per_period(FLAT, StressConfig(), "sideways", numerics=COARSE)


def test_flat_x0_independence():
    spread = x0_independence(FLAT, StressConfig(), "normal", [0.35, 0.5, 0.65], COARSE)
    assert spread < 1e-3


@pytest.mark.parametrize("x0", [0.02, 0.98, -0.2, 1.5])
def test_path_outside_gap(x0):
    with pytest.raises(PathError):
        force_per_period(FLAT, StressConfig(), "normal", ForcePath(x0, 0.0, 2.0), COARSE)


def test_flat_refinement_estimate_small():
    num = Numerics(target_element_size=0.1, periods_realized=5)
    assert estimate_error(FLAT, StressConfig(), "normal", numerics=num) < 1e-3


def test_zero_slope_tangential_antisymmetric():
    curve = sweep_shift(RackGeometry(v=0.5), [0.5, 1.5], StressConfig(), "tangential", COARSE)
    assert isinstance(curve, ForceCurve)
    f = curve.force
    assert f[0] == pytest.approx(-f[1], abs=3 * (curve.error[0] + curve.error[1]))
    assert abs(f[0]) > 1e-4
    np.testing.assert_allclose(curve.per_length(), f / 2)


@pytest.mark.parametrize("grid", [[0.5, 0.2], [0.0, 2.0], [-0.1, 0.3]])
def test_sweep_grid_validation(grid):
    with pytest.raises(ValueError):
        sweep_shift(RackGeometry(), grid, StressConfig(), "normal", COARSE)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(target_element_size=0.0),
        dict(basis_degree=4),
        dict(periods_realized=4),
        dict(w_panels=0),
        dict(w_tol=0.0),
        dict(refinement_factor=1),
    ],
)
def test_numerics_validation(kwargs):
    with pytest.raises(ValueError):
        Numerics(**kwargs)
