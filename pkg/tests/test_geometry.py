import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rackcasimir.geometry import (
    LOWER,
    UPPER,
    GeometryError,
    Profile,
    ProfileGeometry,
    RackGeometry,
    assemble_scene,
    build_rack_profile,
    flat_scene,
    mesh_polylines,
    mesh_scene,
    reflection_center,
    refine,
    tilt_angle,
)

SLOPES_V = (0.5, 0.4, 0.3)


def test_zero_slope_profile():
    g = RackGeometry(a=2, u=0.5, v=0.5, H=0.5)
    assert g.theta == 0.0
    p = build_rack_profile(g).vertices
    # face and valley run along the lateral axis
    assert p[0, 0] == p[1, 0] == 0.0
    assert p[2, 0] == pytest.approx(p[3, 0])
    # mirror symmetric about the tooth centre x2 = u/2
    mirrored = np.column_stack([p[:, 0], 0.5 - p[:, 1]])
    wrapped = np.column_stack([mirrored[:, 0], np.mod(mirrored[:, 1], 2.0)])
    for q in wrapped:
        assert np.min(np.linalg.norm(np.column_stack([p[:, 0], np.mod(p[:, 1], 2.0)]) - q, axis=1)) < 1e-12


def test_sine_tilt_value():
    g = RackGeometry(a=2, u=0.5, v=0.3, H=0.5)
    assert g.theta == pytest.approx(math.asin(0.4), abs=1e-12)
    assert g.theta == pytest.approx(0.4115, abs=1e-4)


def test_face_and_valley_parallel():
    p = build_rack_profile(RackGeometry(v=0.3)).vertices
    e = np.diff(p, axis=0)
    assert e[0, 0] * e[2, 1] - e[0, 1] * e[2, 0] == pytest.approx(0.0, abs=1e-14)
    assert np.linalg.norm(e[0]) == pytest.approx(0.5)
    assert np.linalg.norm(e[2]) == pytest.approx(0.3)


def test_tilt_rules():
    assert tilt_angle(0.5, 0.3, "tangent") == pytest.approx(math.atan(0.4))
    assert tilt_angle(0.5, 0.3, "none") == 0.0
    with pytest.raises(GeometryError):
        tilt_angle(0.5, 0.3, "cubic")


@pytest.mark.parametrize(
    "kwargs",
    [dict(v=1.6), dict(u=1.0, v=1.0), dict(l=0.0), dict(a=-1.0), dict(H=-0.1), dict(s=math.inf)],
)
def test_invalid_geometry(kwargs):
    with pytest.raises(GeometryError):
        RackGeometry(**kwargs)


def test_profile_closure_enforced():
    with pytest.raises(GeometryError):
        Profile(np.array([[0.0, 0.0], [0.1, 1.0], [0.0, 1.5]]), 2.0)
    with pytest.raises(GeometryError):
        Profile(np.array([[0.0, 0.0], [0.0, 0.0], [0.0, 2.0]]), 2.0)


def test_self_intersecting_profile_rejected():
    verts = [[0, 0], [0, 1.5], [0.5, 0.5], [-0.5, 1.0], [0, 2]]
    with pytest.raises(GeometryError):
        Profile(np.array(verts, dtype=float), 2.0)


def test_zero_slope_scene_mirror_symmetric():
    sc = assemble_scene(RackGeometry(v=0.5), 7)
    for curve in sc.curves:
        c = 0.25  # tooth centre
        mirrored = np.column_stack([curve[:, 0], 2 * c - curve[:, 1]])[::-1]
        inner = np.abs(curve[:, 1] - c) < 5.0
        for q in mirrored[np.abs(mirrored[:, 1] - c) < 5.0]:
            assert np.min(np.linalg.norm(curve[inner] - q, axis=1)) < 1e-12


def _segments(curve):
    return curve[:-1], curve[1:]


def test_tilted_scene_not_mirror_symmetric():
    sc = assemble_scene(RackGeometry(v=0.3), 7)
    curve = sc.curves[LOWER]
    c = 0.5 * 0.5 * math.cos(math.asin(0.4))
    mirrored = np.column_stack([curve[:, 0], 2 * c - curve[:, 1]])
    d = [np.min(np.linalg.norm(curve - q, axis=1)) for q in mirrored[np.abs(mirrored[:, 1]) < 3]]
    assert max(d) > 0.05


@pytest.mark.parametrize("v", SLOPES_V)
def test_shift_periodicity(v):
    a = assemble_scene(RackGeometry(v=v, s=0.0), 5)
    b = assemble_scene(RackGeometry(v=v, s=2.0), 5)
    for ca, cb in zip(a.curves, b.curves):
        np.testing.assert_array_equal(ca, cb)


def test_facing_edges_at_distance_l():
    for v in SLOPES_V:
        g = RackGeometry(v=v)
        sc = assemble_scene(g, 3)
        lower, upper = sc.lower.vertices, sc.upper.vertices
        d = lower[1] - lower[0]
        n = np.array([d[1], -d[0]]) / np.linalg.norm(d)
        # upper face is the reflected face edge: the last edge of the reversed profile
        face_pts = upper[-2:]
        dist = np.abs((face_pts - lower[0]) @ n)
        np.testing.assert_allclose(dist, g.l, atol=1e-12)


def test_zero_slope_faces_keep_distance_for_any_shift():
    for s in np.linspace(0, 2, 9, endpoint=False):
        sc = assemble_scene(RackGeometry(v=0.5, s=s), 3)
        face = sc.upper.vertices[-2:]
        np.testing.assert_allclose(face[:, 0], 1.0, atol=1e-12)


@pytest.mark.parametrize("v", SLOPES_V)
def test_gap_guarantee(v):
    for s in np.linspace(0, 2, 41, endpoint=False):
        assert assemble_scene(RackGeometry(v=v, s=s), 3).min_separation() > 0.1


@given(st.floats(0.0, 2.0, exclude_max=True))
def test_zero_slope_shift_mirror(s):
    # the scene at shift s is the lateral mirror of the scene at -s
    a = assemble_scene(RackGeometry(v=0.5, s=s), 5)
    b = assemble_scene(RackGeometry(v=0.5, s=-s), 5)
    c = 0.25
    for ca, cb in zip(a.curves, b.curves):
        mirrored = np.column_stack([cb[:, 0], 2 * c - cb[:, 1]])
        window = lambda pts: pts[np.abs(pts[:, 1] - c) < 2.0]  # noqa: E731
        for q in window(ca):
            seg_d = _dist_to_polyline(q, mirrored[::-1])
            assert seg_d < 1e-9


def _dist_to_polyline(p, poly):
    best = np.inf
    for a, b in zip(poly[:-1], poly[1:]):
        ab = b - a
        t = np.clip((p - a) @ ab / (ab @ ab), 0, 1)
        best = min(best, np.linalg.norm(p - a - t * ab))
    return best


def test_flat_segment_mesh():
    m = mesh_polylines([np.array([[0.0, 0.0], [0.0, 1.0]])], 0.25)
    assert m.size == 4
    np.testing.assert_allclose(m.length, 0.25)
    assert list(m.prev) == [-1, 0, 1, 2]
    assert list(m.next) == [1, 2, 3, -1]


def test_period_mesh_counts_and_corners():
    g = RackGeometry(v=0.5)
    prof = build_rack_profile(g)
    m = mesh_polylines([prof.vertices], 0.1)
    assert m.size >= float(np.sum(prof.edge_lengths)) / 0.1
    ends = np.vstack([m.start, m.end])
    for v in prof.vertices:
        assert np.min(np.linalg.norm(ends - v, axis=1)) < 1e-14


def test_mesh_rejects_coarse_target():
    sc = assemble_scene(RackGeometry(v=0.3), 3)
    with pytest.raises(GeometryError):
        mesh_scene(sc, 0.35)


@pytest.mark.parametrize("v", SLOPES_V)
def test_mesh_invariants(v):
    sc = assemble_scene(RackGeometry(v=v, s=0.3), 5)
    m = mesh_scene(sc, 0.05)
    assert np.all(m.length <= 0.05 + 1e-12)
    assert np.all(m.length > 0.025)
    # neighbour links are mutually inverse
    for i in range(m.size):
        if m.next[i] >= 0:
            assert m.prev[m.next[i]] == i
    # normals point into the gap: stepping along the normal approaches the opposite plate
    probe = m.mid + 1e-3 * m.normal
    other = m.mid - 1e-3 * m.normal
    lower = m.plate == LOWER
    d_in = _plate_distance(sc, probe)
    d_out = _plate_distance(sc, other)
    opp_in = np.where(lower, d_in[:, UPPER], d_in[:, LOWER])
    opp_out = np.where(lower, d_out[:, UPPER], d_out[:, LOWER])
    assert np.all(opp_in < opp_out)


def _plate_distance(sc, pts):
    return np.column_stack([[_dist_to_polyline(p, c) for p in pts] for c in sc.curves])


def test_refine_properties():
    m = mesh_scene(flat_scene(2.0, 1.0, 3), 0.25)
    assert m.size == 48
    r2 = refine(m, 2)
    assert r2.size == 96
    assert r2.total_length == pytest.approx(m.total_length, rel=1e-12)
    r22 = refine(r2, 2)
    r4 = refine(m, 4)
    np.testing.assert_allclose(r22.start, r4.start, atol=1e-15)
    np.testing.assert_allclose(r22.end, r4.end, atol=1e-15)
    with pytest.raises(GeometryError):
        refine(m, 1)


@given(st.sampled_from(SLOPES_V), st.integers(2, 4), st.floats(0.0, 1.99))
def test_refine_preserves_corners_and_length(v, factor, s):
    m = mesh_scene(assemble_scene(RackGeometry(v=v, s=s), 3), 0.1)
    r = refine(m, factor)
    assert abs(r.total_length - m.total_length) <= 1e-12 * m.total_length
    np.testing.assert_allclose(
        np.sort(r.corner_points(), axis=0), np.sort(m.corner_points(), axis=0), atol=1e-14
    )


def test_profile_geometry_matches_rack():
    g = RackGeometry(v=0.4, s=0.7)
    prof = build_rack_profile(g)
    pg = ProfileGeometry(prof.vertices.tolist(), g.a, reflection_center(g).tolist(), s=0.7)
    a, b = g.scene(5), pg.scene(5)
    for ca, cb in zip(a.curves, b.curves):
        np.testing.assert_allclose(ca, cb, atol=1e-14)
