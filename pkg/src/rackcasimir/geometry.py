"""Rack-gear plate profiles, two-plate scenes and boundary meshes.

Coordinates are ``(x1, x2)``: ``x1`` is transverse (normal to the plates,
pointing from the lower plate toward the upper one), ``x2`` is the lateral
coordinate along which the profiles are periodic with period ``a``.

One period of the lower profile consists of four straight edges:

    face (length u, tilted by theta) -> descending flank
    -> valley (length v, parallel to the face) -> ascending flank

The upper plate is the point reflection of the lower profile through a
centre chosen so that the two face edges are parallel and a perpendicular
distance ``l`` apart at zero shift; it is then translated laterally by ``s``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

LOWER, UPPER = 0, 1

TILT_RULES = ("sine", "tangent", "none")


class GeometryError(ValueError):
    """Raised for invalid or self-intersecting geometry."""


def tilt_angle(u: float, v: float, rule: str = "sine") -> float:
    """Map the edge lengths ``(u, v)`` to the tilt angle of the parallel edges.

    ``sine``: ``sin(theta) = (u - v) / u``; ``tangent``: ``tan(theta) = (u - v) / u``;
    ``none``: always flat. Every rule gives ``theta = 0`` at ``u == v``.
    """
    ratio = (u - v) / u
    if rule == "sine":
        if abs(ratio) > 1:
            raise GeometryError(f"sine tilt rule needs |u - v| <= u, got u={u}, v={v}")
        return math.asin(ratio)
    if rule == "tangent":
        return math.atan(ratio)
    if rule == "none":
        return 0.0
    raise GeometryError(f"unknown tilt rule {rule!r}; expected one of {TILT_RULES}")


@dataclass(frozen=True)
class RackGeometry:
    a: float = 2.0
    u: float = 0.5
    v: float = 0.5
    s: float = 0.0
    l: float = 1.0
    H: float = 0.5
    tilt_rule: str = "sine"

    def __post_init__(self):
        for name in ("a", "u", "v", "l"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise GeometryError(f"{name} must be positive and finite, got {val}")
        if not (self.H >= 0 and math.isfinite(self.H)):
            raise GeometryError(f"H must be >= 0, got {self.H}")
        if not math.isfinite(self.s):
            raise GeometryError(f"s must be finite, got {self.s}")
        if self.u + self.v >= self.a:
            raise GeometryError(
                f"u + v >= a ({self.u} + {self.v} >= {self.a}): flanks cannot close "
                "within one period"
            )
        tilt_angle(self.u, self.v, self.tilt_rule)

    @property
    def theta(self) -> float:
        return tilt_angle(self.u, self.v, self.tilt_rule)

    @property
    def shift(self) -> float:
        """Lateral shift reduced to ``[0, a)``."""
        return _reduce_shift(self.s, self.a)

    def with_shift(self, s: float) -> "RackGeometry":
        return replace(self, s=s)

    def scene(self, periods_realized: int = 7) -> "Scene":
        return assemble_scene(self, periods_realized)


def _reduce_shift(s, a):
    s = math.fmod(s, a)
    if s < 0:
        s += a
    return 0.0 if s >= a else s


@dataclass(frozen=True)
class ProfileGeometry:
    """Explicit lower-plate profile; the upper plate is its point reflection
    through ``center``, shifted laterally by ``s``."""

    vertices: tuple
    a: float
    center: tuple
    s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(tuple(map(float, p)) for p in self.vertices))
        object.__setattr__(self, "center", tuple(map(float, self.center)))
        if len(self.center) != 2:
            raise GeometryError("center needs two coordinates")
        Profile(np.array(self.vertices), self.a)

    @property
    def v(self) -> float:
        return math.nan

    @property
    def shift(self) -> float:
        return _reduce_shift(self.s, self.a)

    def with_shift(self, s: float) -> "ProfileGeometry":
        return replace(self, s=s)

    def scene(self, periods_realized: int = 7) -> "Scene":
        profile = Profile(np.array(self.vertices), self.a)
        return assemble_scene_from_profile(profile, self.center, self.shift, periods_realized)


@dataclass(frozen=True)
class Profile:
    """One period of a periodic polyline, ``vertices[-1] == vertices[0] + (0, period)``."""

    vertices: np.ndarray
    period: float

    def __post_init__(self):
        vert = np.array(self.vertices, dtype=float)
        if vert.ndim != 2 or vert.shape[1] != 2 or len(vert) < 2:
            raise GeometryError("profile needs at least two 2D vertices")
        if not self.period > 0:
            raise GeometryError(f"period must be positive, got {self.period}")
        closure = vert[-1] - vert[0] - np.array([0.0, self.period])
        if np.max(np.abs(closure)) > 1e-12 * max(1.0, self.period):
            raise GeometryError(
                f"profile does not close periodically: last - first = {vert[-1] - vert[0]}"
            )
        vert[-1] = vert[0] + np.array([0.0, self.period])
        if np.any(np.linalg.norm(np.diff(vert, axis=0), axis=1) <= 0):
            raise GeometryError("consecutive profile vertices must be distinct")
        _check_simple(vert)
        vert.setflags(write=False)
        object.__setattr__(self, "vertices", vert)

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)


def _segments_intersect(p, q, r, s_, eps=1e-12):
    # proper or touching intersection of closed segments pq and rs
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(r, s_, p), orient(r, s_, q)
    d3, d4 = orient(p, q, r), orient(p, q, s_)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True
    return False


def _check_simple(vert):
    n = len(vert) - 1
    for i in range(n):
        for j in range(i + 2, n):
            if _segments_intersect(vert[i], vert[i + 1], vert[j], vert[j + 1]):
                raise GeometryError(f"profile edges {i} and {j} intersect")


def build_rack_profile(geom: RackGeometry) -> Profile:
    """Lower-plate profile for one period, starting at the face edge at the origin."""
    a, u, v, H = geom.a, geom.u, geom.v, geom.H
    th = geom.theta
    d = np.array([math.sin(th), math.cos(th)])
    run = 0.5 * (a - (u + v) * d[1])
    if run <= 0:
        raise GeometryError(
            f"flanks would need non-positive lateral run ({run:.3g}) to close the period"
        )
    p0 = np.zeros(2)
    face_mid = 0.5 * u * d
    valley_mid = face_mid + np.array([-H, 0.5 * a])
    verts = [
        p0,
        face_mid + 0.5 * u * d,
        valley_mid - 0.5 * v * d,
        valley_mid + 0.5 * v * d,
        p0 + np.array([0.0, a]),
    ]
    return Profile(np.array(verts), a)


def reflection_center(geom: RackGeometry) -> np.ndarray:
    """Centre of the point reflection mapping the lower face onto the upper face."""
    th = geom.theta
    d = np.array([math.sin(th), math.cos(th)])
    normal = np.array([math.cos(th), -math.sin(th)])
    return 0.5 * geom.u * d + 0.5 * geom.l * normal


@dataclass(frozen=True)
class Scene:
    """Two truncated periodic plates.

    ``lower`` and ``upper`` are the per-period profiles already placed in the
    scene (the upper one reflected and shifted). ``curves`` holds the realized
    polylines, ordered by increasing ``x2``.
    """

    lower: Profile
    upper: Profile
    periods_realized: int
    shift: float
    curves: tuple = field(repr=False)

    @property
    def period(self) -> float:
        return self.lower.period

    def min_separation(self) -> float:
        return _polyline_distance(self.curves[LOWER], self.curves[UPPER])


def _realize(profile: Profile, offsets) -> np.ndarray:
    a = profile.period
    pieces = [profile.vertices[:-1] + np.array([0.0, k * a]) for k in offsets]
    last = profile.vertices[-1] + np.array([0.0, offsets[-1] * a])
    return np.vstack(pieces + [last[None, :]])


def _merge_collinear(poly, tol=1e-12):
    keep = [0]
    for i in range(1, len(poly) - 1):
        e1 = poly[i] - poly[keep[-1]]
        e2 = poly[i + 1] - poly[i]
        cross = e1[0] * e2[1] - e1[1] * e2[0]
        if abs(cross) > tol * np.linalg.norm(e1) * np.linalg.norm(e2) or np.dot(e1, e2) < 0:
            keep.append(i)
    keep.append(len(poly) - 1)
    return poly[keep]


def _point_segment_distance(p, a, b):
    # p: (..., 2); a, b: (2,)
    ab = b - a
    t = np.clip(((p - a) @ ab) / (ab @ ab), 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.linalg.norm(p - proj, axis=-1)


def _polyline_distance(p, q):
    best = np.inf
    for i in range(len(q) - 1):
        best = min(best, float(np.min(_point_segment_distance(p, q[i], q[i + 1]))))
    for i in range(len(p) - 1):
        best = min(best, float(np.min(_point_segment_distance(q, p[i], p[i + 1]))))
    return best


def polyline_distance(points, poly) -> np.ndarray:
    """Distance from each of ``points`` (n, 2) to the polyline ``poly``."""
    points = np.atleast_2d(points)
    d = np.full(len(points), np.inf)
    for i in range(len(poly) - 1):
        d = np.minimum(d, _point_segment_distance(points, poly[i], poly[i + 1]))
    return d


def _clip(poly, lo, hi, snap):
    """Part of an x2-increasing polyline with ``lo <= x2 <= hi``.

    Cut points closer than ``snap`` (arc length) to a vertex move onto it,
    so no sliver edges appear.
    """
    if np.any(np.diff(poly[:, 1]) <= 0):
        raise GeometryError("scene assembly needs profiles with strictly increasing x2")

    def cut(x2):
        i = int(np.searchsorted(poly[:, 1], x2)) - 1
        i = min(max(i, 0), len(poly) - 2)
        p, q = poly[i], poly[i + 1]
        t = (x2 - p[1]) / (q[1] - p[1])
        seg = np.linalg.norm(q - p)
        if t * seg < snap:
            return i, p, True
        if (1 - t) * seg < snap:
            return i + 1, q, True
        return i, p + t * (q - p), False

    i_lo, p_lo, on_lo = cut(lo)
    i_hi, p_hi, on_hi = cut(hi)
    inner = poly[i_lo + 1 : (i_hi if on_hi else i_hi + 1)]
    return np.vstack([p_lo[None, :], inner, p_hi[None, :]])


def assemble_scene_from_profile(
    profile: Profile, center, shift: float, periods_realized: int, center_x2: float | None = None
) -> Scene:
    """Place ``profile`` as the lower plate and its point reflection through
    ``center`` (shifted by ``shift``) as the upper plate.

    Both plates are cut to the lateral window of ``periods_realized`` periods
    centred on ``center_x2``. The default, ``center[1] + shift / 2``, is the
    centre of the point symmetry of the infinite scene, so the truncated
    scene keeps that symmetry (and the lateral mirror symmetry of
    symmetric profiles at zero shift).
    """
    if periods_realized < 3 or periods_realized % 2 == 0:
        raise GeometryError(f"periods_realized must be odd and >= 3, got {periods_realized}")
    a = profile.period
    shift = math.fmod(shift, a)
    if shift < 0:
        shift += a
    center = np.asarray(center, dtype=float)
    upper_verts = (2.0 * center - profile.vertices)[::-1] + np.array([0.0, shift])
    upper = Profile(upper_verts, a)

    if center_x2 is None:
        center_x2 = center[1] + 0.5 * shift
    half = periods_realized // 2
    lo, hi = center_x2 - 0.5 * periods_realized * a, center_x2 + 0.5 * periods_realized * a
    snap = 0.25 * float(np.min(profile.edge_lengths))

    def realize(prof):
        mid = 0.5 * (prof.vertices[0, 1] + prof.vertices[-1, 1])
        k0 = round((center_x2 - mid) / a)
        offsets = list(range(k0 - half - 1, k0 + half + 2))
        return _merge_collinear(_clip(_realize(prof, offsets), lo, hi, snap))

    curves = (realize(profile), realize(upper))
    scene = Scene(profile, upper, periods_realized, shift, curves)
    gap = scene.min_separation()
    if not gap > 0:
        raise GeometryError(f"plates intersect at shift s={shift} (min distance {gap:.3g})")
    return scene


def assemble_scene(geom: RackGeometry, periods_realized: int = 7) -> Scene:
    """Two-plate scene for ``geom`` with ``periods_realized`` periods per plate."""
    profile = build_rack_profile(geom)
    return assemble_scene_from_profile(profile, reflection_center(geom), geom.shift, periods_realized)


def flat_scene(a: float, l: float, periods_realized: int = 7) -> Scene:
    """Two parallel flat plates a distance ``l`` apart (lower at ``x1 = 0``)."""
    profile = Profile(np.array([[0.0, 0.0], [0.0, a]]), a)
    return assemble_scene_from_profile(profile, [0.5 * l, 0.5 * a], 0.0, periods_realized)


@dataclass(frozen=True)
class BoundaryMesh:
    """Straight boundary elements on open curves.

    Per-element arrays, all of length ``n``: ``start``, ``end``, ``mid``
    (collocation nodes), ``normal`` (unit, into the gap), ``length``,
    ``plate`` (LOWER/UPPER), ``edge`` (index of the straight edge the element
    lies on), ``prev``/``next`` (neighbour along the same curve, -1 at ends).
    """

    start: np.ndarray
    end: np.ndarray
    plate: np.ndarray
    edge: np.ndarray
    target_size: float
    mid: np.ndarray = field(init=False, repr=False)
    tangent: np.ndarray = field(init=False, repr=False)
    normal: np.ndarray = field(init=False, repr=False)
    length: np.ndarray = field(init=False, repr=False)
    prev: np.ndarray = field(init=False, repr=False)
    next: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = self.end - self.start
        length = np.linalg.norm(d, axis=1)
        tangent = d / length[:, None]
        # lower curve runs with +x2, gap on its +x1 side; upper is the opposite
        sign = np.where(self.plate == LOWER, 1.0, -1.0)
        normal = sign[:, None] * np.column_stack([tangent[:, 1], -tangent[:, 0]])
        n = len(self.start)
        idx = np.arange(n)
        prev = np.where((idx > 0) & (np.roll(self.plate, 1) == self.plate), idx - 1, -1)
        nxt = np.where((idx < n - 1) & (np.roll(self.plate, -1) == self.plate), idx + 1, -1)
        if n:
            prev[0] = -1
            nxt[-1] = -1
        for name, val in (
            ("mid", 0.5 * (self.start + self.end)),
            ("tangent", tangent),
            ("normal", normal),
            ("length", length),
            ("prev", prev),
            ("next", nxt),
        ):
            object.__setattr__(self, name, val)

    @property
    def size(self) -> int:
        return len(self.start)

    @property
    def total_length(self) -> float:
        return float(np.sum(self.length))

    def corner_points(self) -> np.ndarray:
        """Element endpoints where the edge index changes (curve ends included)."""
        pts = []
        for i in range(self.size):
            if self.prev[i] < 0 or self.edge[self.prev[i]] != self.edge[i]:
                pts.append(self.start[i])
            if self.next[i] < 0 or self.edge[self.next[i]] != self.edge[i]:
                pts.append(self.end[i])
        return np.array(pts)

    def distance_to(self, points) -> np.ndarray:
        """Distance of each point to the nearest element."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        ab = self.end - self.start
        ap = points[:, None, :] - self.start[None, :, :]
        t = np.clip(np.einsum("pnk,nk->pn", ap, ab) / np.einsum("nk,nk->n", ab, ab), 0.0, 1.0)
        proj = self.start[None] + t[..., None] * ab[None]
        return np.min(np.linalg.norm(points[:, None, :] - proj, axis=-1), axis=1)


def _subdivide(polys, sizes_for_edge):
    starts, ends, plates, edges = [], [], [], []
    edge_id = 0
    for plate, poly in enumerate(polys):
        for i in range(len(poly) - 1):
            p, q = poly[i], poly[i + 1]
            n = sizes_for_edge(np.linalg.norm(q - p))
            t = np.linspace(0.0, 1.0, n + 1)
            pts = p + t[:, None] * (q - p)
            pts[-1] = q
            starts.append(pts[:-1])
            ends.append(pts[1:])
            plates.append(np.full(n, plate))
            edges.append(np.full(n, edge_id))
            edge_id += 1
    return (
        np.vstack(starts),
        np.vstack(ends),
        np.concatenate(plates),
        np.concatenate(edges),
    )


def mesh_scene(scene: Scene, target_element_size: float) -> BoundaryMesh:
    """Subdivide every straight edge of both plates into equal elements no
    longer than ``target_element_size``."""
    if not target_element_size > 0:
        raise GeometryError(f"target_element_size must be positive, got {target_element_size}")
    shortest = min(float(np.min(scene.lower.edge_lengths)), float(np.min(scene.upper.edge_lengths)))
    if target_element_size >= shortest:
        raise GeometryError(
            f"target_element_size {target_element_size} is not smaller than the shortest "
            f"profile edge ({shortest:.4g})"
        )
    h = target_element_size
    start, end, plate, edge = _subdivide(scene.curves, lambda L: max(1, math.ceil(L / h - 1e-9)))
    return BoundaryMesh(start, end, plate, edge, h)


def mesh_polylines(polys, target_element_size: float) -> BoundaryMesh:
    """Mesh arbitrary open polylines (one plate tag per polyline)."""
    h = target_element_size
    start, end, plate, edge = _subdivide(
        [np.asarray(p, dtype=float) for p in polys], lambda L: max(1, math.ceil(L / h - 1e-9))
    )
    return BoundaryMesh(start, end, plate, edge, h)


def refine(mesh: BoundaryMesh, factor: int) -> BoundaryMesh:
    """Split every element into ``factor`` equal sub-elements."""
    if int(factor) != factor or factor < 2:
        raise GeometryError(f"refinement factor must be an integer >= 2, got {factor}")
    factor = int(factor)
    t = np.arange(factor + 1) / factor
    d = mesh.end - mesh.start
    pts = mesh.start[:, None, :] + t[None, :, None] * d[:, None, :]
    pts[:, -1, :] = mesh.end
    start = pts[:, :-1, :].reshape(-1, 2)
    end = pts[:, 1:, :].reshape(-1, 2)
    return BoundaryMesh(
        start,
        end,
        np.repeat(mesh.plate, factor),
        np.repeat(mesh.edge, factor),
        mesh.target_size / factor,
    )
