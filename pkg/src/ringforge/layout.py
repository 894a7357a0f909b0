"""Geometric realization of solved ring patterns and their export.

Centers are placed breadth-first from a root ring.  At every ring the
directions to its neighbours are obtained from one known direction by
accumulating half-kite angles counter-clockwise (E, N, W, S):

    E -> N: psi_E + psi_N      N -> W: phi_N + phi_W
    W -> S: psi_W + psi_S      S -> E: phi_S + phi_E

where psi_k is the angle subtended at the centre by the half-kite on the
outer circle and phi_k = theta_k - psi_k the one on the inner circle.

Sphere points are unit vectors in R^3.  Hyperbolic points live on the upper
sheet of the hyperboloid x^2 + y^2 - z^2 = -1 and are only mapped to the
Poincare disk for output.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .grid import QuadComplex, Vertex, ab_to_mn, mn_to_ab
from .pattern import Geometry, RingRadii, RingState, center_distance, radii_from_u, theta

PROJECTIONS = ("stereographic", "orthographic", "poincare")


class LayoutError(ValueError):
    pass


# -- model geometry -----------------------------------------------------------

class _Sphere:
    @staticmethod
    def geodesic(p, t, d):
        return math.cos(d) * p + math.sin(d) * t

    @staticmethod
    def back_tangent(p, t, d):
        """Unit tangent at the end of the geodesic, pointing back to p."""
        return math.sin(d) * p - math.cos(d) * t

    @staticmethod
    def rotate(p, t, a):
        return math.cos(a) * t + math.sin(a) * np.cross(p, t)

    @staticmethod
    def normalize(p):
        return p / np.linalg.norm(p)

    @staticmethod
    def distance(p, q):
        return math.atan2(np.linalg.norm(np.cross(p, q)), float(p @ q))

    @staticmethod
    def log_direction(p, x):
        """Unit tangent at p towards x."""
        w = x - (p @ x) * p
        return w / np.linalg.norm(w)


def _minkowski(a, b):
    return float(a[0] * b[0] + a[1] * b[1] - a[2] * b[2])


def _lorentz_cross(a, b):
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     -(a[0] * b[1] - a[1] * b[0])])


class _Hyperboloid:
    @staticmethod
    def geodesic(p, t, d):
        return math.cosh(d) * p + math.sinh(d) * t

    @staticmethod
    def back_tangent(p, t, d):
        return -(math.sinh(d) * p + math.cosh(d) * t)

    @staticmethod
    def rotate(p, t, a):
        return math.cos(a) * t + math.sin(a) * _lorentz_cross(p, t)

    @staticmethod
    def normalize(p):
        return p / math.sqrt(-_minkowski(p, p))

    @staticmethod
    def distance(p, q):
        w = p - q
        return 2.0 * math.asinh(0.5 * math.sqrt(max(_minkowski(w, w), 0.0)))

    @staticmethod
    def log_direction(p, x):
        w = x + _minkowski(p, x) * p
        return w / math.sqrt(max(_minkowski(w, w), 1e-300))


def _model(geometry: Geometry):
    return _Sphere if geometry is Geometry.SPHERE else _Hyperboloid


def poincare(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p[..., :2] / (1.0 + p[..., 2:3])


def from_poincare(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    s = np.sum(x * x, axis=-1, keepdims=True)
    return np.concatenate([2 * x, 1 + s], axis=-1) / (1 - s)


# -- results ------------------------------------------------------------------

@dataclass
class TouchingPoint:
    pair: tuple[Vertex, Vertex]  # the two rings of one diagonal of a face
    point: np.ndarray
    cls: str  # "outer" (NE-SW diagonal) or "inner" (NW-SE diagonal)


@dataclass
class LayoutResult:
    geometry: Geometry
    q: float
    vertices: tuple[Vertex, ...]
    u: np.ndarray
    radii: RingRadii
    centers: np.ndarray  # unit vectors (sphere) or Poincare disk points
    orientation: np.ndarray
    touching_points: list[TouchingPoint] = field(default_factory=list)
    closure_gaps: np.ndarray = field(default_factory=lambda: np.zeros(0))  # per face
    orthogonality_errors: np.ndarray = field(default_factory=lambda: np.zeros(0))  # per edge
    distance_errors: np.ndarray = field(default_factory=lambda: np.zeros(0))  # per edge
    orientation_ok: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def max_closure_gap(self) -> float:
        return float(np.max(self.closure_gaps, initial=0.0))

    @property
    def max_orthogonality_error(self) -> float:
        return float(np.nanmax(self.orthogonality_errors, initial=0.0))

    @property
    def max_distance_error(self) -> float:
        return float(np.max(self.distance_errors, initial=0.0))

    def model_points(self) -> np.ndarray:
        """Centers in the internal model (unit sphere or hyperboloid)."""
        if self.geometry is Geometry.SPHERE:
            return self.centers
        return from_poincare(self.centers)


# -- construction ---------------------------------------------------------------

def _half_kites(u_v, u_k, geometry, ctx):
    """(phi, psi) for the kites of ring v with the neighbours u_k."""
    r, R = radii_from_u(u_v, geometry, ctx)
    r_k, _ = radii_from_u(u_k, geometry, ctx)
    if geometry is Geometry.SPHERE:
        psi = np.arctan(np.tan(r_k) / np.sin(R))
    else:
        psi = np.arctan(np.tanh(r_k) / np.sinh(R))
    th = theta(u_v, u_k, geometry, ctx)
    return th - psi, psi


def _slot_angles(cx: QuadComplex, state: RingState, i: int, s0: int) -> dict[int, float]:
    """Angle of every neighbour direction relative to slot s0."""
    slots = cx.neighbor_slots(i)
    present = [s for s in range(4) if slots[s] >= 0]
    nbr_u = state.u[[slots[s] for s in present]]
    phi_a, psi_a = _half_kites(state.u[i], nbr_u, state.geometry, state.ctx)
    phi = {s: float(a) for s, a in zip(present, np.atleast_1d(phi_a))}
    psi = {s: float(a) for s, a in zip(present, np.atleast_1d(psi_a))}

    def inc(s):  # from slot s to slot s + 1
        t = (s + 1) % 4
        return psi[s] + psi[t] if s % 2 == 0 else phi[s] + phi[t]

    angles = {s0: 0.0}
    s, a = s0, 0.0
    while slots[(s + 1) % 4] >= 0 and (s + 1) % 4 != s0:
        a += inc(s)
        s = (s + 1) % 4
        angles[s] = a
    s, a = s0, 0.0
    while slots[(s - 1) % 4] >= 0 and (s - 1) % 4 not in angles:
        s = (s - 1) % 4
        a -= inc(s)
        angles[s] = a
    if len(angles) != len(present):
        raise LayoutError(
            f"neighbour directions at ring {cx.vertices[i]} are not determined: "
            "its neighbours do not form a contiguous fan")
    return angles


def realize(state: RingState, cx: QuadComplex, root: Vertex | None = None,
            root_frame: tuple | None = None) -> LayoutResult:
    """Place ring centres breadth-first from ``root``.

    The default root is the ring closest to the middle of the lattice.  The
    default frame puts it at the north pole (sphere) or the disk origin
    (hyperbolic) with its first neighbour direction along +x.  ``root_frame``
    may give (point, tangent) in the internal model instead.
    """
    geometry = state.geometry
    M = _model(geometry)
    n = cx.n_vertices
    if cx.n_edges == 0:
        raise LayoutError("complex has no edges")
    if root is None:
        verts = np.array(cx.vertices, dtype=float)
        mid = verts.mean(axis=0)
        i_root = int(np.argmin(np.sum((verts - mid) ** 2, axis=1)))
    else:
        i_root = cx.index.get(tuple(root), -1)
        if i_root < 0:
            raise LayoutError(f"root {root} is not a vertex")
    if root_frame is None:
        p0, t0 = np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0])
    else:
        p0, t0 = (np.asarray(x, dtype=float) for x in root_frame)

    pos = [None] * n
    tangents: list[dict[int, np.ndarray] | None] = [None] * n

    def open_vertex(i, s0, t_s0):
        angles = _slot_angles(cx, state, i, s0)
        tangents[i] = {s: M.rotate(pos[i], t_s0, a) for s, a in angles.items()}

    pos[i_root] = p0
    s_first = next(s for s, j in enumerate(cx.neighbor_slots(i_root)) if j >= 0)
    open_vertex(i_root, s_first, t0)
    todo = deque([i_root])
    while todo:
        i = todo.popleft()
        for s, j in enumerate(cx.neighbor_slots(i)):
            if j < 0 or pos[j] is not None:
                continue
            d = float(center_distance(state.u[i], state.u[j], geometry, state.ctx))
            t = tangents[i][s]
            pos[j] = M.normalize(M.geodesic(pos[i], t, d))
            back = M.back_tangent(pos[i], t, d)
            open_vertex(j, (s + 2) % 4, back)
            todo.append(j)
    if any(p is None for p in pos):
        raise LayoutError("complex is disconnected")

    P = np.array(pos)
    radii = radii_from_u(state.u, geometry, state.ctx)
    r = np.asarray(radii.r)
    R = np.asarray(radii.R)

    def predict(i, s):
        j = cx.neighbor_slots(i)[s]
        d = float(center_distance(state.u[i], state.u[j], geometry, state.ctx))
        return M.geodesic(P[i], tangents[i][s], d)

    # per-face path independence: every corner predicted from both face neighbours
    gaps = np.zeros(len(cx.faces))
    for f, face in enumerate(cx.faces):
        sw, se, ne, nw = cx.face_corners(face)
        preds = [(predict(sw, 0), se), (predict(sw, 1), nw), (predict(se, 1), ne), (predict(se, 2), sw),
                 (predict(ne, 2), nw), (predict(ne, 3), se), (predict(nw, 0), ne), (predict(nw, 3), sw)]
        gaps[f] = max(M.distance(M.normalize(x), P[k]) for x, k in preds)

    e = np.asarray(cx.edges, dtype=int).reshape(-1, 2)
    d_expected = center_distance(state.u[e[:, 0]], state.u[e[:, 1]], geometry, state.ctx)
    d_real = np.array([M.distance(P[a], P[b]) for a, b in e])
    dist_err = np.abs(d_real - d_expected)
    ortho = np.array([max(_ortho_error(d, R[a], r[b], geometry), _ortho_error(d, R[b], r[a], geometry))
                      for d, (a, b) in zip(d_real, e)])

    # all four circles of a face meet in one point: the outer circles of the
    # NE-SW pair and the inner circles of the NW-SE pair
    touching = []
    for f, face in enumerate(cx.faces):
        sw, se, ne, nw = cx.face_corners(face)
        outer = _touching_point(M, P, tangents, cx, state, sw, 0, "outer", R, r)
        inner = _touching_point(M, P, tangents, cx, state, se, 1, "inner", R, r)
        gaps[f] = max(gaps[f], M.distance(outer, inner))
        touching.append(TouchingPoint((cx.vertices[sw], cx.vertices[ne]), outer, "outer"))
        touching.append(TouchingPoint((cx.vertices[se], cx.vertices[nw]), inner, "inner"))

    orient_ok = _orientation_flags(M, P, tangents, cx, state,
                                   [tp.point for tp in touching if tp.cls == "outer"])
    centers = P if geometry is Geometry.SPHERE else poincare(P)
    if geometry is Geometry.HYPERBOLIC:
        for tp in touching:
            tp.point = poincare(tp.point)
    return LayoutResult(geometry, state.q, cx.vertices, state.u.copy(), RingRadii(r, R), centers,
                        np.where(state.u <= state.ctx.K, 1, -1), touching, gaps, ortho, dist_err,
                        orient_ok)


def _ortho_error(d, R_a, r_b, geometry) -> float:
    """|angle - pi/2| between the circles of radii R_a and |r_b| at centre distance d."""
    rb = abs(float(r_b))
    if rb == 0.0:
        return math.nan
    if geometry is Geometry.SPHERE:
        c = (math.cos(d) - math.cos(R_a) * math.cos(rb)) / (math.sin(R_a) * math.sin(rb))
    else:
        c = (math.cosh(R_a) * math.cosh(rb) - math.cosh(d)) / (math.sinh(R_a) * math.sinh(rb))
    return abs(math.acos(max(-1.0, min(1.0, c))) - math.pi / 2)


def _touching_point(M, P, tangents, cx, state, i, s, cls, R, r):
    """Touching point in the quadrant between slots s and s + 1 of ring i."""
    slots = cx.neighbor_slots(i)
    j = slots[s]
    phi, psi = _half_kites(state.u[i], state.u[j], state.geometry, state.ctx)
    a = float(psi) if cls == "outer" else float(phi)
    dist = float(R[i]) if cls == "outer" else abs(float(r[i]))
    direction = M.rotate(P[i], tangents[i][s], a)
    return M.normalize(M.geodesic(P[i], direction, dist))


def _orientation_flags(M, P, tangents, cx, state, face_points) -> np.ndarray:
    """Cyclic order of the touching points around each ring matches sign(r).

    Every face point is computed once (from its SW ring) and then viewed from
    all four of its rings, so three of the four views are independent checks.
    """
    seen: list[list[tuple[int, np.ndarray]]] = [[] for _ in range(cx.n_vertices)]
    for face, x in zip(cx.faces, face_points):
        # quadrant of the face as seen from SW, SE, NE, NW respectively
        for quadrant, i in enumerate(cx.face_corners(face)):
            seen[i].append((quadrant, x))
    flags = np.ones(cx.n_vertices, dtype=bool)
    for i, pts in enumerate(seen):
        if len(pts) < 3:
            continue
        ref = next(iter(tangents[i].values()))
        normal_ref = M.rotate(P[i], ref, math.pi / 2)
        ang = []
        for quadrant, x in pts:
            if M.distance(P[i], x) < 1e-12:  # degenerate inner circle
                continue
            d = M.log_direction(P[i], x)
            ang.append((math.atan2(_dot(M, d, normal_ref), _dot(M, d, ref)) % (2 * math.pi), quadrant))
        if len(ang) < 3:
            continue
        seq = [qd for _, qd in sorted(ang)]
        steps = [(b - a) % 4 for a, b in zip(seq, seq[1:] + seq[:1])]
        # counter-clockwise sweeps visit the quadrants in increasing order
        ccw = sum(steps) == 4
        cw = sum((-x) % 4 for x in steps) == 4
        flags[i] = ccw if state.u[i] <= state.ctx.K else cw
    return flags


def _dot(M, a, b):
    return float(a @ b) if M is _Sphere else _minkowski(a, b)


def touching_points(layout: LayoutResult, state: RingState | None = None,
                    cx: QuadComplex | None = None) -> list[TouchingPoint]:
    return layout.touching_points


# -- JSON ---------------------------------------------------------------------------

def export_json(layout: LayoutResult) -> str:
    vertices = []
    for k, v in enumerate(layout.vertices):
        vertices.append({
            "mn": list(ab_to_mn(*v)),
            "u": float(layout.u[k]),
            "r": float(layout.radii.r[k]),
            "R": float(layout.radii.R[k]),
            "center": [float(x) for x in layout.centers[k]],
            "orientation": int(layout.orientation[k]),
        })
    touching = [{
        "edge": [list(ab_to_mn(*tp.pair[0])), list(ab_to_mn(*tp.pair[1]))],
        "point": [float(x) for x in tp.point],
        "class": tp.cls,
    } for tp in layout.touching_points]
    doc = {
        "geometry": layout.geometry.value,
        "q": float(layout.q),
        "vertices": vertices,
        "touching_points": touching,
        "reports": {
            "max_closure_gap": layout.max_closure_gap,
            "max_orthogonality_error": layout.max_orthogonality_error,
            "max_distance_error": layout.max_distance_error,
            "closure_gaps": [float(x) for x in layout.closure_gaps],
            "orthogonality_errors": [None if math.isnan(x) else float(x) for x in layout.orthogonality_errors],
            "distance_errors": [float(x) for x in layout.distance_errors],
            "orientation_ok": [bool(x) for x in layout.orientation_ok],
        },
    }
    return json.dumps(doc, indent=1)


def import_json(text: str) -> LayoutResult:
    doc = json.loads(text)
    verts = tuple(mn_to_ab(*v["mn"]) for v in doc["vertices"])
    col = lambda key: np.array([v[key] for v in doc["vertices"]], dtype=float)  # noqa: E731
    rep = doc["reports"]
    touching = [TouchingPoint((mn_to_ab(*t["edge"][0]), mn_to_ab(*t["edge"][1])),
                              np.array(t["point"], dtype=float), t["class"])
                for t in doc["touching_points"]]
    return LayoutResult(
        Geometry(doc["geometry"]), float(doc["q"]), verts, col("u"), RingRadii(col("r"), col("R")),
        np.array([v["center"] for v in doc["vertices"]], dtype=float),
        np.array([v["orientation"] for v in doc["vertices"]], dtype=int), touching,
        np.array(rep["closure_gaps"], dtype=float),
        np.array([math.nan if x is None else x for x in rep["orthogonality_errors"]], dtype=float),
        np.array(rep["distance_errors"], dtype=float),
        np.array(rep["orientation_ok"], dtype=bool))


# -- SVG ----------------------------------------------------------------------------

def _circumcircle(a, b, c):
    ax, ay = a
    bx, by = b
    cx_, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx_ * (ay - by))
    if abs(d) < 1e-14:
        return None
    s_a, s_b, s_c = ax * ax + ay * ay, bx * bx + by * by, cx_ * cx_ + cy * cy
    ux = (s_a * (by - cy) + s_b * (cy - ay) + s_c * (ay - by)) / d
    uy = (s_a * (cx_ - bx) + s_b * (ax - cx_) + s_c * (bx - ax)) / d
    return ux, uy, math.hypot(ax - ux, ay - uy)


def _circle_samples(M, center, radius):
    """Three points of the circle of the given radius around a model point."""
    e = np.array([1.0, 0.0, 0.0]) if abs(center[0]) < 0.5 else np.array([0.0, 1.0, 0.0])
    t = M.log_direction(center, center + e)
    return [M.geodesic(center, M.rotate(center, t, a), radius) for a in (0.0, 2 * math.pi / 3, 4 * math.pi / 3)]


def _stereo(p):
    return (p[0] / (1.0 + p[2]), p[1] / (1.0 + p[2]))


def export_svg(layout: LayoutResult, projection: str = "stereographic") -> str:
    if projection not in PROJECTIONS:
        raise LayoutError(f"unknown projection {projection!r}; expected one of {', '.join(PROJECTIONS)}")
    sphere = layout.geometry is Geometry.SPHERE
    if sphere == (projection == "poincare"):
        raise LayoutError(f"projection {projection!r} does not apply to {layout.geometry.value} patterns")
    M = _model(layout.geometry)
    P = layout.model_points()
    shapes = []  # per ring: list of (kind, params, negative_inner)
    for k in range(len(layout.vertices)):
        rings = []
        for radius, inner in ((float(layout.radii.R[k]), False), (abs(float(layout.radii.r[k])), True)):
            neg = inner and layout.orientation[k] < 0
            if projection == "orthographic":
                # a small circle with axis c projects to an ellipse whose short
                # axis points along (c_x, c_y)
                c = P[k]
                cx_, cy = math.cos(radius) * c[0], math.cos(radius) * c[1]
                rot = math.degrees(math.atan2(c[1], c[0]))
                rings.append(("ellipse", (cx_, cy, math.sin(radius) * abs(c[2]), math.sin(radius), rot, c[2] < 0), inner, neg))
            else:
                if radius < 1e-12:
                    x, y = _stereo(P[k]) if sphere else tuple(poincare(P[k]))
                    rings.append(("circle", (x, y, 0.0), inner, neg))
                    continue
                pts = _circle_samples(M, P[k], radius)
                img = [_stereo(p) if sphere else tuple(poincare(p)) for p in pts]
                cc = _circumcircle(*img)
                if cc is None:
                    continue
                rings.append(("circle", cc, inner, neg))
        shapes.append(rings)
    scale = 1.0
    if projection == "stereographic":
        extent = max((max(abs(p[0]), abs(p[1])) + p[2] for rings in shapes for _, p, _, _ in rings),
                     default=1.0)
        scale = 1.0 / extent if extent > 0 else 1.0
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.05 -1.05 2.1 2.1" width="800" height="800">',
           '<g transform="scale(1,-1)" fill="none" stroke-width="0.002">']
    if projection == "poincare":
        out.append('<circle class="boundary" cx="0" cy="0" r="1" stroke="#888888"/>')
    for k, rings in enumerate(shapes):
        m, n = ab_to_mn(*layout.vertices[k])
        out.append(f'<g class="ring" data-mn="{m},{n}">')
        for kind, p, inner, neg in rings:
            color = "#d62728" if neg else ("#1f77b4" if inner else "#000000")
            if kind == "circle":
                x, y, rad = (float(scale * v) for v in p)
                out.append(f'<circle cx="{x!r}" cy="{y!r}" r="{rad!r}" stroke="{color}"/>')
            else:
                x, y, rx, ry, rot = (float(v) for v in p[:5])
                back = p[5]
                dash = ' stroke-dasharray="0.01,0.01"' if back else ""
                out.append(f'<ellipse cx="{x!r}" cy="{y!r}" rx="{rx!r}" ry="{ry!r}" '
                           f'transform="rotate({rot!r} {x!r} {y!r})" stroke="{color}"{dash}/>')
        out.append("</g>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
