"""Ring lattice combinatorics.

Rings sit on the vertices of a simply connected subcomplex of Z^2.  The
(m, n) lattice, where rings live on the even sublattice of a rectangle
and touching points on the odd one, is relabelled by

    (m, n) -> ((m + n) / 2, (n - m) / 2)

so that neighbouring rings become unit edges and every touching point
becomes a unit face.  In the relabelled lattice the NE/SW diagonal of a face
joins rings whose outer circles touch; the NW/SE diagonal joins rings whose
inner circles touch.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

Vertex = tuple[int, int]

# E, N, W, S in counter-clockwise order.
DIRECTIONS: tuple[Vertex, ...] = ((1, 0), (0, 1), (-1, 0), (0, -1))
SLOT_NAMES = ("E", "N", "W", "S")


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class QuadComplex:
    """Immutable ring lattice with vertices stored in row-major order."""

    vertices: tuple[Vertex, ...]
    edges: tuple[tuple[int, int], ...]
    faces: tuple[Vertex, ...]  # lower-left corner of each unit square
    index: dict[Vertex, int] = field(repr=False, compare=False)
    _slots: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbor_slots(self, i: int) -> tuple[int, ...]:
        """Neighbour indices in E, N, W, S order; -1 where absent."""
        return self._slots[i]

    def neighbors(self, v: Vertex) -> list[Vertex]:
        i = self._lookup(v)
        return [self.vertices[j] for j in self._slots[i] if j >= 0]

    def valence(self, v: Vertex) -> int:
        return len(self.neighbors(v))

    def is_boundary(self, v: Vertex) -> bool:
        return self.valence(v) < 4

    @property
    def valences(self) -> list[int]:
        return [sum(1 for j in s if j >= 0) for s in self._slots]

    @property
    def interior_indices(self) -> list[int]:
        return [i for i, val in enumerate(self.valences) if val == 4]

    @property
    def boundary_indices(self) -> list[int]:
        return [i for i, val in enumerate(self.valences) if val < 4]

    def face_corners(self, face: Vertex) -> tuple[int, int, int, int]:
        """Indices of (SW, SE, NE, NW) corners of a face."""
        a, b = face
        return (self.index[(a, b)], self.index[(a + 1, b)],
                self.index[(a + 1, b + 1)], self.index[(a, b + 1)])

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + len(self.faces)

    def _lookup(self, v: Vertex) -> int:
        try:
            return self.index[tuple(v)]
        except KeyError:
            raise GridError(f"unknown vertex {tuple(v)}") from None


def _assemble(vertex_set: Iterable[Vertex], faces: Iterable[Vertex] | None = None) -> QuadComplex:
    verts = sorted({(int(a), int(b)) for a, b in vertex_set}, key=lambda v: (v[1], v[0]))
    index = {v: i for i, v in enumerate(verts)}
    slots = []
    edges = []
    for i, (a, b) in enumerate(verts):
        row = tuple(index.get((a + da, b + db), -1) for da, db in DIRECTIONS)
        slots.append(row)
        for j in row[:2]:  # E and N only, so each edge appears once
            if j >= 0:
                edges.append((i, j))
    if faces is None:
        faces = [(a, b) for (a, b) in verts
                 if {(a + 1, b), (a + 1, b + 1), (a, b + 1)} <= index.keys()]
    faces = tuple(sorted(faces, key=lambda f: (f[1], f[0])))
    return QuadComplex(tuple(verts), tuple(edges), faces, index, tuple(slots))


def _check_connected(cx: QuadComplex) -> None:
    if cx.n_vertices == 0:
        raise GridError("empty complex")
    seen = {0}
    todo = deque([0])
    while todo:
        i = todo.popleft()
        for j in cx.neighbor_slots(i):
            if j >= 0 and j not in seen:
                seen.add(j)
                todo.append(j)
    if len(seen) != cx.n_vertices:
        stray = next(cx.vertices[i] for i in range(cx.n_vertices) if i not in seen)
        raise GridError(f"complex is disconnected: vertex {stray} is not reachable")


def _check_simply_connected(cx: QuadComplex) -> None:
    chi = cx.euler_characteristic()
    if chi != 1:
        raise GridError(f"not simply connected: V - E + F = {chi} != 1")


def build_rectangle(M: int, N: int) -> QuadComplex:
    """All sites 0 <= a < M, 0 <= b < N with every unit square as a face."""
    if M < 1 or N < 1:
        raise GridError(f"rectangle needs M, N >= 1, got {M} x {N}")
    return _assemble((a, b) for a in range(M) for b in range(N))


def build_from_mask(cells: Iterable[Vertex]) -> QuadComplex:
    """Complex induced by a set of unit faces given by their lower-left corners."""
    cells = {(int(a), int(b)) for a, b in cells}
    if not cells:
        raise GridError("empty face mask")
    # edge-connectivity of the faces
    start = next(iter(cells))
    seen = {start}
    todo = deque([start])
    while todo:
        a, b = todo.popleft()
        for da, db in DIRECTIONS:
            nb = (a + da, b + db)
            if nb in cells and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    if seen != cells:
        stray = sorted(cells - seen)[0]
        raise GridError(f"face mask is disconnected: face {stray} shares no edge path with {start}")
    verts = set()
    for a, b in cells:
        verts.update({(a, b), (a + 1, b), (a + 1, b + 1), (a, b + 1)})
    cx = _assemble(verts)
    extra = set(cx.faces) - cells
    if extra:
        # a unit square whose corners are all present but which is not in the
        # mask is a hole of size one
        raise GridError(f"not simply connected: hole at face {sorted(extra)[0]}")
    _check_simply_connected(cx)
    return cx


def build_from_vertices(vertex_set: Iterable[Vertex]) -> QuadComplex:
    """Complex induced by a vertex set (edges and faces are all unit cells present)."""
    cx = _assemble(vertex_set)
    _check_connected(cx)
    _check_simply_connected(cx)
    return cx


def mn_to_ab(m: int, n: int) -> Vertex:
    if (m + n) % 2:
        raise GridError(f"({m}, {n}) is not on the even sublattice")
    return ((m + n) // 2, (n - m) // 2)


def ab_to_mn(a: int, b: int) -> tuple[int, int]:
    return (a - b, a + b)


def build_even_sublattice(M: int, N: int) -> QuadComplex:
    """Rings on the even sites of the combinatorial rectangle 1..M x 1..N.

    For odd M and N the four corners of the rectangle carry rings of valence
    one and the sides carry rings of valence two; this is the quadrilateral
    layout used for Neumann problems with prescribed corner angles.
    """
    if M < 1 or N < 1:
        raise GridError(f"rectangle needs M, N >= 1, got {M} x {N}")
    sites = [mn_to_ab(m, n) for m in range(1, M + 1)
             for n in range(1, N + 1) if (m + n) % 2 == 0]
    return build_from_vertices(sites)


def even_sublattice_corners(M: int, N: int) -> list[Vertex]:
    """Corner rings (1,1), (M,1), (M,N), (1,N) in lattice labels (M, N odd)."""
    if M % 2 == 0 or N % 2 == 0:
        raise GridError("corners carry rings only for odd M and N")
    return [mn_to_ab(m, n) for m, n in ((1, 1), (M, 1), (M, N), (1, N))]
