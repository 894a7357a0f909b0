from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ringforge.grid import (GridError, build_even_sublattice, build_from_mask, build_from_vertices,
                            build_rectangle, even_sublattice_corners, ab_to_mn,
                            mn_to_ab)


def test_single_site():
    cx = build_rectangle(1, 1)
    assert (cx.n_vertices, cx.n_edges) == (1, 0)
    assert cx.valences == [0] and cx.boundary_indices == [0]


def test_three_by_three():
    cx = build_rectangle(3, 3)
    assert (cx.n_vertices, cx.n_edges, len(cx.faces)) == (9, 12, 4)
    assert len(cx.interior_indices) == 1
    center = cx.vertices[cx.interior_indices[0]]
    assert center == (1, 1)
    assert cx.neighbors(center) == [(2, 1), (1, 2), (0, 1), (1, 0)]  # E, N, W, S
    assert cx.valence((0, 0)) == 2


def test_two_by_two():
    cx = build_rectangle(2, 2)
    assert (cx.n_vertices, cx.n_edges, len(cx.faces)) == (4, 4, 1)
    assert cx.valences == [2, 2, 2, 2]
    assert all(cx.is_boundary(v) for v in cx.vertices)


@pytest.mark.parametrize("M,N", [(0, 3), (3, 0), (-1, 2)])
def test_rectangle_rejects_empty(M, N):
    with pytest.raises(GridError):
        build_rectangle(M, N)


def test_unknown_vertex():
    with pytest.raises(GridError, match="unknown vertex"):
        build_rectangle(2, 2).neighbors((5, 5))


def test_single_face_mask_is_two_by_two():
    assert build_from_mask({(0, 0)}).vertices == build_rectangle(2, 2).vertices


def test_l_shape():
    cx = build_from_mask({(0, 0), (1, 0), (0, 1)})
    assert (cx.n_vertices, cx.n_edges, len(cx.faces)) == (8, 10, 3)


def test_annulus_rejected():
    ring = {(a, b) for a in range(3) for b in range(3)} - {(1, 1)}
    with pytest.raises(GridError, match="not simply connected"):
        build_from_mask(ring)


def test_large_annulus_rejected():
    ring = {(a, b) for a in range(4) for b in range(4)} - {(1, 1), (2, 1), (1, 2), (2, 2)}
    with pytest.raises(GridError, match="not simply connected"):
        build_from_mask(ring)


def test_disconnected_mask_rejected():
    with pytest.raises(GridError, match="disconnected"):
        build_from_mask({(0, 0), (3, 3)})


def test_disconnected_vertices_rejected():
    with pytest.raises(GridError, match="disconnected"):
        build_from_vertices({(0, 0), (0, 1), (5, 5)})


def test_relabeling_round_trip():
    for m in range(-4, 5):
        for n in range(-4, 5):
            if (m + n) % 2 == 0:
                assert ab_to_mn(*mn_to_ab(m, n)) == (m, n)
    with pytest.raises(GridError):
        mn_to_ab(1, 2)


def test_even_sublattice_valences():
    cx = build_even_sublattice(5, 5)
    assert cx.n_vertices == 13  # even sites of a 5 x 5 rectangle
    corners = even_sublattice_corners(5, 5)
    assert [cx.valence(c) for c in corners] == [1, 1, 1, 1]
    assert [ab_to_mn(*c) for c in corners] == [(1, 1), (5, 1), (5, 5), (1, 5)]
    others = [cx.valence(cx.vertices[i]) for i in cx.boundary_indices
              if cx.vertices[i] not in corners]
    assert set(others) == {2}
    with pytest.raises(GridError):
        even_sublattice_corners(4, 5)


def test_shipped_grid_sizes():
    assert build_even_sublattice(21, 21).n_vertices == 221
    assert build_even_sublattice(15, 15).euler_characteristic() == 1


@st.composite
def masks(draw):
    """Random simply connected face sets grown by adding adjacent cells."""
    cells = {(0, 0)}
    for _ in range(draw(st.integers(0, 15))):
        a, b = draw(st.sampled_from(sorted(cells)))
        da, db = draw(st.sampled_from([(1, 0), (0, 1), (-1, 0), (0, -1)]))
        cells.add((a + da, b + db))
    return cells


@given(masks())
def test_mask_invariants(cells):
    try:
        cx = build_from_mask(cells)
    except GridError as exc:
        assert "not simply connected" in str(exc)
        return
    assert sum(cx.valences) == 2 * cx.n_edges
    assert cx.euler_characteristic() == 1
    assert all(1 <= v <= 4 for v in cx.valences)
    for v in cx.vertices:
        for w in cx.neighbors(v):
            assert v in cx.neighbors(w)
        assert cx.is_boundary(v) == (cx.valence(v) < 4)


@given(st.integers(1, 9), st.integers(1, 9))
def test_rectangle_counts(M, N):
    cx = build_rectangle(M, N)
    assert cx.n_vertices == M * N
    assert cx.n_edges == M * (N - 1) + N * (M - 1)
    assert len(cx.interior_indices) == max(M - 2, 0) * max(N - 2, 0)
    assert cx.euler_characteristic() == 1
