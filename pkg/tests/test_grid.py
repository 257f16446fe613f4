import itertools

import numpy as np
import pytest

from lipext.grid import (
    BOUNDARY,
    EXTERIOR,
    INTERIOR,
    DomainError,
    DomainSpec,
    MaskParseError,
    ball_extrema,
    ball_offsets,
    build_ball_stencil,
    build_domain,
    disk,
    from_mask,
    interval,
    square,
)


def test_interval_3_is_smallest_legal_domain():
    d = interval(3)
    np.testing.assert_array_equal(d.coords[:, 0], [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(d.boundary, [0, 2])
    np.testing.assert_array_equal(d.interior, [1])


def test_square_101_counts():
    d = square(101)
    assert d.shape == (101, 101)
    assert d.boundary.size == 400
    assert d.interior.size == 99**2


def test_coordinates_follow_origin_plus_h_index():
    d = square(11)
    i, j = 7, 3
    assert d.coords[i, j, 0] == 0.0 + d.h * i
    assert d.coords[i, j, 1] == 0.0 + d.h * j


@pytest.mark.parametrize("n", [0, 1, 2])
def test_too_few_nodes_rejected(n):
    with pytest.raises(DomainError):
        interval(n)
    with pytest.raises(DomainError):
        square(n)


def test_disk_5_hand_count():
    # Radius 2 cells about the centre node: 13 nodes inside; only the centre
    # has all 8 neighbours inside (the (1,0) nodes touch (2,1), norm sqrt 5).
    d = disk(5)
    assert np.sum(d.node_class != EXTERIOR) == 13
    np.testing.assert_array_equal(np.argwhere(d.node_class == INTERIOR), [[2, 2]])
    assert d.boundary.size == 12


def test_disk_boundary_matches_adjacency_enumeration():
    d = disk(15)
    inside = d.node_class != EXTERIOR
    n = d.shape[0]
    for i, j in itertools.product(range(n), repeat=2):
        if not inside[i, j]:
            continue
        touches = False
        for di, dj in itertools.product((-1, 0, 1), repeat=2):
            a, b = i + di, j + dj
            if (di or dj) and not (0 <= a < n and 0 <= b < n and inside[a, b]):
                touches = True
        assert (d.node_class[i, j] == BOUNDARY) == touches


def test_mask_parsing_and_forced_boundary():
    text = "#####\n#...#\n#...#\n#...#\n#####\n"
    d = from_mask(text)
    assert d.interior.size == 9
    assert d.boundary.size == 16


def test_mask_l_shape_adjacency():
    text = "\n".join([
        "......",
        "......",
        "......",
        "...   ",
        "...   ",
        "...   ",
    ])
    d = from_mask(text)
    # (2,2) touches excluded (3,3) diagonally
    assert d.node_class[2, 2] == BOUNDARY
    assert d.node_class[1, 1] == INTERIOR
    assert d.node_class[3, 3] == EXTERIOR


def test_mask_parse_error_location():
    with pytest.raises(MaskParseError) as exc:
        from_mask("...\n.x.\n...\n")
    assert exc.value.line == 2 and exc.value.column == 2
    assert "line 2" in str(exc.value)


def test_mask_without_interior_rejected():
    with pytest.raises(DomainError):
        from_mask("###\n###\n###\n")


def test_domain_spec_parse():
    assert DomainSpec.parse("square:11") == DomainSpec("square", 11)
    assert DomainSpec.parse("mask:foo.txt").path == "foo.txt"
    with pytest.raises(DomainError):
        DomainSpec.parse("cube:3")
    with pytest.raises(DomainError):
        build_domain("square:x")


def _enumerate_offsets(dim, r):
    out = []
    R = int(np.ceil(r))
    for o in itertools.product(range(-R, R + 1), repeat=dim):
        if any(o) and sum(t * t for t in o) <= r * r:
            out.append(o)
    return sorted(out)


@pytest.mark.parametrize("eps,count", [(1.0, 4), (1.5, 8), (2.0, 12)])
def test_unit_grid_stencil_sizes(eps, count):
    offs = ball_offsets(2, eps)
    assert len(offs) == count
    assert sorted(map(tuple, offs.tolist())) == _enumerate_offsets(2, eps)


def test_stencil_invariants():
    d = square(21)
    st = build_ball_stencil(d.h, 3.3 * d.h, d)
    offs = {tuple(o) for o in st.offsets.tolist()}
    assert (0, 0) not in offs
    assert offs == {(-a, -b) for a, b in offs}
    assert np.all(np.linalg.norm(st.offsets, axis=1) <= 3.3)
    assert np.all(st.valid.any(axis=1))
    # a node far from the boundary keeps the full offset set
    centre = d.flat_index((10, 10))
    assert st.neighborhood(centre).size == len(offs)
    # a corner-adjacent node is clipped
    assert st.neighborhood(d.flat_index((1, 1))).size < len(offs)


def test_stencil_rejects_small_eps():
    d = square(11)
    with pytest.raises(DomainError):
        build_ball_stencil(d.h, 0.5 * d.h, d)


def test_ball_extrema_examples():
    d = interval(5)
    u = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    st = build_ball_stencil(d.h, 2 * d.h, d)
    assert ball_extrema(u, 2, st) == (0.0, 1.0)
    st1 = build_ball_stencil(d.h, d.h, d)
    v = np.array([0.0, 0.0, 5.0, 2.0, 0.0])
    assert ball_extrema(v, 2, st1) == (0.0, 2.0)
    c = np.full(5, 3.0)
    assert ball_extrema(c, 2, st) == (3.0, 3.0)


def test_ball_extrema_nested_balls():
    rng = np.random.default_rng(1)
    d = square(15)
    u = rng.normal(size=d.shape)
    small = build_ball_stencil(d.h, 1.5 * d.h, d)
    big = build_ball_stencil(d.h, 3 * d.h, d)
    for node in d.interior:
        m, M = ball_extrema(u, node, small)
        m2, M2 = ball_extrema(u, node, big)
        assert m2 <= m and M2 >= M
