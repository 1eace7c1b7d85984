"""Tests for the honeycomb mesh."""

import math
from collections import Counter

import numpy as np
import pytest

from core.design_rep import MaterialField
from core.exceptions import InvalidArgumentError
from core.geometry import point_in_polygon, polygon_signed_area
from core.hexmesh import boundary_edges, format_mesh, generate_grid, lattice_area, locate_point


def test_thirty_by_thirty_domain():
    mesh = generate_grid(30, 30, 1.0)
    assert mesh.n_elements == 900
    L1, L2 = mesh.domain_size
    assert L1 == pytest.approx(45.0)
    assert L2 == pytest.approx(51.96, abs=5e-3)
    xmin, ymin, xmax, ymax = mesh.bounding_box
    assert (xmin, ymin) == (0.0, 0.0)
    assert xmax == pytest.approx(1.5 * 30 + 0.5)
    assert ymax == pytest.approx((30 + 0.5) * math.sqrt(3.0))


def test_single_hexagon(single_hex):
    assert single_hex.n_elements == 1
    assert single_hex.n_nodes == 6
    assert len(boundary_edges(single_hex, np.ones(1, dtype=int))) == 6
    np.testing.assert_allclose(single_hex.positions.min(axis=0), [0.0, 0.0])


def test_shared_nodes_match_coordinate_dedup():
    mesh = generate_grid(2, 2, 1.0)
    corners = mesh.positions[mesh.elements].reshape(-1, 2)
    assert corners.shape == (24, 2)
    unique = []
    for c in corners:
        if not any(np.linalg.norm(c - u) <= 1e-9 for u in unique):
            unique.append(c)
    assert mesh.n_nodes == len(unique)


def test_elements_counter_clockwise_with_unit_edges(small_mesh):
    for e in range(small_mesh.n_elements):
        poly = small_mesh.element_polygon(e)
        assert polygon_signed_area(poly) > 0
        lengths = np.linalg.norm(np.roll(poly, -1, axis=0) - poly, axis=1)
        np.testing.assert_allclose(lengths, 1.0, rtol=1e-12)


def test_lattice_area(small_mesh):
    expected = 4 * 3 * 1.5 * math.sqrt(3.0)
    assert lattice_area(small_mesh) == pytest.approx(expected, rel=1e-9)


def test_interior_edges_shared_by_two_elements(small_mesh):
    tally = Counter()
    for nodes in small_mesh.elements:
        for k in range(6):
            tally[tuple(sorted((int(nodes[k]), int(nodes[(k + 1) % 6]))))] += 1
    assert set(tally.values()) <= {1, 2}
    shared = small_mesh.edge_elements
    assert len(shared) == len(tally)
    assert np.count_nonzero(shared[:, 1] >= 0) == sum(1 for v in tally.values() if v == 2)


def test_boundary_edge_count_matches_incidence_tally():
    mesh = generate_grid(2, 2, 1.0)
    tally = Counter()
    for nodes in mesh.elements:
        for k in range(6):
            tally[tuple(sorted((int(nodes[k]), int(nodes[(k + 1) % 6]))))] += 1
    boundary = boundary_edges(mesh, MaterialField(np.ones(4, dtype=np.int8)))
    assert len(boundary) == sum(1 for v in tally.values() if v == 1)


def test_all_void_has_no_boundary(small_mesh):
    assert boundary_edges(small_mesh, MaterialField(np.zeros(small_mesh.n_elements, dtype=np.int8))) == []


def test_boundary_normals_point_away_from_solid(small_mesh):
    rho = np.ones(small_mesh.n_elements, dtype=np.int8)
    rho[5] = 0
    for edge in boundary_edges(small_mesh, MaterialField(rho)):
        n0, n1 = edge.node_pair
        mid = 0.5 * (small_mesh.positions[n0] + small_mesh.positions[n1])
        assert np.linalg.norm(edge.outward_normal) == pytest.approx(1.0)
        assert (mid - small_mesh.centroids[edge.owner_element]) @ edge.outward_normal > 0
        assert rho[edge.owner_element] == 1


def test_locate_centroids(small_mesh):
    for e, c in enumerate(small_mesh.centroids):
        assert locate_point(small_mesh, c) == e


def test_locate_outside(small_mesh):
    assert locate_point(small_mesh, (-50.0, -50.0)) is None


def test_locate_random_points_match_scan(small_mesh, rng):
    xmin, ymin, xmax, ymax = small_mesh.bounding_box
    for p in rng.uniform([xmin, ymin], [xmax, ymax], size=(200, 2)):
        expected = next(
            (e for e in range(small_mesh.n_elements)
             if point_in_polygon(p, small_mesh.element_polygon(e), 1e-9)),
            None,
        )
        assert locate_point(small_mesh, p) == expected


@pytest.mark.parametrize("cols, rows, a", [(0, 1, 1.0), (1, 0, 1.0), (1, 1, 0.0), (2, 2, -1.0)])
def test_invalid_arguments(cols, rows, a):
    with pytest.raises(InvalidArgumentError):
        generate_grid(cols, rows, a)


def test_format_mesh_sections(single_hex):
    lines = format_mesh(single_hex).splitlines()
    assert lines[0] == "# nodes 6"
    assert lines[7] == "# elements 1"
    assert len(lines[8].split()) == 7
