"""Tests for boundary smoothing and second-step removal."""

import math

import numpy as np
import pytest

from core.design_rep import Mask, MaterialField, assign_material_states
from core.exceptions import NonManifoldBoundaryError
from core.geometry import closest_point_on_segment, polygon_signed_area, polyline_self_intersects
from core.hexmesh import BoundaryEdge, boundary_edges, generate_grid
from core.smoothing import second_step_removal, smooth, smooth_pass, trace_loops


def loop_edges(node_ids):
    n = len(node_ids)
    return [BoundaryEdge((node_ids[i], node_ids[(i + 1) % n]), 0, np.array([0.0, -1.0])) for i in range(n)]


def solid_field(mesh, void=()):
    rho = np.ones(mesh.n_elements, dtype=np.int8)
    rho[list(void)] = 0
    return MaterialField(rho)


def test_right_angle_corner_moves_by_quarter_root_two():
    positions = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    step = smooth_pass(positions, loop_edges([0, 1, 2, 3]))
    np.testing.assert_allclose(step.displaced_positions[0], [0.25, 0.25])
    assert np.linalg.norm(step.displaced_positions[0] - positions[0]) == pytest.approx(math.sqrt(2.0) / 4.0)


def test_collinear_node_stays():
    positions = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]])
    step = smooth_pass(positions, loop_edges([0, 1, 2, 3, 4]))
    np.testing.assert_allclose(step.displaced_positions[1], positions[1], atol=1e-15)


def test_pass_lands_on_midpoint_chords(small_mesh):
    boundary = boundary_edges(small_mesh, solid_field(small_mesh, void=[5]))
    step = smooth_pass(small_mesh.positions, boundary)
    incident = {}
    for edge in boundary:
        for n in edge.node_pair:
            incident.setdefault(n, []).append(edge)
    for node, p in step.displaced_positions.items():
        mids = [0.5 * (small_mesh.positions[e.node_pair[0]] + small_mesh.positions[e.node_pair[1]])
                for e in incident[node]]
        _, _, dist = closest_point_on_segment(p, mids[0], mids[1])
        assert dist < 1e-9


def test_interior_nodes_unchanged(small_mesh):
    boundary = boundary_edges(small_mesh, solid_field(small_mesh))
    on_boundary = {n for e in boundary for n in e.node_pair}
    result = smooth(small_mesh.positions, boundary, 10)
    moved = result.apply(small_mesh.positions)
    for n in range(small_mesh.n_nodes):
        if n not in on_boundary:
            assert np.array_equal(moved[n], small_mesh.positions[n])
    assert result.moved_node_ids <= on_boundary
    assert result.pass_count == 10


def test_single_pass_equals_smooth_pass(small_mesh):
    boundary = boundary_edges(small_mesh, solid_field(small_mesh))
    once = smooth(small_mesh.positions, boundary, 1)
    step = smooth_pass(small_mesh.positions, boundary)
    np.testing.assert_array_equal(once.apply(small_mesh.positions), step.apply(small_mesh.positions))


def test_pinned_nodes_do_not_move(small_mesh):
    boundary = boundary_edges(small_mesh, solid_field(small_mesh))
    pinned = [boundary[0].node_pair[0], boundary[3].node_pair[1]]
    out = smooth(small_mesh.positions, boundary, 10, pinned).apply(small_mesh.positions)
    for n in pinned:
        assert np.array_equal(out[n], small_mesh.positions[n])


def test_beta_must_be_positive(small_mesh):
    with pytest.raises(ValueError):
        smooth(small_mesh.positions, boundary_edges(small_mesh, solid_field(small_mesh)), 0)


def test_zigzag_edge_flattens_monotonically():
    mesh = generate_grid(30, 2, 1.0)
    boundary = boundary_edges(mesh, solid_field(mesh))
    on_boundary = sorted({n for e in boundary for n in e.node_pair})
    L1 = mesh.domain_size[0]
    bottom = [n for n in on_boundary
              if mesh.positions[n, 1] < 1.0 and 0.35 * L1 < mesh.positions[n, 0] < 0.65 * L1]

    def rms(points):
        slope, intercept = np.polyfit(points[:, 0], points[:, 1], 1)
        return float(np.sqrt(np.mean((points[:, 1] - slope * points[:, 0] - intercept) ** 2)))

    positions = mesh.positions.copy()
    history = [rms(positions[bottom])]
    for _ in range(10):
        positions = smooth_pass(positions, boundary).apply(positions)
        history.append(rms(positions[bottom]))
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))
    assert history[-1] < history[0]


def test_smoothed_loops_stay_simple(small_mesh):
    boundary = boundary_edges(small_mesh, solid_field(small_mesh, void=[5]))
    positions = smooth(small_mesh.positions, boundary, 10).apply(small_mesh.positions)
    for loop in trace_loops(boundary):
        assert not polyline_self_intersects(positions[loop], closed=True)


def test_non_manifold_boundary_rejected():
    # figure eight: node 0 closes two loops
    positions = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [-1.0, 0.0], [-1.0, -1.0]])
    boundary = loop_edges([0, 1, 2]) + loop_edges([0, 3, 4])
    with pytest.raises(NonManifoldBoundaryError):
        smooth_pass(positions, boundary)
    with pytest.raises(NonManifoldBoundaryError):
        trace_loops(boundary)


def test_second_step_no_masks(small_mesh):
    field = solid_field(small_mesh, void=[3])
    np.testing.assert_array_equal(second_step_removal(field, [], small_mesh).rho, field.rho)


def test_second_step_voids_vertex_hit(small_mesh):
    e = 6
    v = small_mesh.positions[small_mesh.elements[e][0]]
    c = small_mesh.centroids[e]
    direction = (v - c) / np.linalg.norm(v - c)
    center = v + 0.9 * direction
    mask = Mask(float(center[0]), float(center[1]), 1.0, 0, 0.5)
    first = assign_material_states(small_mesh, [mask])
    assert first.rho[e] == 1
    assert second_step_removal(first, [mask], small_mesh).rho[e] == 0


def test_second_step_matches_vertex_scan(small_mesh, rng):
    xmin, ymin, xmax, ymax = small_mesh.bounding_box
    for _ in range(10):
        masks = [Mask(float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)),
                      float(rng.uniform(0.3, 1.5)), 0, 0.5) for _ in range(3)]
        first = assign_material_states(small_mesh, masks)
        result = second_step_removal(first, masks, small_mesh).rho
        for el, nodes in enumerate(small_mesh.elements):
            hit = any((small_mesh.positions[n, 0] - m.x) ** 2 + (small_mesh.positions[n, 1] - m.y) ** 2 < m.r ** 2
                      for n in nodes for m in masks)
            expected = 0 if (first.rho[el] == 0 or hit) else 1
            assert result[el] == expected


def test_second_step_ignores_smoothing_shrinkage():
    mesh = generate_grid(6, 3, 1.0)
    masks = [Mask(2.25, 2.598, 0.5, 0, 0.5), Mask(6.75, 2.598, 0.5, 0, 0.5)]
    first = assign_material_states(mesh, masks)
    # heavy smoothing pulls hole boundaries towards the masks; removal must not follow it
    smooth(mesh.positions, boundary_edges(mesh, first), 10)
    result = second_step_removal(first, masks, mesh)
    for el, nodes in enumerate(mesh.elements):
        nearest = min(float(np.hypot(*(mesh.positions[nodes] - [m.x, m.y]).T).min()) - m.r for m in masks)
        if first.rho[el] == 1 and nearest > 0.0:
            assert result.rho[el] == 1
    assert result.rho[0] == 1


def test_trace_loops_orientation():
    mesh = generate_grid(3, 3, 1.0)
    centre = 4
    loops = trace_loops(boundary_edges(mesh, solid_field(mesh, void=[centre])))
    assert len(loops) == 2
    areas = sorted(polygon_signed_area(mesh.positions[loop]) for loop in loops)
    assert areas[0] < 0 < areas[1]
