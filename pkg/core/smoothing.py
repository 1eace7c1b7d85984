"""
Boundary Smoothing Module
Two-step boundary resolution: midpoint-chord projection of boundary nodes
and second-step removal of mask-intersected survivors
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Sequence

import numpy as np

from .design_rep import Mask, MaterialField
from .exceptions import NonManifoldBoundaryError
from .geometry import closest_point_on_segment
from .hexmesh import BoundaryEdge, HexMesh


@dataclass(frozen=True)
class SmoothedBoundary:
    """Boundary nodes moved by smoothing and their new positions."""
    moved_node_ids: FrozenSet[int]
    displaced_positions: Dict[int, np.ndarray] = field(repr=False)
    pass_count: int

    def apply(self, positions: np.ndarray) -> np.ndarray:
        """Copy of positions with the displaced boundary nodes written in."""
        out = np.array(positions, dtype=float, copy=True)
        for node, p in self.displaced_positions.items():
            out[node] = p
        return out


def _incident_edges(boundary: Sequence[BoundaryEdge]) -> Dict[int, List[int]]:
    incident: Dict[int, List[int]] = {}
    for idx, edge in enumerate(boundary):
        for node in edge.node_pair:
            incident.setdefault(node, []).append(idx)
    return incident


def smooth_pass(
    mesh_positions: np.ndarray,
    boundary: Sequence[BoundaryEdge],
    pinned: Iterable[int] = ()
) -> SmoothedBoundary:
    """
    Project each boundary node onto the chord joining the midpoints of its two
    boundary edges (closest point on that chord). All nodes use the incoming
    positions.

    Args:
        mesh_positions: (n, 2) current nodal positions
        boundary: Boundary edges forming closed loops
        pinned: Nodes that keep their position

    Returns:
        SmoothedBoundary for one pass

    Raises:
        NonManifoldBoundaryError: If a boundary node has != 2 incident boundary edges
    """
    positions = np.asarray(mesh_positions, dtype=float)
    pinned = set(pinned)
    displaced: Dict[int, np.ndarray] = {}

    for node, edge_ids in sorted(_incident_edges(boundary).items()):
        if len(edge_ids) != 2:
            raise NonManifoldBoundaryError(
                f"boundary node {node} has {len(edge_ids)} incident boundary edges"
            )
        if node in pinned:
            continue
        mids = []
        for idx in edge_ids:
            n0, n1 = boundary[idx].node_pair
            mids.append(0.5 * (positions[n0] + positions[n1]))
        foot, _, _ = closest_point_on_segment(positions[node], mids[0], mids[1])
        displaced[node] = foot

    return SmoothedBoundary(
        moved_node_ids=frozenset(displaced),
        displaced_positions=displaced,
        pass_count=1,
    )


def smooth(
    mesh_positions: np.ndarray,
    boundary: Sequence[BoundaryEdge],
    beta: int,
    pinned: Iterable[int] = ()
) -> SmoothedBoundary:
    """
    Apply smooth_pass beta times, recomputing midpoints from the updated positions.

    Args:
        mesh_positions: (n, 2) nodal positions before smoothing
        boundary: Boundary edges
        beta: Number of passes (>= 1)
        pinned: Nodes that keep their position

    Returns:
        SmoothedBoundary with the positions after the last pass
    """
    if beta < 1:
        raise ValueError(f"beta must be >= 1 (got {beta})")

    pinned = frozenset(pinned)
    positions = np.array(mesh_positions, dtype=float, copy=True)
    moved: set = set()
    for _ in range(beta):
        step = smooth_pass(positions, boundary, pinned)
        positions = step.apply(positions)
        moved |= step.moved_node_ids

    return SmoothedBoundary(
        moved_node_ids=frozenset(moved),
        displaced_positions={n: positions[n].copy() for n in sorted(moved)},
        pass_count=beta,
    )


def second_step_removal(
    material: MaterialField,
    masks: Sequence[Mask],
    mesh: HexMesh
) -> MaterialField:
    """
    Void solid elements that a mask circle still intersects after the centroid test.

    An element is removed when any of its vertices, taken at the regular
    (unsmoothed) mesh positions, lies strictly inside a mask.

    Args:
        material: Field after first-step removal
        masks: Masks used for the first step
        mesh: Honeycomb mesh

    Returns:
        New MaterialField
    """
    rho = material.rho.copy()
    if not masks:
        return MaterialField(rho)

    positions = mesh.positions

    centers = np.array([[m.x, m.y] for m in masks])
    radii = np.array([m.r for m in masks])

    d2 = ((positions[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
    node_inside = np.any(d2 < radii[None, :] ** 2, axis=1)

    hit = node_inside[mesh.elements].any(axis=1)
    rho[hit & (rho == 1)] = 0
    return MaterialField(rho)


def trace_loops(boundary: Sequence[BoundaryEdge]) -> List[List[int]]:
    """
    Chain boundary edges into closed loops of node ids.

    Edges are followed head to tail, so every loop keeps the solid on its
    left (outer loops counter-clockwise, holes clockwise). Loops start at
    their lowest node id and are ordered by that id.

    Raises:
        NonManifoldBoundaryError: If a node has more than one outgoing edge
    """
    outgoing: Dict[int, int] = {}
    for edge in boundary:
        n0, n1 = edge.node_pair
        if n0 in outgoing:
            raise NonManifoldBoundaryError(f"boundary node {n0} has two outgoing edges")
        outgoing[n0] = n1

    loops = []
    visited = set()
    for start in sorted(outgoing):
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        node = outgoing[start]
        while node != start:
            if node in visited or node not in outgoing:
                raise NonManifoldBoundaryError(f"boundary loop through node {node} does not close")
            loop.append(node)
            visited.add(node)
            node = outgoing[node]
        loops.append(loop)
    return loops
