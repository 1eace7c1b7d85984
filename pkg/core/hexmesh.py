"""
Hexagonal Mesh Module
Regular honeycomb discretization of the rectangular design domain
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from config import POINT_TOLERANCE
from .exceptions import InvalidArgumentError
from .geometry import point_in_polygon, polygon_signed_area

# Corner offsets of a flat-top hexagon in lattice units (a/2, sqrt(3)a/2),
# counter-clockwise from the right-hand corner.
_CORNER_OFFSETS = ((2, 0), (1, 1), (-1, 1), (-2, 0), (-1, -1), (1, -1))


@dataclass(frozen=True)
class BoundaryEdge:
    """An edge incident to exactly one solid element, ordered with the solid on its left."""
    node_pair: Tuple[int, int]
    owner_element: int
    outward_normal: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class HexMesh:
    """
    Honeycomb mesh: node positions (n, 2) in mm and six-node elements (m, 6),
    counter-clockwise. Immutable after generation.
    """
    positions: np.ndarray = field(repr=False)
    elements: np.ndarray = field(repr=False)
    edge_length: float
    rows: int
    cols: int

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def domain_size(self) -> Tuple[float, float]:
        """Nominal lattice extents (L1, L2) = (cols * 3a/2, rows * sqrt(3) a)."""
        a = self.edge_length
        return self.cols * 1.5 * a, self.rows * math.sqrt(3.0) * a

    @cached_property
    def bounding_box(self) -> Tuple[float, float, float, float]:
        lo = self.positions.min(axis=0)
        hi = self.positions.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    @cached_property
    def element_area(self) -> float:
        return 1.5 * math.sqrt(3.0) * self.edge_length ** 2

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.positions[self.elements].mean(axis=1)

    @cached_property
    def _edge_table(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        local = np.stack([self.elements, np.roll(self.elements, -1, axis=1)], axis=-1)
        keys = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(self.n_elements, 6)

        edge_elements = np.full((len(edges), 2), -1, dtype=int)
        for e in range(self.n_elements):
            for k in range(6):
                eid = inverse[e, k]
                slot = 0 if edge_elements[eid, 0] < 0 else 1
                edge_elements[eid, slot] = e
        return edges, inverse, edge_elements

    @property
    def edges(self) -> np.ndarray:
        """Unique edges as sorted node pairs (E, 2)."""
        return self._edge_table[0]

    @property
    def element_edges(self) -> np.ndarray:
        """Edge id of each local edge k = (node k, node k+1) of every element (m, 6)."""
        return self._edge_table[1]

    @property
    def edge_elements(self) -> np.ndarray:
        """Up to two elements per edge, -1 when the edge is on the domain boundary (E, 2)."""
        return self._edge_table[2]

    @cached_property
    def neighbors(self) -> List[List[int]]:
        """Edge-adjacent elements of every element."""
        adjacency = [[] for _ in range(self.n_elements)]
        for e0, e1 in self.edge_elements:
            if e0 >= 0 and e1 >= 0:
                adjacency[e0].append(int(e1))
                adjacency[e1].append(int(e0))
        return [sorted(a) for a in adjacency]

    @cached_property
    def node_elements(self) -> List[List[int]]:
        """Elements incident to every node."""
        incidence = [[] for _ in range(self.n_nodes)]
        for e, nodes in enumerate(self.elements):
            for n in nodes:
                incidence[n].append(e)
        return incidence

    @cached_property
    def _centroid_tree(self) -> cKDTree:
        return cKDTree(self.centroids)

    @cached_property
    def _node_tree(self) -> cKDTree:
        return cKDTree(self.positions)

    def element_polygon(self, element: int) -> np.ndarray:
        return self.positions[self.elements[element]]

    def nearest_node(self, point: Sequence[float]) -> int:
        return int(self._node_tree.query(np.asarray(point, dtype=float))[1])

    def nodes_in_box(self, box: Sequence[float], tol: float = 1e-9) -> List[int]:
        xmin, ymin, xmax, ymax = box
        x, y = self.positions[:, 0], self.positions[:, 1]
        inside = (x >= xmin - tol) & (x <= xmax + tol) & (y >= ymin - tol) & (y <= ymax + tol)
        return [int(i) for i in np.flatnonzero(inside)]

    def elements_in_box(self, box: Sequence[float]) -> List[int]:
        xmin, ymin, xmax, ymax = box
        c = self.centroids
        inside = (c[:, 0] >= xmin) & (c[:, 0] <= xmax) & (c[:, 1] >= ymin) & (c[:, 1] <= ymax)
        return [int(i) for i in np.flatnonzero(inside)]


def generate_grid(cols: int, rows: int, edge_length: float) -> HexMesh:
    """
    Generate a flat-top honeycomb of cols x rows hexagons.

    Odd columns are shifted down by sqrt(3)a/2; the origin sits at the
    lower-left corner of the bounding box.

    Args:
        cols: Number of hexagon columns
        rows: Number of hexagon rows
        edge_length: Hexagon edge length a (mm)

    Returns:
        HexMesh with cols * rows elements

    Raises:
        InvalidArgumentError: If any argument is non-positive
    """
    if cols < 1 or rows < 1:
        raise InvalidArgumentError(f"cols and rows must be >= 1 (got {cols}, {rows})")
    if not edge_length > 0:
        raise InvalidArgumentError(f"edge_length must be positive (got {edge_length})")

    # Exact integer lattice keys so shared corners deduplicate without tolerance
    corner_keys = {}
    element_keys = []
    for r in range(rows):
        for c in range(cols):
            cx = 2 + 3 * c
            cy = (2 if c % 2 == 0 else 1) + 2 * r
            keys = [(cx + dx, cy + dy) for dx, dy in _CORNER_OFFSETS]
            element_keys.append(keys)
            for k in keys:
                corner_keys.setdefault(k, None)

    ordered = sorted(corner_keys, key=lambda k: (k[1], k[0]))
    node_id = {k: i for i, k in enumerate(ordered)}

    unit = np.array([0.5 * edge_length, 0.5 * math.sqrt(3.0) * edge_length])
    positions = np.array(ordered, dtype=float) * unit
    positions -= positions.min(axis=0)

    elements = np.array([[node_id[k] for k in keys] for keys in element_keys], dtype=int)

    return HexMesh(
        positions=positions,
        elements=elements,
        edge_length=float(edge_length),
        rows=int(rows),
        cols=int(cols),
    )


def boundary_edges(mesh: HexMesh, material) -> List[BoundaryEdge]:
    """
    Edges incident to exactly one solid element.

    Args:
        mesh: Honeycomb mesh
        material: MaterialField (or any object with a per-element `rho` array)

    Returns:
        Boundary edges ordered by owner element and local edge index; node
        pairs follow the owner's counter-clockwise order so the solid is on the left
    """
    rho = np.asarray(getattr(material, "rho", material))
    solid = rho.astype(bool)
    edges = []

    for e in np.flatnonzero(solid):
        nodes = mesh.elements[e]
        for k in range(6):
            eid = mesh.element_edges[e, k]
            e0, e1 = mesh.edge_elements[eid]
            other = e1 if e0 == e else e0
            if other >= 0 and solid[other]:
                continue
            n0, n1 = int(nodes[k]), int(nodes[(k + 1) % 6])
            t = mesh.positions[n1] - mesh.positions[n0]
            normal = np.array([t[1], -t[0]]) / np.linalg.norm(t)
            edges.append(BoundaryEdge((n0, n1), int(e), normal))

    return edges


def locate_point(mesh: HexMesh, p: Sequence[float]) -> Optional[int]:
    """
    Find the element containing p.

    Args:
        mesh: Honeycomb mesh
        p: Query point (mm)

    Returns:
        Element id (lowest id on boundary ties) or None outside the domain
    """
    point = np.asarray(p, dtype=float)
    k = min(3, mesh.n_elements)
    _, idx = mesh._centroid_tree.query(point, k=k)
    candidates = sorted(int(i) for i in np.atleast_1d(idx))

    for e in candidates:
        if point_in_polygon(point, mesh.element_polygon(e), POINT_TOLERANCE):
            return e
    return None


def lattice_area(mesh: HexMesh) -> float:
    """Sum of signed element areas."""
    return float(sum(polygon_signed_area(mesh.element_polygon(e)) for e in range(mesh.n_elements)))


def format_mesh(mesh: HexMesh) -> str:
    """
    Plain-text node/element listing.

    Returns:
        '# nodes' section with 'id x y' records followed by an '# elements'
        section with 'id n0 n1 n2 n3 n4 n5' records
    """
    lines = [f"# nodes {mesh.n_nodes}"]
    lines += [f"{i} {x:.17g} {y:.17g}" for i, (x, y) in enumerate(mesh.positions)]
    lines.append(f"# elements {mesh.n_elements}")
    lines += [f"{e} " + " ".join(str(int(n)) for n in nodes) for e, nodes in enumerate(mesh.elements)]
    return "\n".join(lines) + "\n"
