"""
Design Representation Module
Negative circular masks, the material field they induce, rigid contact
surfaces, shape-morphing protection, feasibility and volume
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from config import (
    CONTACT_RADIUS_FACTOR,
    FRACTION_LIMITS,
    MIN_RIGID_SURFACE_SEGMENTS,
    RIGID_SURFACE_SEGMENTS,
    SME_CLEARANCE_MARGIN,
    SME_MAX_SHIFT_ATTEMPTS,
)
from .exceptions import InvalidArgumentError
from .hexmesh import HexMesh

logger = logging.getLogger(__name__)


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class Mask:
    """One negative circular mask: center (x, y), radius r, surface flag s, fraction f."""
    x: float
    y: float
    r: float
    s: int
    f: float

    @property
    def center(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def covers(self, points: np.ndarray) -> np.ndarray:
        """Strict containment of each point in the mask circle."""
        d = np.asarray(points, dtype=float) - self.center
        return np.einsum("ij,ij->i", d, d) < self.r * self.r


@dataclass(frozen=True)
class DesignVector:
    """Masks plus the input force magnitude."""
    masks: Tuple[Mask, ...]
    force: float

    def flatten(self) -> np.ndarray:
        """5 * N_m mask variables followed by the force."""
        values = [v for m in self.masks for v in (m.x, m.y, m.r, float(m.s), m.f)]
        return np.array(values + [self.force], dtype=float)

    @classmethod
    def from_flat(cls, values: Sequence[float]) -> "DesignVector":
        values = list(values)
        if len(values) % 5 != 1:
            raise InvalidArgumentError(f"flattened design length {len(values)} is not 5*N_m + 1")
        masks = tuple(
            Mask(values[i], values[i + 1], values[i + 2], int(round(values[i + 3])), values[i + 4])
            for i in range(0, len(values) - 1, 5)
        )
        return cls(masks=masks, force=float(values[-1]))


@dataclass(frozen=True)
class MaterialField:
    """Per-element binary state: 0 void, 1 solid."""
    rho: np.ndarray = field(repr=False)

    @property
    def solid(self) -> np.ndarray:
        return self.rho.astype(bool)

    def with_states(self, elements: Iterable[int], value: int) -> "MaterialField":
        rho = self.rho.copy()
        rho[list(elements)] = value
        return MaterialField(rho)


@dataclass(frozen=True)
class RigidSurface:
    """Discretized rigid contact circle, counter-clockwise so the solid disk is on the left."""
    center: np.ndarray = field(repr=False)
    radius: float
    segments: np.ndarray = field(repr=False)
    mask_index: int = -1


@dataclass(frozen=True)
class ShapeMorphingSet:
    """Ordered shape-morphing nodes (SMNs) and the elements protecting them (SMEs)."""
    node_ids: Tuple[int, ...]
    element_ids: Tuple[int, ...]


# ============================================================================
# DERIVATIONS
# ============================================================================

def derive_shape_morphing_set(mesh: HexMesh, node_ids: Sequence[int]) -> ShapeMorphingSet:
    """
    Collect every element touching a shape-morphing node.

    Args:
        mesh: Honeycomb mesh
        node_ids: Ordered SMN ids

    Returns:
        ShapeMorphingSet with sorted SME ids
    """
    if not node_ids:
        raise InvalidArgumentError("at least one shape-morphing node is required")
    elements = sorted({e for n in node_ids for e in mesh.node_elements[n]})
    return ShapeMorphingSet(node_ids=tuple(int(n) for n in node_ids), element_ids=tuple(elements))


def assign_material_states(mesh: HexMesh, masks: Sequence[Mask]) -> MaterialField:
    """
    Void every element whose centroid lies strictly inside at least one mask.

    Args:
        mesh: Honeycomb mesh
        masks: Negative circular masks

    Returns:
        MaterialField
    """
    rho = np.ones(mesh.n_elements, dtype=np.int8)
    if masks:
        centers = np.array([[m.x, m.y] for m in masks])
        radii = np.array([m.r for m in masks])
        d2 = ((mesh.centroids[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
        rho[np.any(d2 < radii[None, :] ** 2, axis=1)] = 0
    return MaterialField(rho)


def apply_regions(
    material: MaterialField,
    solid_elements: Sequence[int] = (),
    void_elements: Sequence[int] = ()
) -> MaterialField:
    """Force non-design regions to their prescribed state (void first, then solid)."""
    rho = material.rho.copy()
    rho[list(void_elements)] = 0
    rho[list(solid_elements)] = 1
    return MaterialField(rho)


def protect_smes(
    masks: Sequence[Mask],
    smes: ShapeMorphingSet,
    mesh: HexMesh,
    r_min: float
) -> Tuple[List[Mask], int]:
    """
    Shift masks off the shape-morphing elements.

    An offending mask is moved along the ray from the nearest covered SME
    centroid through its center until it clears that centroid by the
    margin; the step repeats until no SME centroid is covered. After the
    shift budget the radius is clamped to r_min and the mask recentered.

    Args:
        masks: Current masks
        smes: Shape-morphing set (non-empty)
        mesh: Honeycomb mesh
        r_min: Lower radius bound

    Returns:
        Tuple of (protected masks, number of masks changed)
    """
    if not smes.element_ids:
        raise InvalidArgumentError("SME list must not be empty")

    sme_centroids = mesh.centroids[list(smes.element_ids)]
    anchor = sme_centroids.mean(axis=0)
    margin = SME_CLEARANCE_MARGIN * mesh.edge_length
    result = []
    changed = 0

    for mask in masks:
        if not np.any(mask.covers(sme_centroids)):
            result.append(mask)
            continue

        changed += 1
        current = mask
        for _ in range(SME_MAX_SHIFT_ATTEMPTS):
            covered = current.covers(sme_centroids)
            if not np.any(covered):
                break
            current = _shift_off(current, sme_centroids[covered], anchor, margin)
        else:
            if np.any(current.covers(sme_centroids)):
                logger.warning(
                    "Mask at (%.3f, %.3f) r=%.3f could not clear the SMEs; clamping radius to %.3f",
                    mask.x, mask.y, mask.r, r_min,
                )
                current = _shift_off(replace(mask, r=r_min), sme_centroids, anchor, margin)
        result.append(current)

    return result, changed


def _shift_off(mask: Mask, covered: np.ndarray, anchor: np.ndarray, margin: float) -> Mask:
    center = mask.center
    dist = np.linalg.norm(covered - center, axis=1)
    nearest = covered[int(np.argmin(dist))]
    direction = center - nearest
    norm = np.linalg.norm(direction)
    if norm < 1e-12:
        direction = nearest - anchor
        norm = np.linalg.norm(direction)
        if norm < 1e-12:
            direction, norm = np.array([0.0, 1.0]), 1.0
    new_center = nearest + direction / norm * (mask.r + margin)
    return replace(mask, x=float(new_center[0]), y=float(new_center[1]))


def generate_rigid_surfaces(
    masks: Sequence[Mask],
    segment_count: int = RIGID_SURFACE_SEGMENTS
) -> List[RigidSurface]:
    """
    One rigid circle of radius f*r for every mask with s = 1.

    Args:
        masks: Masks
        segment_count: Chords per circle (>= 8)

    Returns:
        List of RigidSurface
    """
    if segment_count < MIN_RIGID_SURFACE_SEGMENTS:
        raise InvalidArgumentError(
            f"segment_count must be >= {MIN_RIGID_SURFACE_SEGMENTS} (got {segment_count})"
        )
    angles = 2.0 * np.pi * np.arange(segment_count) / segment_count
    unit = np.stack([np.cos(angles), np.sin(angles)], axis=1)

    surfaces = []
    for i, m in enumerate(masks):
        if m.s != 1:
            continue
        radius = m.f * m.r
        surfaces.append(RigidSurface(
            center=m.center,
            radius=radius,
            segments=m.center + radius * unit,
            mask_index=i,
        ))
    return surfaces


def solid_components(material: MaterialField, mesh: HexMesh) -> np.ndarray:
    """
    Label edge-connected solid components.

    Returns:
        Component label per element (-1 for void elements)
    """
    solid = material.solid
    pairs = mesh.edge_elements
    both = (pairs[:, 0] >= 0) & (pairs[:, 1] >= 0)
    pairs = pairs[both]
    keep = solid[pairs[:, 0]] & solid[pairs[:, 1]]
    pairs = pairs[keep]

    n = mesh.n_elements
    graph = coo_matrix(
        (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)
    )
    _, labels = connected_components(graph, directed=False)
    labels = labels.astype(int)
    labels[~solid] = -1
    return labels


def check_feasibility(material: MaterialField, mesh: HexMesh, ports: Sequence[int]) -> bool:
    """
    True iff all port elements are solid and lie in one edge-connected solid component.

    Args:
        material: Material field
        mesh: Honeycomb mesh
        ports: Load, support and SME element ids (non-empty)

    Returns:
        Feasibility flag
    """
    if len(ports) == 0:
        raise InvalidArgumentError("ports must not be empty")
    ports = list(ports)
    if not np.all(material.solid[ports]):
        return False
    labels = solid_components(material, mesh)
    return len(set(labels[ports].tolist())) == 1


def volume_fraction(material: MaterialField, mesh: HexMesh) -> float:
    """Solid element count over total element count (all elements share one area)."""
    return float(np.count_nonzero(material.rho)) / float(mesh.n_elements)


# ============================================================================
# INITIAL LAYOUT AND BOUNDS
# ============================================================================

def uniform_mask_grid(
    mesh: HexMesh,
    nx: int,
    ny: int,
    r_max: float,
    force: float,
    fraction: float = CONTACT_RADIUS_FACTOR
) -> DesignVector:
    """
    Masks on a uniform nx x ny grid over the nominal domain, r = r_max/2, s = 0, f = fraction.
    """
    l1, l2 = mesh.domain_size
    masks = tuple(
        Mask(x=(i + 0.5) * l1 / nx, y=(j + 0.5) * l2 / ny, r=0.5 * r_max, s=0, f=float(fraction))
        for j in range(ny)
        for i in range(nx)
    )
    return DesignVector(masks=masks, force=float(force))


def center_bounds(mesh: HexMesh, r_max: float) -> Tuple[float, float, float, float]:
    """Bounding box inflated by r_max; mask centers are clamped to it."""
    xmin, ymin, xmax, ymax = mesh.bounding_box
    return xmin - r_max, ymin - r_max, xmax + r_max, ymax + r_max


def clamp_mask(
    mask: Mask,
    bounds: Tuple[float, float, float, float],
    r_min: float,
    r_max: float
) -> Mask:
    xmin, ymin, xmax, ymax = bounds
    lo, hi = FRACTION_LIMITS
    return Mask(
        x=float(min(max(mask.x, xmin), xmax)),
        y=float(min(max(mask.y, ymin), ymax)),
        r=float(min(max(mask.r, r_min), r_max)),
        s=1 if mask.s else 0,
        f=float(min(max(mask.f, lo), hi)),
    )


# ============================================================================
# SERIALIZATION
# ============================================================================

def format_design(design: DesignVector) -> str:
    """One 'x y r s f' line per mask, then 'F <force>', 17 significant digits."""
    lines = [f"{m.x:.17g} {m.y:.17g} {m.r:.17g} {int(m.s)} {m.f:.17g}" for m in design.masks]
    lines.append(f"F {design.force:.17g}")
    return "\n".join(lines) + "\n"


def parse_design(text: str) -> DesignVector:
    """
    Inverse of format_design.

    Raises:
        InvalidArgumentError: On malformed records or a missing force line
    """
    masks = []
    force: Optional[float] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "F":
            if len(parts) != 2:
                raise InvalidArgumentError(f"line {lineno}: expected 'F <force>'")
            force = float(parts[1])
            continue
        if len(parts) != 5:
            raise InvalidArgumentError(f"line {lineno}: expected 'x y r s f'")
        x, y, r, s, f = parts
        s_val = int(s)
        if s_val not in (0, 1):
            raise InvalidArgumentError(f"line {lineno}: s must be 0 or 1")
        masks.append(Mask(float(x), float(y), float(r), s_val, float(f)))

    if force is None:
        raise InvalidArgumentError("design file has no 'F <force>' line")
    return DesignVector(masks=tuple(masks), force=force)
