"""
Problem Module
Resolve a validated problem file into mesh-level data: node selectors,
boundary conditions, load pattern, shape-morphing set, non-design regions,
symmetry rollers and the target curve descriptor
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from config import POINT_TOLERANCE
from core.contact import ContactSettings
from core.design_rep import (
    DesignVector,
    ShapeMorphingSet,
    center_bounds,
    clamp_mask,
    derive_shape_morphing_set,
    uniform_mask_grid,
)
from core.exceptions import ConfigError, ShapeEvaluationError
from core.hexmesh import HexMesh, generate_grid
from core.polyfem import MaterialParams, NewtonSettings
from core.schemas import ProblemConfig, SelectorConfig, resolve_relative
from core.shape_objective import CurvePolyline, FourierDescriptor, ObjectiveWeights, describe
from utils.io_formats import read_curve, read_design

logger = logging.getLogger(__name__)


@dataclass
class SynthesisProblem:
    """Everything the evaluation pipeline needs, resolved against the mesh."""
    config: ProblemConfig
    mesh: HexMesh
    smes: ShapeMorphingSet
    support_nodes: List[int]
    load_nodes: List[int]
    roller_nodes: List[int]
    fixed_dofs: np.ndarray = field(repr=False)
    prescribed: Optional[np.ndarray] = field(repr=False)
    load_pattern: np.ndarray = field(repr=False)
    port_elements: List[int]
    solid_region_elements: List[int]
    void_region_elements: List[int]
    target_points: np.ndarray = field(repr=False)
    target_fsd: FourierDescriptor = field(repr=False)
    initial_design: DesignVector = field(repr=False)

    @property
    def smn_ids(self) -> Tuple[int, ...]:
        return self.smes.node_ids

    @property
    def pinned_nodes(self) -> List[int]:
        """Nodes that smoothing must not move."""
        return sorted(set(self.support_nodes) | set(self.load_nodes) | set(self.roller_nodes))

    @property
    def mirror(self) -> Optional[Tuple[str, float]]:
        sym = self.config.symmetry
        return None if sym.axis is None else (sym.axis, float(sym.position))

    def material_params(self) -> MaterialParams:
        m = self.config.material
        return MaterialParams(E=m.E, nu=m.nu, thickness=m.thickness)

    def newton_settings(self) -> NewtonSettings:
        s = self.config.solver
        return NewtonSettings(
            load_steps=s.load_steps,
            min_step=s.min_step,
            max_iterations=s.max_iterations,
            tol_rel=s.tol_rel,
            tol_abs=s.tol_abs,
            uzawa_max_iterations=self.config.contact.uzawa_max_iterations,
            gap_tol=self.config.contact.gap_tol,
        )

    def contact_settings(self) -> ContactSettings:
        c = self.config.contact
        return ContactSettings(
            eps_mutual=c.eps_mutual,
            eps_self=c.eps_self,
            search_radius=c.search_radius,
            thickness=self.config.material.thickness,
            exclusion=c.exclusion,
            gauss_points=c.gauss_points,
            rigid_projection=c.rigid_projection,
            self_contact=c.self_contact,
            mutual_contact=c.mutual_contact,
        )

    def objective_weights(self) -> ObjectiveWeights:
        f = self.config.fsd
        return ObjectiveWeights(f.lambda_a, f.lambda_b, f.lambda_length, f.lambda_theta)

    def load_vector(self, force: float) -> np.ndarray:
        return force * self.load_pattern


def resolve_selector(mesh: HexMesh, selector: SelectorConfig, key: str) -> List[int]:
    """
    Node ids picked by a selector.

    Raises:
        ConfigError: If ids are out of range or the selector matches no node
    """
    if selector.node_ids is not None:
        bad = [n for n in selector.node_ids if not 0 <= n < mesh.n_nodes]
        if bad:
            raise ConfigError(f"{key}.node_ids", f"unknown node ids {bad[:5]}")
        nodes = list(selector.node_ids)
    elif getattr(selector, "box", None) is not None:
        nodes = mesh.nodes_in_box(selector.box)
        if not nodes:
            raise ConfigError(f"{key}.box", "selects no node")
    else:
        nodes = [mesh.nearest_node(p) for p in selector.points]
    return list(dict.fromkeys(int(n) for n in nodes))


def _roller_nodes(mesh: HexMesh, axis: str, position: float) -> List[int]:
    column = 0 if axis == "x" else 1
    on_line = np.abs(mesh.positions[:, column] - position) <= POINT_TOLERANCE
    return [int(n) for n in np.flatnonzero(on_line)]


def _target_points(config: ProblemConfig, config_path: Optional[Path]) -> np.ndarray:
    target = config.target_curve
    if target.points is not None:
        return np.array(target.points, dtype=float)
    path = Path(target.path) if config_path is None else resolve_relative(config_path, target.path)
    return read_curve(path)


def build_problem(
    config: ProblemConfig,
    config_path: Optional[Union[str, Path]] = None
) -> SynthesisProblem:
    """
    Resolve a problem file against its honeycomb mesh.

    Args:
        config: Validated problem
        config_path: Location of the problem file (for relative file references)

    Returns:
        SynthesisProblem

    Raises:
        ConfigError: On selectors that resolve to nothing, ids out of range,
            an unusable target curve or an unreadable initial design
    """
    config_path = None if config_path is None else Path(config_path)
    d = config.domain
    mesh = generate_grid(d.cols, d.rows, d.edge_length)
    n_dof = 2 * mesh.n_nodes

    fixed = np.zeros(n_dof, dtype=bool)
    prescribed = np.zeros(n_dof)
    support_nodes: List[int] = []
    for i, support in enumerate(config.supports):
        nodes = resolve_selector(mesh, support, f"supports.{i}")
        support_nodes.extend(nodes)
        for n in nodes:
            for axis, comp in enumerate("xy"):
                if comp in support.dofs:
                    fixed[2 * n + axis] = True
                    if support.displacement is not None:
                        prescribed[2 * n + axis] = support.displacement[axis]
    has_prescribed = bool(np.any(prescribed))

    load_pattern = np.zeros(n_dof)
    load_nodes: List[int] = []
    for i, load in enumerate(config.loads):
        nodes = resolve_selector(mesh, load, f"loads.{i}")
        load_nodes.extend(nodes)
        direction = np.asarray(load.direction, dtype=float)
        direction = direction / np.linalg.norm(direction)
        share = load.ratio / len(nodes)
        for n in nodes:
            load_pattern[2 * n: 2 * n + 2] += share * direction

    roller_nodes: List[int] = []
    sym = config.symmetry
    if sym.axis is not None:
        if sym.position is None:
            xmin, ymin, xmax, ymax = mesh.bounding_box
            sym.position = xmax if sym.axis == "x" else ymax
        roller_nodes = _roller_nodes(mesh, sym.axis, sym.position)
        if not roller_nodes:
            raise ConfigError("symmetry.position", "no node lies on the mirror line")
        column = 0 if sym.axis == "x" else 1
        for n in roller_nodes:
            fixed[2 * n + column] = True

    sm = config.shape_morphing
    if sm.node_ids is not None:
        bad = [n for n in sm.node_ids if not 0 <= n < mesh.n_nodes]
        if bad:
            raise ConfigError("shape_morphing.node_ids", f"unknown node ids {bad[:5]}")
        smn = list(dict.fromkeys(sm.node_ids))
    else:
        smn = list(dict.fromkeys(mesh.nearest_node(p) for p in sm.points))
    if len(smn) < 3:
        raise ConfigError("shape_morphing", "fewer than 3 distinct shape-morphing nodes")
    smes = derive_shape_morphing_set(mesh, smn)

    ports = sorted({min(mesh.node_elements[n]) for n in set(support_nodes) | set(load_nodes)}
                   | set(smes.element_ids))

    solid_regions, void_regions = [], []
    for region in config.regions:
        (solid_regions if region.kind == "solid" else void_regions).extend(mesh.elements_in_box(region.box))

    target_points = _target_points(config, config_path)
    try:
        target_fsd = describe(CurvePolyline(target_points), config.fsd.coefficients)
    except ShapeEvaluationError as exc:
        raise ConfigError("target_curve", str(exc)) from exc

    opt = config.optimizer
    r_min, r_max = opt.radius_limits
    if opt.initial_design is not None:
        design_path = Path(opt.initial_design) if config_path is None \
            else resolve_relative(config_path, opt.initial_design)
        initial = read_design(design_path, "optimizer.initial_design")
    else:
        initial = uniform_mask_grid(mesh, opt.mask_grid[0], opt.mask_grid[1], r_max, opt.initial_force,
                                    config.contact.radius_factor)
    bounds = center_bounds(mesh, r_max)
    initial = DesignVector(
        masks=tuple(clamp_mask(m, bounds, r_min, r_max) for m in initial.masks),
        force=float(min(max(initial.force, opt.force_limits[0]), opt.force_limits[1])),
    )

    logger.info(
        "Problem: %d elements, %d supports, %d load nodes, %d SMNs, %d masks",
        mesh.n_elements, len(set(support_nodes)), len(set(load_nodes)), len(smn), len(initial.masks),
    )
    return SynthesisProblem(
        config=config,
        mesh=mesh,
        smes=smes,
        support_nodes=sorted(set(support_nodes)),
        load_nodes=sorted(set(load_nodes)),
        roller_nodes=roller_nodes,
        fixed_dofs=fixed,
        prescribed=prescribed if has_prescribed else None,
        load_pattern=load_pattern,
        port_elements=ports,
        solid_region_elements=sorted(set(solid_regions)),
        void_region_elements=sorted(set(void_regions)),
        target_points=target_points,
        target_fsd=target_fsd,
        initial_design=initial,
    )


def mirror_points(points: np.ndarray, mirror: Optional[Tuple[str, float]]) -> np.ndarray:
    """Reflect points across the mirror line (identity without symmetry)."""
    pts = np.array(points, dtype=float, copy=True)
    if mirror is None:
        return pts
    axis, position = mirror
    column = 0 if axis == "x" else 1
    pts[..., column] = 2.0 * position - pts[..., column]
    return pts


def full_curve(points: np.ndarray, mirror: Optional[Tuple[str, float]]) -> np.ndarray:
    """Half curve joined with its mirror image (mirrored part reversed, shared end dropped)."""
    pts = np.asarray(points, dtype=float)
    if mirror is None:
        return pts.copy()
    image = mirror_points(pts, mirror)[::-1]
    if np.allclose(image[0], pts[-1]):
        image = image[1:]
    return np.vstack([pts, image])

