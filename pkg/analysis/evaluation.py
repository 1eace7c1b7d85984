"""
Evaluation Module
The candidate pipeline: masks -> material field -> two-step boundary
resolution -> contact FEA -> shape-morphing curve -> penalized objective
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from core.contact import ContactModel, ContactScene
from core.design_rep import (
    DesignVector,
    MaterialField,
    RigidSurface,
    apply_regions,
    assign_material_states,
    check_feasibility,
    generate_rigid_surfaces,
    protect_smes,
    solid_components,
    volume_fraction,
)
from core.exceptions import SynthesisError, UndefinedInvariantError
from core.hexmesh import boundary_edges
from core.polyfem import FEProblem, build_elements, end_compliance, newton_solve
from core.shape_objective import CurvePolyline, FourierDescriptor, describe, objective, shape_invariants
from core.smoothing import second_step_removal, smooth, trace_loops
from .problem import SynthesisProblem

logger = logging.getLogger(__name__)


@dataclass
class Analysis:
    """Converged state of one candidate, kept for export and replay."""
    positions: np.ndarray = field(repr=False)   # smoothed reference positions
    u: np.ndarray = field(repr=False)
    active_elements: np.ndarray = field(repr=False)
    connectivity: np.ndarray = field(repr=False)
    loops: List[List[int]] = field(repr=False)
    rigid_surfaces: List[RigidSurface] = field(repr=False)
    actual_curve: np.ndarray = field(repr=False)
    actual_fsd: FourierDescriptor = field(repr=False)
    contact_report: List[Dict] = field(default_factory=list, repr=False)
    contact_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)), repr=False)
    end_compliance: float = 0.0
    zeta_s: Optional[float] = None
    zeta_l: Optional[float] = None

    @property
    def deformed(self) -> np.ndarray:
        return self.positions + self.u.reshape(-1, 2)


@dataclass
class Candidate:
    design: DesignVector
    objective: float
    feasible: bool
    volume_fraction: float
    shape_objective: Optional[float] = None
    failure: Optional[str] = None
    material: Optional[MaterialField] = field(default=None, repr=False)
    analysis: Optional[Analysis] = field(default=None, repr=False)
    diagnostics: Dict = field(default_factory=dict)


def volume_term(volume: float, target: float, weight: float) -> float:
    """lambda_v (V - V*) when V > V*, else 0."""
    return weight * (volume - target) if volume > target else 0.0


def _penalized(problem: SynthesisProblem, design: DesignVector, volume: float, cause: str,
               material: Optional[MaterialField], diagnostics: Dict) -> Candidate:
    return Candidate(
        design=design,
        objective=problem.config.optimizer.penalty_objective,
        feasible=False,
        volume_fraction=volume,
        failure=cause,
        material=material,
        diagnostics=diagnostics,
    )


def resolve_material(problem: SynthesisProblem, design: DesignVector):
    """
    Material field and smoothed positions of a design (no analysis).

    Returns:
        Tuple of (protected design, final material field, smoothed positions,
        boundary edges of the final field, diagnostics, feasibility flag)
    """
    mesh = problem.mesh
    r_min = problem.config.optimizer.radius_limits[0]
    beta = problem.config.smoothing.steps
    pinned = problem.pinned_nodes

    masks, shifted = protect_smes(design.masks, problem.smes, mesh, r_min)
    design = DesignVector(masks=tuple(masks), force=design.force)
    diagnostics: Dict = {"masks_shifted": shifted}

    material = assign_material_states(mesh, masks)
    material = apply_regions(material, problem.solid_region_elements, problem.void_region_elements)

    material = second_step_removal(material, masks, mesh)
    material = apply_regions(material, problem.solid_region_elements, problem.void_region_elements)
    material = material.with_states(problem.smes.element_ids, 1)

    feasible = check_feasibility(material, mesh, problem.port_elements)
    if feasible:
        labels = solid_components(material, mesh)
        keep = labels == labels[problem.port_elements[0]]
        floating = int(np.count_nonzero(material.solid & ~keep))
        if floating:
            material = MaterialField(np.where(keep, material.rho, 0).astype(material.rho.dtype))
        diagnostics["floating_elements"] = floating

    boundary = boundary_edges(mesh, material)
    positions = mesh.positions
    if boundary:
        positions = smooth(mesh.positions, boundary, beta, pinned).apply(mesh.positions)
    return design, material, positions, boundary, diagnostics, feasible


def evaluate(
    design: DesignVector,
    problem: SynthesisProblem,
    step_callback: Optional[Callable[[float, np.ndarray], None]] = None
) -> Candidate:
    """
    Evaluate one design.

    Library failures (inversion, divergence, degenerate projection,
    non-manifold boundary, closure intersection) are logged and returned as
    candidates carrying the penalty objective.

    Args:
        design: Design vector
        problem: Resolved problem
        step_callback: Forwarded to newton_solve (load-step position dumps)

    Returns:
        Candidate; its design holds the SME-protected masks
    """
    mesh = problem.mesh
    opt = problem.config.optimizer
    material = None
    volume = 0.0
    diagnostics: Dict = {}

    try:
        design, material, positions, boundary, diagnostics, feasible = resolve_material(problem, design)
        volume = volume_fraction(material, mesh)
        if not feasible:
            logger.debug("Candidate infeasible: ports disconnected or void")
            return _penalized(problem, design, volume, "infeasible", material, diagnostics)

        active = np.flatnonzero(material.solid)
        connectivity = mesh.elements[active]
        elements = build_elements(positions, connectivity, element_ids=active)

        fixed = problem.fixed_dofs.copy()
        attached = np.zeros(mesh.n_nodes, dtype=bool)
        attached[np.unique(connectivity)] = True
        fixed[np.repeat(~attached, 2)] = True

        contact_settings = problem.contact_settings()
        loops = trace_loops(boundary)
        rigid = []
        if contact_settings.mutual_contact:
            rigid = generate_rigid_surfaces(design.masks, problem.config.contact.rigid_segments)
        model = None
        if contact_settings.self_contact or rigid:
            model = ContactModel(ContactScene(loops, rigid, positions, contact_settings))

        f_ext = problem.load_vector(design.force)
        fe = FEProblem(
            positions=positions,
            elements=elements,
            material=problem.material_params(),
            fixed_dofs=fixed,
            f_ext=f_ext,
            prescribed=problem.prescribed,
            contact=model,
        )
        state = newton_solve(fe, problem.newton_settings(), step_callback)
        diagnostics.update({
            "newton_iterations": state.iterations,
            "uzawa_iterations": state.uzawa_iterations,
            "load_factor": state.load_factor,
            "uzawa_unconverged": "uzawa_unconverged" in state.flags,
        })
        if not state.converged:
            logger.debug("Candidate not converged (load factor %.4f)", state.load_factor)
            return _penalized(problem, design, volume, "not_converged", material, diagnostics)

        deformed = positions + state.u.reshape(-1, 2)
        curve = deformed[list(problem.smn_ids)]
        actual = describe(CurvePolyline(curve), problem.config.fsd.coefficients)
        f0 = objective(problem.target_fsd, actual, problem.objective_weights())
        total = f0 + volume_term(volume, opt.target_volume, opt.volume_penalty)

        report: List[Dict] = []
        contact_points = np.zeros((0, 2))
        if model is not None:
            model.update_pairs(deformed)
            report = model.report(deformed)
            nodes = model.scene.segment_nodes
            contact_points = np.array(
                [0.5 * (deformed[nodes[r["slave_segment"], 0]] + deformed[nodes[r["slave_segment"], 1]])
                 for r in report]
            ).reshape(-1, 2)
        diagnostics["contact_pairs_active"] = len(report)

        try:
            zeta_s, zeta_l = shape_invariants(problem.target_fsd, actual, problem.config.fsd.zeta_denominator)
        except UndefinedInvariantError as exc:
            logger.debug("Shape invariants undefined: %s", exc)
            zeta_s = zeta_l = None

        analysis = Analysis(
            positions=positions,
            u=state.u,
            active_elements=active,
            connectivity=connectivity,
            loops=loops,
            rigid_surfaces=rigid,
            actual_curve=curve,
            actual_fsd=actual,
            contact_report=report,
            contact_points=contact_points,
            end_compliance=end_compliance(f_ext, state.u),
            zeta_s=zeta_s,
            zeta_l=zeta_l,
        )
        return Candidate(
            design=design,
            objective=float(total),
            feasible=True,
            volume_fraction=volume,
            shape_objective=float(f0),
            material=material,
            analysis=analysis,
            diagnostics=diagnostics,
        )
    except (SynthesisError, np.linalg.LinAlgError) as exc:
        cause = type(exc).__name__
        logger.debug("Candidate penalized (%s): %s", cause, exc)
        return _penalized(problem, design, volume, cause, material, diagnostics)
