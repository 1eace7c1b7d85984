# Core module - honeycomb mesh, design representation, smoothing, polygonal FEA, contact and shape objective
from .exceptions import (
    SynthesisError,
    InvalidArgumentError,
    ConfigError,
    ElementInversionError,
    ShapeFunctionError,
    NonManifoldBoundaryError,
    DegenerateProjectionError,
    ShapeEvaluationError,
    UndefinedInvariantError,
    SolverDivergenceError
)
from .hexmesh import HexMesh, BoundaryEdge, generate_grid, boundary_edges, locate_point, format_mesh
from .design_rep import (
    Mask,
    DesignVector,
    MaterialField,
    RigidSurface,
    ShapeMorphingSet,
    derive_shape_morphing_set,
    assign_material_states,
    protect_smes,
    generate_rigid_surfaces,
    check_feasibility,
    volume_fraction
)
from .smoothing import SmoothedBoundary, smooth, second_step_removal, trace_loops
from .polyfem import (
    MaterialParams,
    NewtonSettings,
    FEProblem,
    SolverState,
    mean_value_shape_functions,
    build_elements,
    internal_force,
    tangent_stiffness,
    newton_solve
)
from .contact import (
    ContactSettings,
    ContactScene,
    ContactModel,
    detect_pairs,
    project_point,
    contact_traction,
    contact_force,
    contact_stiffness,
    uzawa_update
)
from .shape_objective import (
    CurvePolyline,
    FourierDescriptor,
    ObjectiveWeights,
    close_curve,
    compute_fsd,
    objective,
    shape_invariants
)
from .schemas import ProblemConfig, parse_config, parse_config_data

__all__ = [
    # Errors
    "SynthesisError",
    "InvalidArgumentError",
    "ConfigError",
    "ElementInversionError",
    "ShapeFunctionError",
    "NonManifoldBoundaryError",
    "DegenerateProjectionError",
    "ShapeEvaluationError",
    "UndefinedInvariantError",
    "SolverDivergenceError",
    # Mesh
    "HexMesh",
    "BoundaryEdge",
    "generate_grid",
    "boundary_edges",
    "locate_point",
    "format_mesh",
    # Design
    "Mask",
    "DesignVector",
    "MaterialField",
    "RigidSurface",
    "ShapeMorphingSet",
    "derive_shape_morphing_set",
    "assign_material_states",
    "protect_smes",
    "generate_rigid_surfaces",
    "check_feasibility",
    "volume_fraction",
    # Smoothing
    "SmoothedBoundary",
    "smooth",
    "second_step_removal",
    "trace_loops",
    # FEA
    "MaterialParams",
    "NewtonSettings",
    "FEProblem",
    "SolverState",
    "mean_value_shape_functions",
    "build_elements",
    "internal_force",
    "tangent_stiffness",
    "newton_solve",
    # Contact
    "ContactSettings",
    "ContactScene",
    "ContactModel",
    "detect_pairs",
    "project_point",
    "contact_traction",
    "contact_force",
    "contact_stiffness",
    "uzawa_update",
    # Shape objective
    "CurvePolyline",
    "FourierDescriptor",
    "ObjectiveWeights",
    "close_curve",
    "compute_fsd",
    "objective",
    "shape_invariants",
    # Configuration
    "ProblemConfig",
    "parse_config",
    "parse_config_data",
]
