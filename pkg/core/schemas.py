"""
Pydantic Schemas for Problem Files
Every synthesis run is described by one JSON problem file validated by these
models; omitted fields fall back to the defaults in config.py
"""

import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import (
    CONTACT_GAUSS_POINTS,
    CONTACT_RADIUS_FACTOR,
    DEFAULT_COLS,
    DEFAULT_EDGE_LENGTH,
    DEFAULT_ROWS,
    DEFAULT_SEED,
    FORCE_LIMITS,
    FOURIER_COEFFICIENTS,
    FRAMES_EVERY,
    LOAD_STEPS,
    MASK_GRID,
    MASK_RADIUS_MAX,
    MASK_RADIUS_MIN,
    MAX_ITERATIONS,
    MAX_NEWTON_ITERATIONS,
    MIN_LOAD_STEP,
    MIN_RIGID_SURFACE_SEGMENTS,
    MUTATION_FRACTION,
    MUTATION_PROBABILITY,
    NEWTON_TOL_ABS,
    NEWTON_TOL_REL,
    PENALTY_MUTUAL_FACTOR,
    PENALTY_OBJECTIVE,
    PENALTY_SELF_FACTOR,
    POISSON_RATIO,
    RIGID_SURFACE_SEGMENTS,
    SEARCH_RADIUS_FACTOR,
    SELF_CONTACT_EXCLUSION,
    SMOOTHING_STEPS,
    STALL_TOLERANCE,
    STALL_WINDOW,
    TARGET_VOLUME_FRACTION,
    THICKNESS,
    UZAWA_GAP_TOL_FACTOR,
    UZAWA_MAX_ITERATIONS,
    VOLUME_PENALTY,
    WEIGHT_A,
    WEIGHT_B,
    WEIGHT_LENGTH,
    WEIGHT_THETA,
    YOUNGS_MODULUS,
    lattice_extents,
)
from .exceptions import ConfigError

Point = Tuple[float, float]
Box = Tuple[float, float, float, float]


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DomainConfig(_Block):
    """Honeycomb design domain"""
    cols: int = Field(DEFAULT_COLS, ge=1, description="Hexagon columns")
    rows: int = Field(DEFAULT_ROWS, ge=1, description="Hexagon rows")
    edge_length: float = Field(DEFAULT_EDGE_LENGTH, gt=0, description="Hexagon edge length a (mm)")


class MaterialConfig(_Block):
    """Plane-strain neo-Hookean material"""
    E: float = Field(YOUNGS_MODULUS, gt=0, description="Young's modulus (MPa)")
    nu: float = Field(POISSON_RATIO, gt=0, lt=0.5, description="Poisson's ratio")
    thickness: float = Field(THICKNESS, gt=0, description="Out-of-plane thickness (mm)")


class SelectorConfig(_Block):
    """Exactly one of node_ids, box or points"""
    node_ids: Optional[List[int]] = Field(None, description="Explicit node ids")
    box: Optional[Box] = Field(None, description="[xmin, ymin, xmax, ymax] in mm")
    points: Optional[List[Point]] = Field(None, description="Nearest node to each point, order kept")

    @model_validator(mode="after")
    def _one_selector(self):
        given = [k for k in ("node_ids", "box", "points") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError("exactly one of node_ids, box or points is required")
        if self.node_ids is not None and not self.node_ids:
            raise ValueError("node_ids is empty")
        if self.points is not None and not self.points:
            raise ValueError("points is empty")
        return self


class SupportConfig(SelectorConfig):
    """Fixed (or prescribed) nodal displacement"""
    dofs: Literal["xy", "x", "y"] = Field("xy", description="Constrained directions")
    displacement: Optional[Point] = Field(None, description="Prescribed displacement at load factor 1 (mm)")


class LoadConfig(SelectorConfig):
    """Input force F * ratio along direction, split evenly over the selected nodes"""
    direction: Point = Field(..., description="Force direction (normalized on use)")
    ratio: float = Field(1.0, description="Multiple of the design force F")

    @model_validator(mode="after")
    def _nonzero_direction(self):
        if self.direction[0] == 0.0 and self.direction[1] == 0.0:
            raise ValueError("direction must be nonzero")
        return self


class ShapeMorphingConfig(_Block):
    """Ordered shape-morphing nodes"""
    node_ids: Optional[List[int]] = Field(None, description="Shape-morphing node ids")
    points: Optional[List[Point]] = Field(None, description="Nearest node to each point")

    @model_validator(mode="after")
    def _one_selector(self):
        given = [v for v in (self.node_ids, self.points) if v is not None]
        if len(given) != 1:
            raise ValueError("exactly one of node_ids or points is required")
        if len(given[0]) < 3:
            raise ValueError("at least 3 shape-morphing nodes are required")
        return self


class TargetCurveConfig(_Block):
    """Desired deformed profile: a two-column file or inline points (mm)"""
    path: Optional[str] = Field(None, description="Curve file, relative to the problem file")
    points: Optional[List[Point]] = Field(None, description="Inline curve points")

    @model_validator(mode="after")
    def _one_source(self):
        if (self.path is None) == (self.points is None):
            raise ValueError("exactly one of path or points is required")
        if self.points is not None and len(self.points) < 3:
            raise ValueError("at least 3 curve points are required")
        return self


class RegionConfig(_Block):
    """Non-design rectangle (element-centroid test)"""
    kind: Literal["solid", "void"]
    box: Box


class OptimizerConfig(_Block):
    """Hill climber"""
    mutation_probability: float = Field(MUTATION_PROBABILITY, gt=0, lt=1, description="pr")
    mutation_size: Optional[float] = Field(None, gt=0, description="m (mm); default 10% of max(L1, L2)")
    max_iterations: int = Field(MAX_ITERATIONS, ge=0)
    target_volume: float = Field(TARGET_VOLUME_FRACTION, gt=0, le=1, description="V*")
    volume_penalty: float = Field(VOLUME_PENALTY, ge=0, description="lambda_v when V > V*")
    penalty_objective: float = Field(PENALTY_OBJECTIVE, gt=0)
    stall_tolerance: float = Field(STALL_TOLERANCE, gt=0, description="Delta f")
    stall_window: int = Field(STALL_WINDOW, ge=0, description="0 disables the stall rule")
    mask_grid: Tuple[int, int] = Field(MASK_GRID, description="Initial masks along x, y")
    radius_limits: Tuple[float, float] = Field((MASK_RADIUS_MIN, MASK_RADIUS_MAX))
    force_limits: Tuple[float, float] = Field(FORCE_LIMITS, description="[F_low, F_upp] (N)")
    initial_force: Optional[float] = Field(None, description="Default: midpoint of force_limits")
    optimize_force: bool = True
    initial_design: Optional[str] = Field(None, description="Design file to start from")

    @model_validator(mode="after")
    def _ranges(self):
        if self.mask_grid[0] < 1 or self.mask_grid[1] < 1:
            raise ValueError("mask_grid entries must be >= 1")
        r_min, r_max = self.radius_limits
        if not 0 < r_min < r_max:
            raise ValueError("radius_limits must satisfy 0 < r_min < r_max")
        f_low, f_upp = self.force_limits
        if not f_low < f_upp:
            raise ValueError("force_limits must satisfy F_low < F_upp")
        if self.initial_force is not None and not f_low <= self.initial_force <= f_upp:
            raise ValueError("initial_force lies outside force_limits")
        return self


class ContactConfig(_Block):
    """Self/mutual contact and the augmented Lagrange loop"""
    self_contact: bool = True
    mutual_contact: bool = True
    eps_mutual: Optional[float] = Field(None, gt=0, description="eps_n (N/mm^3); default 60E/L2")
    eps_self: Optional[float] = Field(None, gt=0, description="eps_s (N/mm^3); default 5E/L2")
    search_radius: Optional[float] = Field(None, gt=0, description="Default 2a")
    exclusion: int = Field(SELF_CONTACT_EXCLUSION, ge=0)
    gauss_points: int = Field(CONTACT_GAUSS_POINTS, ge=1)
    rigid_projection: Literal["polyline", "circle"] = "polyline"
    radius_factor: float = Field(CONTACT_RADIUS_FACTOR, gt=0, lt=1, description="Initial f")
    rigid_segments: int = Field(RIGID_SURFACE_SEGMENTS, ge=MIN_RIGID_SURFACE_SEGMENTS)
    uzawa_max_iterations: int = Field(UZAWA_MAX_ITERATIONS, ge=1)
    gap_tol: Optional[float] = Field(None, gt=0, description="Default 1e-4 a")


class SolverConfig(_Block):
    """Newton-Raphson load stepping"""
    load_steps: int = Field(LOAD_STEPS, ge=1)
    min_step: float = Field(MIN_LOAD_STEP, gt=0, le=1)
    max_iterations: int = Field(MAX_NEWTON_ITERATIONS, ge=1)
    tol_rel: float = Field(NEWTON_TOL_REL, gt=0)
    tol_abs: float = Field(NEWTON_TOL_ABS, gt=0)


class SmoothingConfig(_Block):
    steps: int = Field(SMOOTHING_STEPS, ge=1, description="beta")


class FSDConfig(_Block):
    """Fourier Shape Descriptor objective"""
    coefficients: int = Field(FOURIER_COEFFICIENTS, ge=1)
    lambda_a: float = Field(WEIGHT_A, ge=0)
    lambda_b: float = Field(WEIGHT_B, ge=0)
    lambda_length: float = Field(WEIGHT_LENGTH, ge=0)
    lambda_theta: float = Field(WEIGHT_THETA, ge=0)
    zeta_denominator: Literal["as_printed", "per_harmonic"] = "as_printed"


class SymmetryConfig(_Block):
    """Half-domain mirror line x = position (axis "x") or y = position (axis "y")"""
    axis: Optional[Literal["x", "y"]] = None
    position: Optional[float] = Field(None, description="Default: the domain edge on the max side")


class OutputConfig(_Block):
    frames_every: int = Field(FRAMES_EVERY, ge=0, description="0 disables SVG frames")
    dump_load_steps: bool = False


class ProblemConfig(_Block):
    """A complete synthesis problem"""
    domain: DomainConfig = Field(default_factory=DomainConfig)
    material: MaterialConfig = Field(default_factory=MaterialConfig)
    supports: List[SupportConfig] = Field(..., min_length=1)
    loads: List[LoadConfig] = Field(..., min_length=1)
    shape_morphing: ShapeMorphingConfig
    target_curve: TargetCurveConfig
    regions: List[RegionConfig] = Field(default_factory=list)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    contact: ContactConfig = Field(default_factory=ContactConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    smoothing: SmoothingConfig = Field(default_factory=SmoothingConfig)
    fsd: FSDConfig = Field(default_factory=FSDConfig)
    symmetry: SymmetryConfig = Field(default_factory=SymmetryConfig)
    seed: int = DEFAULT_SEED
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _fill_derived(self):
        a = self.domain.edge_length
        L1, L2 = lattice_extents(self.domain.cols, self.domain.rows, a)
        E = self.material.E
        if self.contact.eps_mutual is None:
            self.contact.eps_mutual = PENALTY_MUTUAL_FACTOR * E / L2
        if self.contact.eps_self is None:
            self.contact.eps_self = PENALTY_SELF_FACTOR * E / L2
        if self.contact.search_radius is None:
            self.contact.search_radius = SEARCH_RADIUS_FACTOR * a
        if self.contact.gap_tol is None:
            self.contact.gap_tol = UZAWA_GAP_TOL_FACTOR * a
        if self.optimizer.mutation_size is None:
            self.optimizer.mutation_size = MUTATION_FRACTION * max(L1, L2)
        if self.optimizer.initial_force is None:
            self.optimizer.initial_force = 0.5 * sum(self.optimizer.force_limits)
        return self


def _error_key(loc) -> str:
    return ".".join(str(part) for part in loc)


def parse_config_data(data: dict) -> ProblemConfig:
    """
    Validate an already-decoded problem mapping.

    Raises:
        ConfigError: Naming the dotted key of the first offending field
    """
    try:
        return ProblemConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(_error_key(first["loc"]), first["msg"]) from exc


def parse_config(path: Union[str, Path]) -> ProblemConfig:
    """
    Read and validate a JSON problem file.

    A relative target_curve.path is checked against the problem file's directory.

    Raises:
        ConfigError: Missing/unreadable file, invalid JSON, unknown keys,
            out-of-range values or a missing curve file
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object")

    config = parse_config_data(data)
    if config.target_curve.path is not None:
        curve_path = resolve_relative(path, config.target_curve.path)
        if not curve_path.is_file():
            raise ConfigError("target_curve.path", f"file not found: {curve_path}")
    if config.optimizer.initial_design is not None:
        design_path = resolve_relative(path, config.optimizer.initial_design)
        if not design_path.is_file():
            raise ConfigError("optimizer.initial_design", f"file not found: {design_path}")
    return config


def resolve_relative(config_path: Union[str, Path], ref: str) -> Path:
    ref_path = Path(ref)
    return ref_path if ref_path.is_absolute() else Path(config_path).parent / ref_path


def serialize_config(config: ProblemConfig) -> str:
    """JSON text that parses back to an equal ProblemConfig."""
    return json.dumps(config.model_dump(mode="json"), indent=2) + "\n"
