"""
Configuration settings for the contact-aided shape-morphing synthesizer
Defaults for every synthesis run live here - problem files override them per run
"""

import math

APP_NAME = "morphsynth"
APP_VERSION = "0.3.0"

# ============================================================================
# DESIGN DOMAIN (30 x 30 honeycomb, unit edge)
# ============================================================================

DEFAULT_COLS = 30
DEFAULT_ROWS = 30
DEFAULT_EDGE_LENGTH = 1.0  # mm

# Point-in-polygon tolerance for boundary ties (mm)
POINT_TOLERANCE = 1e-9

# ============================================================================
# MATERIAL (plane strain, neo-Hookean)
# ============================================================================

YOUNGS_MODULUS = 2100.0  # MPa
POISSON_RATIO = 0.33
THICKNESS = 1.0  # mm

# ============================================================================
# NEGATIVE MASKS
# ============================================================================

MASK_RADIUS_MIN = 0.1  # mm
MASK_RADIUS_MAX = 8.0  # mm
MASK_GRID = (12, 8)  # masks along x, along y
CONTACT_RADIUS_FACTOR = 0.75
FRACTION_LIMITS = (0.01, 0.99)
RIGID_SURFACE_SEGMENTS = 64
MIN_RIGID_SURFACE_SEGMENTS = 8

# SME protection: clearance margin (fraction of edge length) and shift budget
SME_CLEARANCE_MARGIN = 0.05
SME_MAX_SHIFT_ATTEMPTS = 100

# ============================================================================
# BOUNDARY SMOOTHING
# ============================================================================

SMOOTHING_STEPS = 10

# ============================================================================
# NONLINEAR SOLVER
# ============================================================================

LOAD_STEPS = 10
MIN_LOAD_STEP = 1.0 / 256.0
GROWTH_AFTER_SUCCESSES = 3
MAX_NEWTON_ITERATIONS = 25
NEWTON_TOL_REL = 1e-6
NEWTON_TOL_ABS = 1e-10  # N

# ============================================================================
# CONTACT
# ============================================================================

# Penalty parameters are factor * E / L2 (N/mm^3)
PENALTY_MUTUAL_FACTOR = 60.0
PENALTY_SELF_FACTOR = 5.0

SEARCH_RADIUS_FACTOR = 2.0  # x edge length
SELF_CONTACT_EXCLUSION = 2  # segments along the same loop
CONTACT_GAUSS_POINTS = 2
UZAWA_MAX_ITERATIONS = 10
UZAWA_GAP_TOL_FACTOR = 1e-4  # x edge length
RIGID_PROJECTION_MODES = ["polyline", "circle"]

# ============================================================================
# SHAPE OBJECTIVE
# ============================================================================

FOURIER_COEFFICIENTS = 50
WEIGHT_A = 100.0  # rad^-2
WEIGHT_B = 100.0  # rad^-2
WEIGHT_LENGTH = 1.0
WEIGHT_THETA = 1.0  # rad^-2
ZETA_DENOMINATOR_MODES = ["as_printed", "per_harmonic"]

# ============================================================================
# HILL CLIMBER
# ============================================================================

MUTATION_PROBABILITY = 0.08
MUTATION_FRACTION = 0.10  # of max(L1, L2)
MAX_ITERATIONS = 5000
TARGET_VOLUME_FRACTION = 0.30
VOLUME_PENALTY = 20.0
PENALTY_OBJECTIVE = 1.0e6
STALL_TOLERANCE = 0.01
STALL_WINDOW = 10
FORCE_LIMITS = (-1000.0, 1000.0)  # N
DEFAULT_SEED = 0

# ============================================================================
# OUTPUT
# ============================================================================

FLOAT_FORMAT = "%.17g"
FRAMES_EVERY = 50
SVG_DPI = 96
SOLID_COLOR = "#9e9e9e"
DEFORMED_COLOR = "#1f5fbf"
RIGID_COLOR = "#111111"
CONTACT_MARK_COLOR = "#d62728"
DESIRED_CURVE_COLOR = "#000000"
ACTUAL_CURVE_COLOR = "#2ca02c"


def lattice_extents(cols: int, rows: int, edge_length: float) -> tuple:
    """Nominal lattice extents (L1, L2) of a cols x rows honeycomb."""
    return cols * 1.5 * edge_length, rows * math.sqrt(3.0) * edge_length
