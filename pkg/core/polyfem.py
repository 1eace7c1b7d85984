"""
Polygonal Finite Element Module
Large-deformation plane-strain analysis on arbitrary polygons with mean value
shape functions, a neo-Hookean material, updated-Lagrangian internal forces
and Newton-Raphson load stepping
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from config import (
    DEFAULT_EDGE_LENGTH,
    GROWTH_AFTER_SUCCESSES,
    LOAD_STEPS,
    MAX_NEWTON_ITERATIONS,
    MIN_LOAD_STEP,
    NEWTON_TOL_ABS,
    NEWTON_TOL_REL,
    UZAWA_GAP_TOL_FACTOR,
    UZAWA_MAX_ITERATIONS,
)
from .exceptions import (
    ElementInversionError,
    InvalidArgumentError,
    ShapeFunctionError,
    SolverDivergenceError,
)
from .geometry import cross2, ear_clip, polygon_centroid, polygon_signed_area

logger = logging.getLogger(__name__)

# 3-point rule on triangles (barycentric), exact for quadratics
_TRI_POINTS = np.array([
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
])


# ============================================================================
# MATERIAL
# ============================================================================

@dataclass(frozen=True)
class MaterialParams:
    """Isotropic neo-Hookean parameters; Lame constants derived from E and nu."""
    E: float
    nu: float
    thickness: float = 1.0

    def __post_init__(self):
        if not self.E > 0:
            raise InvalidArgumentError(f"E must be positive (got {self.E})")
        if not 0.0 < self.nu < 0.5:
            raise InvalidArgumentError(f"nu must lie in (0, 0.5) (got {self.nu})")
        if not self.thickness > 0:
            raise InvalidArgumentError(f"thickness must be positive (got {self.thickness})")

    @property
    def mu(self) -> float:
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lam(self) -> float:
        return 2.0 * self.mu * self.nu / (1.0 - 2.0 * self.nu)


def cauchy_stress(F: np.ndarray, mat: MaterialParams) -> np.ndarray:
    """
    Neo-Hookean Cauchy stress sigma = mu/J (F F^T - I) + lambda/J ln(J) I.

    Args:
        F: (2, 2) or (q, 2, 2) plane-strain deformation gradient(s)
        mat: Material parameters

    Returns:
        Cauchy stress with the shape of F (MPa)

    Raises:
        ElementInversionError: If det F <= 0
    """
    F = np.asarray(F, dtype=float)
    J = np.linalg.det(F)
    if np.any(J <= 0.0):
        bad = int(np.argmin(np.atleast_1d(J)))
        raise ElementInversionError(-1, float(np.atleast_1d(J)[bad]))
    b = F @ np.swapaxes(F, -1, -2)
    eye = np.eye(2)
    Jx = J[..., None, None]
    return mat.mu / Jx * (b - eye) + mat.lam / Jx * np.log(Jx) * eye


# ============================================================================
# MEAN VALUE SHAPE FUNCTIONS
# ============================================================================

def _mean_value_batch(vertices: np.ndarray, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    V = np.asarray(vertices, dtype=float)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    diam = float(np.max(np.linalg.norm(V[:, None, :] - V[None, :, :], axis=-1)))

    s = V[None, :, :] - P[:, None, :]                 # (q, nv, 2)
    r = np.linalg.norm(s, axis=-1)                     # (q, nv)
    if np.any(r < 1e-14 * diam):
        raise ShapeFunctionError("point coincides with a polygon vertex")

    s_next = np.roll(s, -1, axis=1)
    r_next = np.roll(r, -1, axis=1)
    A = 0.5 * cross2(s, s_next)
    D = np.einsum("qvi,qvi->qv", s, s_next)
    Q = r * r_next + D
    if np.any(Q <= 1e-14 * r * r_next):
        raise ShapeFunctionError("point lies on the polygon boundary")

    t = 2.0 * A / Q                                    # tan(alpha_i / 2)
    t_prev = np.roll(t, 1, axis=1)
    w = (t_prev + t) / r
    W = w.sum(axis=1)
    N = w / W[:, None]

    grad_A = 0.5 * np.stack([s[..., 1] - s_next[..., 1], s_next[..., 0] - s[..., 0]], axis=-1)
    grad_Q = (-(r_next / r)[..., None] * s - (r / r_next)[..., None] * s_next - (s + s_next))
    grad_t = 2.0 * (grad_A * Q[..., None] - A[..., None] * grad_Q) / (Q ** 2)[..., None]
    grad_t_prev = np.roll(grad_t, 1, axis=1)
    grad_w = ((grad_t_prev + grad_t) / r[..., None]
              + ((t_prev + t) / r ** 3)[..., None] * s)
    grad_W = grad_w.sum(axis=1)
    grad_N = (grad_w - N[..., None] * grad_W[:, None, :]) / W[:, None, None]
    return N, grad_N


def mean_value_shape_functions(
    vertices: np.ndarray,
    p: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mean value coordinates and their gradients at a point inside a polygon.

    Args:
        vertices: (nv, 2) polygon vertices in order (convex or concave)
        p: Evaluation point (2,)

    Returns:
        Tuple of (values (nv,), gradients (nv, 2))

    Raises:
        ShapeFunctionError: If p lies on the polygon boundary
    """
    N, grad_N = _mean_value_batch(vertices, np.asarray(p, dtype=float)[None, :])
    return N[0], grad_N[0]


def polygon_quadrature(vertices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quadrature over a simple counter-clockwise polygon.

    A fan from the area centroid is used when every fan triangle has positive
    area; otherwise the polygon is ear-clipped. Each triangle carries the
    3-point rule.

    Args:
        vertices: (nv, 2) vertices

    Returns:
        Tuple of (points (q, 2), weights (q,)) with weights summing to the area

    Raises:
        ElementInversionError: If the polygon is not counter-clockwise or not simple
    """
    V = np.asarray(vertices, dtype=float)
    area = polygon_signed_area(V)
    if area <= 0.0:
        raise ElementInversionError(-1, area)

    c = polygon_centroid(V)
    nxt = np.roll(V, -1, axis=0)
    fan_areas = 0.5 * cross2(V - c, nxt - c)
    if np.all(fan_areas > 1e-12 * area):
        triangles = np.stack([np.broadcast_to(c, V.shape), V, nxt], axis=1)
        tri_areas = fan_areas
    else:
        try:
            idx = ear_clip(V)
        except ValueError as exc:
            raise ElementInversionError(-1, area) from exc
        triangles = V[np.array(idx)]
        tri_areas = 0.5 * cross2(triangles[:, 1] - triangles[:, 0], triangles[:, 2] - triangles[:, 0])

    points = np.einsum("pk,tki->tpi", _TRI_POINTS, triangles).reshape(-1, 2)
    weights = np.repeat(tri_areas / 3.0, 3)
    return points, weights


# ============================================================================
# ELEMENT SETS
# ============================================================================

@dataclass
class ElementGroup:
    """Elements sharing one vertex count, with reference-configuration quadrature data."""
    element_ids: np.ndarray        # (m,) caller's element ids
    nodes: np.ndarray              # (m, nv)
    qp_element: np.ndarray         # (q,) local element index of every quadrature point
    dN_dX: np.ndarray = field(repr=False)   # (q, nv, 2)
    N: np.ndarray = field(repr=False)       # (q, nv)
    weights: np.ndarray = field(repr=False)  # (q,) reference area weights

    @property
    def qp_nodes(self) -> np.ndarray:
        return self.nodes[self.qp_element]


@dataclass
class PolygonElements:
    """Quadrature-ready polygon elements over a node set."""
    n_nodes: int
    groups: List[ElementGroup]

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    @property
    def element_count(self) -> int:
        return sum(len(g.element_ids) for g in self.groups)

    def total_area(self) -> float:
        return float(sum(g.weights.sum() for g in self.groups))


def build_elements(
    positions: np.ndarray,
    connectivity: Sequence[Sequence[int]],
    element_ids: Optional[Sequence[int]] = None
) -> PolygonElements:
    """
    Precompute quadrature points, shape functions and reference gradients.

    Args:
        positions: (n, 2) reference nodal positions (after smoothing)
        connectivity: Vertex node ids per element, counter-clockwise
        element_ids: Ids reported in errors (defaults to positions in connectivity)

    Returns:
        PolygonElements

    Raises:
        ElementInversionError: If an element polygon is not valid
    """
    X = np.asarray(positions, dtype=float)
    ids = list(range(len(connectivity))) if element_ids is None else list(element_ids)
    by_size: Dict[int, List[int]] = {}
    for k, nodes in enumerate(connectivity):
        by_size.setdefault(len(nodes), []).append(k)

    groups = []
    for nv in sorted(by_size):
        members = by_size[nv]
        nodes = np.array([connectivity[k] for k in members], dtype=int)
        qp_element, dN, Ns, weights = [], [], [], []
        for local, k in enumerate(members):
            V = X[nodes[local]]
            try:
                pts, w = polygon_quadrature(V)
            except ElementInversionError as exc:
                raise ElementInversionError(ids[k], exc.det_f) from exc
            N, grad = _mean_value_batch(V, pts)
            qp_element.append(np.full(len(w), local))
            dN.append(grad)
            Ns.append(N)
            weights.append(w)
        groups.append(ElementGroup(
            element_ids=np.array([ids[k] for k in members], dtype=int),
            nodes=nodes,
            qp_element=np.concatenate(qp_element),
            dN_dX=np.concatenate(dN),
            N=np.concatenate(Ns),
            weights=np.concatenate(weights),
        ))
    return PolygonElements(n_nodes=len(X), groups=groups)


# ============================================================================
# INTERNAL FORCE AND TANGENT
# ============================================================================

def _kinematics(group: ElementGroup, x: np.ndarray):
    xe = x[group.qp_nodes]                                   # (q, nv, 2)
    F = np.einsum("qai,qaj->qij", xe, group.dN_dX)
    J = np.linalg.det(F)
    if np.any(J <= 0.0):
        q = int(np.argmin(J))
        raise ElementInversionError(int(group.element_ids[group.qp_element[q]]), float(J[q]))
    F_inv = np.linalg.inv(F)
    grad_x = np.einsum("qak,qkj->qaj", group.dN_dX, F_inv)   # spatial gradients
    return F, J, grad_x


def _group_dofs(group: ElementGroup) -> np.ndarray:
    qn = group.qp_nodes
    return np.stack([2 * qn, 2 * qn + 1], axis=-1).reshape(len(qn), -1)


def internal_force(
    elements: PolygonElements,
    positions: np.ndarray,
    u: np.ndarray,
    mat: MaterialParams
) -> np.ndarray:
    """
    Assemble f_int = sum over elements of the integral of B_UL^T sigma dv, dv = t da.

    Args:
        elements: Precomputed polygon elements
        positions: (n, 2) reference positions
        u: (2n,) nodal displacements
        mat: Material parameters

    Returns:
        (2n,) internal force vector (N)
    """
    x = positions + np.asarray(u).reshape(-1, 2)
    f = np.zeros(elements.n_dofs)
    for group in elements.groups:
        F, J, g = _kinematics(group, x)
        sigma = cauchy_stress(F, mat)
        dv = J * group.weights * mat.thickness
        fe = np.einsum("qij,qaj->qai", sigma, g) * dv[:, None, None]
        np.add.at(f, _group_dofs(group), fe.reshape(len(fe), -1))
    return f


def _tangent_blocks(group: ElementGroup, x: np.ndarray, mat: MaterialParams) -> np.ndarray:
    F, J, g = _kinematics(group, x)
    sigma = cauchy_stress(F, mat)
    lnJ = np.log(J)
    lam_p = mat.lam / J
    mu_p = (mat.mu - mat.lam * lnJ) / J
    eye = np.eye(2)

    gg = np.einsum("qaj,qbj->qab", g, g)
    gsg = np.einsum("qaj,qjl,qbl->qab", g, sigma, g)
    K = (lam_p[:, None, None, None, None] * np.einsum("qai,qbk->qaibk", g, g)
         + mu_p[:, None, None, None, None] * (
             np.einsum("qab,ik->qaibk", gg, eye) + np.einsum("qak,qbi->qaibk", g, g))
         + np.einsum("qab,ik->qaibk", gsg, eye))
    dv = J * group.weights * mat.thickness
    nv = g.shape[1]
    return (K * dv[:, None, None, None, None]).reshape(len(g), 2 * nv, 2 * nv)


def tangent_stiffness(
    elements: PolygonElements,
    positions: np.ndarray,
    u: np.ndarray,
    mat: MaterialParams
) -> csr_matrix:
    """
    Material plus geometric stiffness of the updated-Lagrangian neo-Hookean element.

    Returns:
        (2n, 2n) symmetric sparse matrix (N/mm)
    """
    x = positions + np.asarray(u).reshape(-1, 2)
    rows, cols, data = [], [], []
    for group in elements.groups:
        Ke = _tangent_blocks(group, x, mat)
        dofs = _group_dofs(group)
        nd = dofs.shape[1]
        rows.append(np.repeat(dofs, nd, axis=1).ravel())
        cols.append(np.tile(dofs, (1, nd)).ravel())
        data.append(Ke.ravel())
    n = elements.n_dofs
    if not data:
        return csr_matrix((n, n))
    return coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()


def strain_energy(
    elements: PolygonElements,
    positions: np.ndarray,
    u: np.ndarray,
    mat: MaterialParams
) -> float:
    """Total stored energy; its gradient with respect to u is internal_force."""
    x = positions + np.asarray(u).reshape(-1, 2)
    total = 0.0
    for group in elements.groups:
        F, J, _ = _kinematics(group, x)
        lnJ = np.log(J)
        trC = np.einsum("qij,qij->q", F, F) + 1.0
        psi = 0.5 * mat.mu * (trC - 3.0) - mat.mu * lnJ + 0.5 * mat.lam * lnJ ** 2
        total += float(np.sum(psi * group.weights)) * mat.thickness
    return total


def end_compliance(f_ext: np.ndarray, u: np.ndarray) -> float:
    """f_ext . u at equilibrium (N mm)."""
    return float(np.dot(f_ext, u))


# ============================================================================
# NEWTON-RAPHSON WITH LOAD STEPPING
# ============================================================================

@dataclass(frozen=True)
class NewtonSettings:
    load_steps: int = LOAD_STEPS
    min_step: float = MIN_LOAD_STEP
    max_iterations: int = MAX_NEWTON_ITERATIONS
    tol_rel: float = NEWTON_TOL_REL
    tol_abs: float = NEWTON_TOL_ABS
    uzawa_max_iterations: int = UZAWA_MAX_ITERATIONS
    gap_tol: float = UZAWA_GAP_TOL_FACTOR * DEFAULT_EDGE_LENGTH


@dataclass
class FEProblem:
    """Everything newton_solve needs for one candidate."""
    positions: np.ndarray
    elements: PolygonElements
    material: MaterialParams
    fixed_dofs: np.ndarray
    f_ext: np.ndarray
    prescribed: Optional[np.ndarray] = None
    contact: Optional[object] = None

    @property
    def n_dofs(self) -> int:
        return 2 * len(self.positions)


@dataclass
class SolverState:
    """Nodal displacements and convergence bookkeeping of one analysis."""
    u: np.ndarray
    load_factor: float
    converged: bool
    iterations: int = 0
    uzawa_iterations: int = 0
    history: List[Dict] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)


def _residual_and_tangent(problem: FEProblem, u: np.ndarray, load_factor: float):
    x = problem.positions + u.reshape(-1, 2)
    r = internal_force(problem.elements, problem.positions, u, problem.material)
    K = tangent_stiffness(problem.elements, problem.positions, u, problem.material)
    if problem.contact is not None:
        problem.contact.update_pairs(x)
        r = r + problem.contact.force(x)
        K = K + problem.contact.stiffness(x)
    r = r - load_factor * problem.f_ext
    return r, K


def _newton(
    problem: FEProblem,
    u: np.ndarray,
    load_factor: float,
    settings: NewtonSettings,
    history: List[Dict],
    step_index: int
) -> Tuple[np.ndarray, int]:
    u = u.copy()
    fixed = problem.fixed_dofs
    free = ~fixed
    target = None
    if problem.prescribed is not None:
        target = load_factor * problem.prescribed[fixed]

    for it in range(1, settings.max_iterations + 1):
        r, K = _residual_and_tangent(problem, u, load_factor)
        du_fixed = np.zeros(int(fixed.sum())) if target is None else target - u[fixed]
        r_norm = float(np.linalg.norm(r[free]))
        f_ref = max(float(np.linalg.norm(load_factor * problem.f_ext)), float(np.linalg.norm(r[fixed])))
        history.append({"step": step_index, "load_factor": load_factor, "iteration": it, "residual": r_norm})

        if not np.isfinite(r_norm):
            raise SolverDivergenceError("non-finite residual")
        if r_norm <= settings.tol_abs + settings.tol_rel * f_ref and not np.any(du_fixed):
            return u, it

        K = K.tocsr()
        K_ff = K[free][:, free]
        rhs = -r[free]
        if np.any(du_fixed):
            rhs = rhs - K[free][:, fixed] @ du_fixed
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MatrixRankWarning)
            du_free = spsolve(K_ff.tocsc(), rhs)
        if not np.all(np.isfinite(du_free)):
            raise SolverDivergenceError("singular tangent")

        u[free] += du_free
        u[fixed] += du_fixed

    raise SolverDivergenceError(f"no convergence in {settings.max_iterations} iterations")


def newton_solve(
    problem: FEProblem,
    settings: Optional[NewtonSettings] = None,
    step_callback: Optional[Callable[[float, np.ndarray], None]] = None
) -> SolverState:
    """
    Solve f_int(u) + f_c(u) - f_ext = 0 by Newton-Raphson with adaptive load stepping.

    Load increments start at 1/load_steps, halve on failure (element
    inversion, divergence, singular tangent) and double after three
    consecutive successes up to the initial size. When contact is present
    every converged step is wrapped in Uzawa multiplier updates until the
    maximum penetration is within the gap tolerance.

    Args:
        problem: Candidate FE problem (at least one fixed DOF)
        settings: Newton/Uzawa settings (defaults from config)
        step_callback: Called with (load_factor, u) after every converged step

    Returns:
        SolverState; converged is False when the increment falls below min_step
    """
    settings = settings or NewtonSettings()
    if not np.any(problem.fixed_dofs):
        raise InvalidArgumentError("at least one support is required")

    u = np.zeros(problem.n_dofs)
    state = SolverState(u=u, load_factor=0.0, converged=False)
    contact = problem.contact

    trivial = not np.any(problem.f_ext) and (
        problem.prescribed is None or not np.any(problem.prescribed[problem.fixed_dofs]))
    if trivial:
        r, _ = _residual_and_tangent(problem, u, 1.0)
        r_norm = float(np.linalg.norm(r[~problem.fixed_dofs]))
        state.history.append({"step": 0, "load_factor": 1.0, "iteration": 1, "residual": r_norm})
        if r_norm <= settings.tol_abs:
            state.load_factor, state.converged, state.iterations = 1.0, True, 1
            return state

    lam = 0.0
    dlam = 1.0 / settings.load_steps
    dlam_max = dlam
    successes = 0
    step_index = 0

    while lam < 1.0 - 1e-14:
        trial = lam + dlam
        if trial > 1.0 - 1e-12:
            trial = 1.0
        saved = contact.snapshot() if contact is not None else None
        step_history: List[Dict] = []
        try:
            u_new, iters = _newton(problem, u, trial, settings, step_history, step_index)
            state.iterations += iters
            if contact is not None:
                x = problem.positions + u_new.reshape(-1, 2)
                for _ in range(settings.uzawa_max_iterations):
                    if contact.max_penetration(x) <= settings.gap_tol:
                        break
                    contact.uzawa_update(x)
                    state.uzawa_iterations += 1
                    u_new, iters = _newton(problem, u_new, trial, settings, step_history, step_index)
                    state.iterations += iters
                    x = problem.positions + u_new.reshape(-1, 2)
                else:
                    penetration = contact.max_penetration(x)
                    if penetration > settings.gap_tol:
                        if "uzawa_unconverged" not in state.flags:
                            state.flags.append("uzawa_unconverged")
                        logger.warning("Uzawa loop stopped at load factor %.4f with penetration %.3e",
                                       trial, penetration)
        except (ElementInversionError, SolverDivergenceError, np.linalg.LinAlgError) as exc:
            if contact is not None:
                contact.restore(saved)
            state.history.extend(step_history)
            dlam *= 0.5
            successes = 0
            logger.debug("Load step to %.5f failed (%s); increment -> %.5f", trial, exc, dlam)
            if dlam < settings.min_step:
                state.u, state.load_factor, state.converged = u, lam, False
                return state
            continue

        u = u_new
        lam = trial
        step_index += 1
        state.history.extend(step_history)
        successes += 1
        if successes >= GROWTH_AFTER_SUCCESSES:
            dlam = min(2.0 * dlam, dlam_max)
            successes = 0
        if step_callback is not None:
            step_callback(lam, u.copy())

    state.u, state.load_factor, state.converged = u, 1.0, True
    return state
