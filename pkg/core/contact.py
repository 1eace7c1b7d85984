"""
Contact Module
Frictionless self and mutual contact between flexible boundary segments and
rigid circles: pair detection, closest-point projection, penalty traction,
segment force/stiffness and Uzawa multiplier updates
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.spatial import cKDTree

from config import (
    CONTACT_GAUSS_POINTS,
    RIGID_PROJECTION_MODES,
    SELF_CONTACT_EXCLUSION,
    THICKNESS,
)
from .design_rep import RigidSurface
from .exceptions import DegenerateProjectionError, InvalidArgumentError
from .geometry import closest_point_on_segment, point_segment_distance, segment_distance

logger = logging.getLogger(__name__)

MODES = ("mutual", "self")


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class ContactSettings:
    eps_mutual: float
    eps_self: float
    search_radius: float
    thickness: float = THICKNESS
    exclusion: int = SELF_CONTACT_EXCLUSION
    gauss_points: int = CONTACT_GAUSS_POINTS
    rigid_projection: str = "polyline"
    self_contact: bool = True
    mutual_contact: bool = True

    def __post_init__(self):
        if not (self.eps_mutual > 0 and self.eps_self > 0):
            raise InvalidArgumentError("penalty parameters must be positive")
        if not self.search_radius > 0:
            raise InvalidArgumentError(f"search_radius must be positive (got {self.search_radius})")
        if self.gauss_points < 1:
            raise InvalidArgumentError("at least one Gauss point per segment is required")
        if self.rigid_projection not in RIGID_PROJECTION_MODES:
            raise InvalidArgumentError(f"unknown rigid projection {self.rigid_projection!r}")

    def penalty(self, mode: str) -> float:
        return self.eps_self if mode == "self" else self.eps_mutual


@dataclass(frozen=True)
class ContactSegment:
    """Two-node segment; rigid chords carry node ids (-1, -1)."""
    index: int
    nodes: Tuple[int, int]
    points: np.ndarray = field(repr=False)
    owner: int
    rigid: bool = False

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.points[1] - self.points[0]))

    @property
    def normal(self) -> np.ndarray:
        t = (self.points[1] - self.points[0]) / self.length
        return np.array([t[1], -t[0]])


@dataclass(frozen=True)
class ContactPair:
    slave: int
    master: int
    mode: str   # "self" | "mutual"
    kind: str   # "segment" | "rigid_segment" | "circle"
    active: bool = False


@dataclass
class MultiplierField:
    """Normal multipliers per slave segment and Gauss point, one array per contact mode."""
    values: Dict[str, np.ndarray]
    outer_iterations: int = 0

    @classmethod
    def zeros(cls, n_segments: int, gauss_points: int) -> "MultiplierField":
        return cls({mode: np.zeros((n_segments, gauss_points)) for mode in MODES})

    def copy(self) -> "MultiplierField":
        return MultiplierField({k: v.copy() for k, v in self.values.items()}, self.outer_iterations)


class Projection(NamedTuple):
    point: np.ndarray
    normal: np.ndarray
    xi: float
    segment: int


# ============================================================================
# SCENE
# ============================================================================

class ContactScene:
    """Boundary loops, rigid surfaces and reference positions of one candidate."""

    def __init__(
        self,
        loops: Sequence[Sequence[int]],
        rigid_surfaces: Sequence[RigidSurface],
        reference_positions: np.ndarray,
        settings: ContactSettings
    ):
        self.loops = [list(loop) for loop in loops]
        self.rigid_surfaces = list(rigid_surfaces) if settings.mutual_contact else []
        self.reference = np.asarray(reference_positions, dtype=float)
        self.settings = settings

        nodes, loop_id, loop_pos = [], [], []
        for lid, loop in enumerate(self.loops):
            for k, n0 in enumerate(loop):
                nodes.append((n0, loop[(k + 1) % len(loop)]))
                loop_id.append(lid)
                loop_pos.append(k)
        self.segment_nodes = np.array(nodes, dtype=int).reshape(-1, 2)
        self.segment_loop = np.array(loop_id, dtype=int)
        self.segment_position = np.array(loop_pos, dtype=int)
        self.loop_lengths = [len(loop) for loop in self.loops]

        chords, owners = [], []
        for sid, surface in enumerate(self.rigid_surfaces):
            pts = surface.segments
            chords.extend(np.stack([pts, np.roll(pts, -1, axis=0)], axis=1))
            owners.extend([sid] * len(pts))
        self.chords = np.array(chords, dtype=float).reshape(-1, 2, 2)
        self.chord_owner = np.array(owners, dtype=int)

        self.gauss_xi, self.gauss_w = np.polynomial.legendre.leggauss(settings.gauss_points)

    @property
    def n_segments(self) -> int:
        return len(self.segment_nodes)

    @property
    def n_nodes(self) -> int:
        return len(self.reference)

    def flexible_segments(self, positions: np.ndarray) -> List[ContactSegment]:
        return [
            ContactSegment(i, (int(a), int(b)), positions[[a, b]], int(self.segment_loop[i]))
            for i, (a, b) in enumerate(self.segment_nodes)
        ]

    def rigid_segments(self) -> List[ContactSegment]:
        return [
            ContactSegment(i, (-1, -1), self.chords[i], int(self.chord_owner[i]), rigid=True)
            for i in range(len(self.chords))
        ]

    def loop_distance(self, i: int, j: int) -> Optional[int]:
        """Segments between i and j along their common loop, None for different loops."""
        if self.segment_loop[i] != self.segment_loop[j]:
            return None
        n = self.loop_lengths[self.segment_loop[i]]
        d = abs(int(self.segment_position[i]) - int(self.segment_position[j]))
        return min(d, n - d)


# ============================================================================
# DETECTION
# ============================================================================

class _SegmentTree:
    """KD-tree over segment midpoints; queries are padded by both half-lengths."""

    def __init__(self, p: np.ndarray, q: np.ndarray):
        p, q = np.atleast_2d(p), np.atleast_2d(q)
        self.tree = cKDTree(0.5 * (p + q))
        self.reach = 0.5 * float(np.linalg.norm(q - p, axis=1).max())

    def query(self, p: np.ndarray, q: np.ndarray, pad: float) -> List[List[int]]:
        """Indices of segments possibly within pad of each query segment."""
        p, q = np.atleast_2d(p), np.atleast_2d(q)
        radius = pad + self.reach + 0.5 * np.linalg.norm(q - p, axis=1)
        hits = self.tree.query_ball_point(0.5 * (p + q), radius * (1.0 + 1e-9) + 1e-12)
        return [sorted(h) for h in hits]



def detect_pairs(scene: ContactScene, positions: np.ndarray) -> List[ContactPair]:
    """
    Candidate contact pairs at the current configuration.

    Broad phase queries a KD-tree of segment midpoints padded by the segment
    half-lengths; the narrow phase keeps pairs whose minimal distance is
    within the search radius. Self pairs skip segments within the exclusion
    window along one loop; the lower segment id is the slave.

    Args:
        scene: Contact scene
        positions: (n, 2) current nodal positions

    Returns:
        Pairs sorted by (slave, mode, master)
    """
    settings = scene.settings
    r = settings.search_radius
    x = np.asarray(positions, dtype=float)
    seg = scene.segment_nodes
    pairs: List[ContactPair] = []

    if settings.self_contact and scene.n_segments:
        starts, ends = x[seg[:, 0]], x[seg[:, 1]]
        candidates = _SegmentTree(starts, ends).query(starts, ends, r)
        for i, (a, b) in enumerate(seg):
            for j in candidates[i]:
                if j <= i:
                    continue
                d_loop = scene.loop_distance(i, j)
                if d_loop is not None and d_loop <= settings.exclusion:
                    continue
                c, d = seg[j]
                if segment_distance(x[a], x[b], x[c], x[d]) <= r:
                    pairs.append(ContactPair(i, j, "self", "segment"))

    if settings.mutual_contact and scene.rigid_surfaces and scene.n_segments:
        if settings.rigid_projection == "circle":
            for i, (a, b) in enumerate(seg):
                for k, surface in enumerate(scene.rigid_surfaces):
                    if point_segment_distance(surface.center, x[a], x[b]) - surface.radius <= r:
                        pairs.append(ContactPair(i, k, "mutual", "circle"))
        else:
            chords = np.asarray(scene.chords, dtype=float)
            candidates = _SegmentTree(chords[:, 0], chords[:, 1]).query(x[seg[:, 0]], x[seg[:, 1]], r)
            for i, (a, b) in enumerate(seg):
                for k in candidates[i]:
                    p, q = scene.chords[k]
                    if segment_distance(x[a], x[b], p, q) <= r:
                        pairs.append(ContactPair(i, k, "mutual", "rigid_segment"))

    pairs.sort(key=lambda pr: (pr.slave, MODES.index(pr.mode), pr.master))
    return pairs


# ============================================================================
# PROJECTION AND TRACTION
# ============================================================================

def project_point(
    x: np.ndarray,
    target: Union[Sequence[ContactSegment], RigidSurface]
) -> Projection:
    """
    Closest point on a master segment set or on a rigid circle.

    Args:
        x: Query point (2,)
        target: Master segments (ties go to the lower segment index) or a RigidSurface

    Returns:
        Projection(point, outward normal, xi, segment); for circles xi is the
        polar angle in [0, 2*pi) and segment is -1

    Raises:
        DegenerateProjectionError: If x coincides with the circle center
    """
    x = np.asarray(x, dtype=float)
    if isinstance(target, RigidSurface):
        v = x - target.center
        dist = float(np.linalg.norm(v))
        if dist < 1e-12 * max(target.radius, 1.0):
            raise DegenerateProjectionError("point coincides with the rigid circle center")
        n = v / dist
        angle = float(np.arctan2(n[1], n[0])) % (2.0 * np.pi)
        return Projection(target.center + target.radius * n, n, angle, -1)

    if not target:
        raise InvalidArgumentError("projection target is empty")
    best = None
    for segment in sorted(target, key=lambda s: s.index):
        q, s, dist = closest_point_on_segment(x, segment.points[0], segment.points[1])
        if best is None or dist < best[2]:
            best = (q, s, dist, segment)
    q, s, _, segment = best
    return Projection(q, segment.normal, s, segment.index)


def contact_traction(g_n: float, n_p: np.ndarray, eps: float, lam: float = 0.0) -> np.ndarray:
    """
    Augmented penalty traction on the slave: p n_p with p = max(0, lam - eps g_n).

    With lam = 0 this is the classical penalty rule: -eps g_n n_p for g_n < 0
    and zero otherwise.
    """
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive (got {eps})")
    p = max(0.0, lam - eps * g_n)
    return p * np.asarray(n_p, dtype=float)


# ============================================================================
# GAUSS POINT KINEMATICS
# ============================================================================

@dataclass
class _GaussPoint:
    slave: int
    index: int
    mode: str
    kind: str
    master: int
    gap: float
    dofs: np.ndarray
    grad: np.ndarray          # dg/du over dofs
    hess: np.ndarray          # d2g/du2 over dofs
    weight: float             # w_g t l_s / 2
    weight_grad: np.ndarray   # d(weight)/du over dofs


def _node_dofs(nodes: Sequence[int]) -> np.ndarray:
    return np.array([[2 * n, 2 * n + 1] for n in nodes], dtype=int).ravel()


def _segment_gap(xs, z1, z2, N1, N2, flexible_master: bool):
    d = z2 - z1
    ell = float(np.linalg.norm(d))
    t = d / ell
    n = np.array([t[1], -t[0]])
    w = xs - z1
    g = float(w @ n)
    a = float(w @ t)
    if not flexible_master:
        grad = np.concatenate([N1 * n, N2 * n])
        return g, grad, np.zeros((4, 4)), n

    # variables v = (x, z1, d) mapped from u = (y1, y2, z1, z2)
    eye = np.eye(2)
    T = np.zeros((6, 8))
    T[0:2, 0:2], T[0:2, 2:4] = N1 * eye, N2 * eye
    T[2:4, 4:6] = eye
    T[4:6, 4:6], T[4:6, 6:8] = -eye, eye
    grad_v = np.concatenate([n, -n, -(a / ell) * n])
    tn = np.outer(t, n) / ell
    H_v = np.zeros((6, 6))
    H_v[0:2, 4:6], H_v[4:6, 0:2] = -tn, -tn.T
    H_v[2:4, 4:6], H_v[4:6, 2:4] = tn, tn.T
    H_v[4:6, 4:6] = (a * (np.outer(t, n) + np.outer(n, t)) - g * np.outer(n, n)) / ell ** 2
    return g, T.T @ grad_v, T.T @ H_v @ T, n


def _master_distance(pair: ContactPair, scene: ContactScene, x: np.ndarray, xs: np.ndarray) -> float:
    if pair.kind == "circle":
        surface = scene.rigid_surfaces[pair.master]
        return abs(float(np.linalg.norm(xs - surface.center)) - surface.radius)
    if pair.kind == "rigid_segment":
        p, q = scene.chords[pair.master]
        return point_segment_distance(xs, p, q)
    c, d = scene.segment_nodes[pair.master]
    return point_segment_distance(xs, x[c], x[d])


def _master_gap(
    pair: ContactPair,
    scene: ContactScene,
    x: np.ndarray,
    slave_nodes: Tuple[int, int],
    xi: float,
    n_s: np.ndarray
):
    """Gap, gradient, Hessian and DOFs against one master; None when a self pair fails the filters."""
    a, b = slave_nodes
    N1, N2 = 0.5 * (1.0 - xi), 0.5 * (1.0 + xi)
    xs = N1 * x[a] + N2 * x[b]

    if pair.kind == "circle":
        surface = scene.rigid_surfaces[pair.master]
        v = xs - surface.center
        r = float(np.linalg.norm(v))
        if r < 1e-12 * max(surface.radius, 1.0):
            raise DegenerateProjectionError("slave point at a rigid circle center")
        n = v / r
        H_xx = (np.eye(2) - np.outer(n, n)) / r
        hess = np.kron(np.array([[N1 * N1, N1 * N2], [N2 * N1, N2 * N2]]), H_xx)
        return r - surface.radius, np.concatenate([N1 * n, N2 * n]), hess, _node_dofs((a, b))
    if pair.kind == "rigid_segment":
        p, q = scene.chords[pair.master]
        g, grad, hess, _ = _segment_gap(xs, p, q, N1, N2, flexible_master=False)
        return g, grad, hess, _node_dofs((a, b))

    c, d = scene.segment_nodes[pair.master]
    g, grad, hess, n = _segment_gap(xs, x[c], x[d], N1, N2, flexible_master=True)
    if float(n_s @ n) >= 0.0:
        return None
    X = scene.reference
    Xs = N1 * X[a] + N2 * X[b]
    Zd = X[d] - X[c]
    n_ref = np.array([Zd[1], -Zd[0]]) / np.linalg.norm(Zd)
    if float((Xs - X[c]) @ n_ref) <= 0.0:
        return None
    return g, grad, hess, _node_dofs((a, b, c, d))


def _gauss_points(
    pairs: Sequence[ContactPair],
    scene: ContactScene,
    positions: np.ndarray
) -> Iterator[_GaussPoint]:
    x = np.asarray(positions, dtype=float)
    t = scene.settings.thickness

    groups: Dict[Tuple[int, str], List[ContactPair]] = defaultdict(list)
    for pair in pairs:
        groups[(pair.slave, pair.mode)].append(pair)

    for (slave, mode), candidates in sorted(groups.items(), key=lambda kv: (kv[0][0], MODES.index(kv[0][1]))):
        a, b = scene.segment_nodes[slave]
        y1, y2 = x[a], x[b]
        ls_vec = y2 - y1
        ls = float(np.linalg.norm(ls_vec))
        e_s = ls_vec / ls
        n_s = np.array([e_s[1], -e_s[0]])

        for gi, (xi, wg) in enumerate(zip(scene.gauss_xi, scene.gauss_w)):
            xs = 0.5 * (1.0 - xi) * y1 + 0.5 * (1.0 + xi) * y2
            # nearest admissible master; ties keep the candidate order
            ranked = sorted(candidates, key=lambda pr: _master_distance(pr, scene, x, xs))
            for pair in ranked:
                geometry = _master_gap(pair, scene, x, (a, b), xi, n_s)
                if geometry is not None:
                    break
            else:
                continue
            g, grad, hess, dofs = geometry

            weight = 0.5 * wg * t * ls
            weight_grad = np.zeros(len(dofs))
            weight_grad[0:2] = -0.5 * wg * t * e_s
            weight_grad[2:4] = 0.5 * wg * t * e_s
            yield _GaussPoint(slave, gi, mode, pair.kind, pair.master, g,
                              dofs, grad, hess, weight, weight_grad)



# ============================================================================
# FORCE, STIFFNESS AND MULTIPLIERS
# ============================================================================

def _pressure(gp: _GaussPoint, settings: ContactSettings, multipliers: Optional[MultiplierField]) -> float:
    lam = 0.0 if multipliers is None else float(multipliers.values[gp.mode][gp.slave, gp.index])
    return lam - settings.penalty(gp.mode) * gp.gap


def contact_force(
    pairs: Sequence[ContactPair],
    scene: ContactScene,
    positions: np.ndarray,
    multipliers: Optional[MultiplierField] = None
) -> np.ndarray:
    """
    Contact contribution to the residual, sum over slave Gauss points of
    -p dg/du w t l_s / 2 (2-point Gauss by default).

    eps_mutual applies to rigid masters and eps_self to flexible masters.

    Returns:
        (2n,) vector; the force exerted on the body is its negative
    """
    f = np.zeros(2 * scene.n_nodes)
    for gp in _gauss_points(pairs, scene, positions):
        p = _pressure(gp, scene.settings, multipliers)
        if p <= 0.0:
            continue
        f[gp.dofs] -= p * gp.weight * gp.grad
    return f


def contact_stiffness(
    pairs: Sequence[ContactPair],
    scene: ContactScene,
    positions: np.ndarray,
    multipliers: Optional[MultiplierField] = None
) -> csr_matrix:
    """
    Consistent linearization of contact_force with respect to the nodal positions.

    Includes the gap Hessian (varying projection point and master normal) and
    the change of the slave segment length. Rigid masters only touch slave DOFs.
    """
    n = 2 * scene.n_nodes
    rows, cols, data = [], [], []
    for gp in _gauss_points(pairs, scene, positions):
        p = _pressure(gp, scene.settings, multipliers)
        if p <= 0.0:
            continue
        eps = scene.settings.penalty(gp.mode)
        Ke = gp.weight * (eps * np.outer(gp.grad, gp.grad) - p * gp.hess) \
            - p * np.outer(gp.grad, gp.weight_grad)
        k = len(gp.dofs)
        rows.append(np.repeat(gp.dofs, k))
        cols.append(np.tile(gp.dofs, k))
        data.append(Ke.ravel())
    if not data:
        return csr_matrix((n, n))
    return coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()


def gap_field(
    pairs: Sequence[ContactPair],
    scene: ContactScene,
    positions: np.ndarray
) -> Dict[str, np.ndarray]:
    """Normal gap per slave Gauss point and mode; NaN where no master was found."""
    gaps = {mode: np.full((scene.n_segments, len(scene.gauss_xi)), np.nan) for mode in MODES}
    for gp in _gauss_points(pairs, scene, positions):
        gaps[gp.mode][gp.slave, gp.index] = gp.gap
    return gaps


def uzawa_update(
    multipliers: MultiplierField,
    gaps: Mapping[str, np.ndarray],
    eps: Mapping[str, float]
) -> MultiplierField:
    """
    One outer augmentation: lam <- max(0, lam - eps g) per Gauss point.

    Points without a master (NaN gap) drop their multiplier.
    """
    values = {}
    for mode, lam in multipliers.values.items():
        g = gaps[mode]
        updated = np.maximum(0.0, lam - eps[mode] * np.nan_to_num(g, nan=np.inf))
        values[mode] = np.where(np.isnan(g), 0.0, updated)
    return MultiplierField(values, multipliers.outer_iterations + 1)


def max_penetration(gaps: Mapping[str, np.ndarray]) -> float:
    worst = 0.0
    for g in gaps.values():
        if np.any(~np.isnan(g)):
            worst = max(worst, float(-np.nanmin(g)))
    return worst


def contact_report(
    pairs: Sequence[ContactPair],
    scene: ContactScene,
    positions: np.ndarray,
    multipliers: Optional[MultiplierField] = None
) -> List[Dict]:
    """
    Active pairs at a configuration, one row per (slave, master, mode).

    Returns:
        Rows with slave_segment, master, kind, mode, gap (minimum over the
        pair's Gauss points) and pressure (maximum)
    """
    rows: Dict[Tuple, Dict] = {}
    for gp in _gauss_points(pairs, scene, positions):
        p = _pressure(gp, scene.settings, multipliers)
        if p <= 0.0:
            continue
        key = (gp.slave, gp.master, gp.kind, gp.mode)
        row = rows.setdefault(key, {
            "slave_segment": gp.slave, "master": gp.master, "kind": gp.kind,
            "mode": gp.mode, "gap": gp.gap, "pressure": p,
        })
        row["gap"] = min(row["gap"], gp.gap)
        row["pressure"] = max(row["pressure"], p)
    return [rows[k] for k in sorted(rows, key=lambda k: (k[0], MODES.index(k[3]), k[1]))]


# ============================================================================
# MODEL (Newton hooks)
# ============================================================================

class ContactModel:
    """
    Contact state threaded through newton_solve: current pairs and multipliers.

    newton_solve calls update_pairs, force and stiffness every iteration,
    max_penetration and uzawa_update between inner solves, and
    snapshot/restore around failed load steps.
    """

    def __init__(self, scene: ContactScene):
        self.scene = scene
        self.pairs: List[ContactPair] = []
        self.multipliers = MultiplierField.zeros(scene.n_segments, len(scene.gauss_xi))

    @property
    def eps(self) -> Dict[str, float]:
        return {mode: self.scene.settings.penalty(mode) for mode in MODES}

    def update_pairs(self, positions: np.ndarray) -> None:
        self.pairs = detect_pairs(self.scene, positions)

    def force(self, positions: np.ndarray) -> np.ndarray:
        return contact_force(self.pairs, self.scene, positions, self.multipliers)

    def stiffness(self, positions: np.ndarray) -> csr_matrix:
        return contact_stiffness(self.pairs, self.scene, positions, self.multipliers)

    def max_penetration(self, positions: np.ndarray) -> float:
        return max_penetration(gap_field(self.pairs, self.scene, positions))

    def uzawa_update(self, positions: np.ndarray) -> None:
        self.multipliers = uzawa_update(
            self.multipliers, gap_field(self.pairs, self.scene, positions), self.eps)

    def snapshot(self) -> MultiplierField:
        return self.multipliers.copy()

    def restore(self, state: MultiplierField) -> None:
        self.multipliers = state.copy()

    def active_pairs(self, positions: np.ndarray) -> List[ContactPair]:
        active = {(r["slave_segment"], r["master"], r["mode"])
                  for r in contact_report(self.pairs, self.scene, positions, self.multipliers)}
        return [ContactPair(p.slave, p.master, p.mode, p.kind, (p.slave, p.master, p.mode) in active)
                for p in self.pairs]

    def report(self, positions: np.ndarray) -> List[Dict]:
        return contact_report(self.pairs, self.scene, positions, self.multipliers)
