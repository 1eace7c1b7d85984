"""
Shape Objective Module
Fourier Shape Descriptors of closed polylines (cumulative turning function
over normalized arc length), descriptor errors, the weighted shape objective
and the relative shape/length invariants
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from config import (
    FOURIER_COEFFICIENTS,
    WEIGHT_A,
    WEIGHT_B,
    WEIGHT_LENGTH,
    WEIGHT_THETA,
    ZETA_DENOMINATOR_MODES,
)
from .exceptions import InvalidArgumentError, ShapeEvaluationError, UndefinedInvariantError
from .geometry import polygon_signed_area, polyline_self_intersects


def wrap_angle(angle):
    """Map angles to (-pi, pi]."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


@dataclass(frozen=True)
class CurvePolyline:
    points: np.ndarray = field(repr=False)
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
            raise ShapeEvaluationError(f"a curve needs at least 3 points (got {len(pts)})")
        if not np.all(np.isfinite(pts)):
            raise ShapeEvaluationError("curve has non-finite points")
        steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if np.any(steps == 0.0):
            raise ShapeEvaluationError("curve has repeated consecutive points")
        object.__setattr__(self, "points", pts)

    @property
    def length(self) -> float:
        pts = np.vstack([self.points, self.points[:1]]) if self.closed else self.points
        return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


@dataclass(frozen=True)
class FourierDescriptor:
    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    L: float
    theta: float

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def magnitudes(self) -> np.ndarray:
        """R_m = sqrt(A_m^2 + B_m^2)."""
        return np.hypot(self.A, self.B)


@dataclass(frozen=True)
class ObjectiveWeights:
    lambda_a: float = WEIGHT_A
    lambda_b: float = WEIGHT_B
    lambda_length: float = WEIGHT_LENGTH
    lambda_theta: float = WEIGHT_THETA

    def __post_init__(self):
        if min(self.lambda_a, self.lambda_b, self.lambda_length, self.lambda_theta) < 0:
            raise InvalidArgumentError("objective weights must be nonnegative")


def close_curve(curve: CurvePolyline) -> CurvePolyline:
    """
    Close an open polyline with the chord end -> start and orient it clockwise.

    Closed input only gets its orientation normalized (a repeated end point is
    dropped). Reversal keeps the start point: p0, p_{n-1}, ..., p1.

    Raises:
        ShapeEvaluationError: If the closed polygon self-intersects or has zero area
    """
    pts = curve.points
    if np.array_equal(pts[0], pts[-1]):
        pts = pts[:-1]
        if len(pts) < 3:
            raise ShapeEvaluationError("closed curve has fewer than 3 distinct points")

    scale = float(np.ptp(pts, axis=0).max())
    area = polygon_signed_area(pts)
    if scale == 0.0 or abs(area) <= 1e-12 * scale ** 2:
        raise ShapeEvaluationError("closed curve has zero area")
    if polyline_self_intersects(pts, closed=True):
        raise ShapeEvaluationError("closing chord intersects the curve")

    if area > 0:
        pts = np.vstack([pts[:1], pts[:0:-1]])
    return CurvePolyline(pts, closed=True)


def compute_fsd(curve: CurvePolyline, n: int = FOURIER_COEFFICIENTS) -> FourierDescriptor:
    """
    Fourier Shape Descriptor of a closed clockwise polygon.

    The cumulative turning function is piecewise constant with jumps dphi_j
    (signed exterior angles in (-pi, pi]) at normalized arc positions
    t_j = 2 pi l_j / L, j = 1..m, the last one at t = 2 pi. For k = 1..n:

        A_k = -1/(k pi) sum dphi_j sin(k t_j)
        B_k =  1/(k pi) sum dphi_j cos(k t_j)

    Args:
        curve: Closed polyline (see close_curve)
        n: Number of harmonics

    Returns:
        FourierDescriptor with L the perimeter and theta the direction of the first segment
    """
    if not curve.closed:
        raise ShapeEvaluationError("compute_fsd needs a closed curve")
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1 (got {n})")

    pts = curve.points
    seg = np.roll(pts, -1, axis=0) - pts
    lengths = np.linalg.norm(seg, axis=1)
    L = float(lengths.sum())
    phi = np.arctan2(seg[:, 1], seg[:, 0])

    # turn at the end of segment j (vertex j+1), last one back at p0
    dphi = wrap_angle(np.roll(phi, -1) - phi)
    t = 2.0 * np.pi * np.cumsum(lengths) / L

    k = np.arange(1, n + 1)[:, None]
    A = -(np.sin(k * t) @ dphi) / (k[:, 0] * np.pi)
    B = (np.cos(k * t) @ dphi) / (k[:, 0] * np.pi)
    return FourierDescriptor(A=A, B=B, L=L, theta=float(phi[0]))


def describe(curve: CurvePolyline, n: int = FOURIER_COEFFICIENTS) -> FourierDescriptor:
    """close_curve followed by compute_fsd."""
    return compute_fsd(close_curve(curve), n)


def fsd_errors(d: FourierDescriptor, a: FourierDescriptor) -> Tuple[float, float, float, float]:
    """
    Squared descriptor errors between the desired (d) and actual (a) curves.

    Returns:
        (A_err, B_err, L_err, theta_err); theta uses the wrapped difference
    """
    if d.n != a.n:
        raise InvalidArgumentError(f"descriptor sizes differ ({d.n} vs {a.n})")
    a_err = float(np.sum((d.A - a.A) ** 2))
    b_err = float(np.sum((d.B - a.B) ** 2))
    l_err = (d.L - a.L) ** 2
    theta_err = wrap_angle(d.theta - a.theta) ** 2
    return a_err, b_err, float(l_err), float(theta_err)


def objective(
    d: FourierDescriptor,
    a: FourierDescriptor,
    weights: ObjectiveWeights = ObjectiveWeights()
) -> float:
    a_err, b_err, l_err, theta_err = fsd_errors(d, a)
    return (weights.lambda_a * a_err + weights.lambda_b * b_err
            + weights.lambda_length * l_err + weights.lambda_theta * theta_err)


def shape_invariants(
    d: FourierDescriptor,
    a: FourierDescriptor,
    denominator: str = "as_printed"
) -> Tuple[float, float]:
    """
    Relative shape and length discrepancies (zeta_s, zeta_l).

    zeta_s = 1/n sum_m |R_m^d - R_m^a| / R^d, with R^d the last desired
    magnitude R_n^d ("as_printed") or R_m^d per harmonic ("per_harmonic").
    zeta_l = |L^d - L^a| / L^d.

    Raises:
        UndefinedInvariantError: On a zero denominator
    """
    if denominator not in ZETA_DENOMINATOR_MODES:
        raise InvalidArgumentError(f"unknown zeta denominator {denominator!r}")
    if d.n != a.n:
        raise InvalidArgumentError(f"descriptor sizes differ ({d.n} vs {a.n})")

    R_d, R_a = d.magnitudes, a.magnitudes
    if denominator == "as_printed":
        if R_d[-1] == 0.0:
            raise UndefinedInvariantError("R_n of the desired curve is zero")
        zeta_s = float(np.mean(np.abs(R_d - R_a)) / R_d[-1])
    else:
        if np.any(R_d == 0.0):
            raise UndefinedInvariantError("a desired harmonic magnitude is zero")
        zeta_s = float(np.mean(np.abs(R_d - R_a) / R_d))

    if d.L == 0.0:
        raise UndefinedInvariantError("desired curve has zero length")
    zeta_l = abs(d.L - a.L) / d.L
    return zeta_s, float(zeta_l)
