"""
SVG Export Utility
Render a candidate's smoothed design and its deformed configuration (rigid
surfaces, active contact sites, desired and actual curves) to SVG with
matplotlib; half-domain problems are mirrored to the full mechanism
"""

from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import PolyCollection  # noqa: E402
from matplotlib.patches import Polygon  # noqa: E402

from config import (  # noqa: E402
    ACTUAL_CURVE_COLOR,
    CONTACT_MARK_COLOR,
    DEFORMED_COLOR,
    DESIRED_CURVE_COLOR,
    RIGID_COLOR,
    SOLID_COLOR,
    SVG_DPI,
)
from core.design_rep import RigidSurface  # noqa: E402

Mirror = Optional[Tuple[str, float]]


def _reflect(points: np.ndarray, mirror: Mirror) -> np.ndarray:
    pts = np.array(points, dtype=float, copy=True)
    if mirror is not None:
        axis, position = mirror
        column = 0 if axis == "x" else 1
        pts[..., column] = 2.0 * position - pts[..., column]
    return pts


def _draw_elements(ax, positions: np.ndarray, connectivity: np.ndarray, color: str, mirror: Mirror):
    verts = positions[connectivity] if len(connectivity) else np.zeros((0, 3, 2))
    ax.add_collection(PolyCollection(verts, facecolors=color, edgecolors="none"))
    if mirror is not None and len(connectivity):
        ax.add_collection(PolyCollection(_reflect(verts, mirror), facecolors=color,
                                         edgecolors="none", alpha=0.6))


def _draw_rigid(ax, surfaces: Sequence[RigidSurface], mirror: Mirror):
    for surface in surfaces:
        ax.add_patch(Polygon(surface.segments, closed=True, facecolor="none", edgecolor=RIGID_COLOR, lw=0.8))
        if mirror is not None:
            ax.add_patch(Polygon(_reflect(surface.segments, mirror), closed=True,
                                 facecolor="none", edgecolor=RIGID_COLOR, lw=0.8, ls="--"))


def _draw_curve(ax, points: Optional[np.ndarray], color: str, label: str, mirror: Mirror):
    if points is None or len(points) == 0:
        return
    pts = np.asarray(points, dtype=float)
    ax.plot(pts[:, 0], pts[:, 1], color=color, lw=1.2, label=label)
    if mirror is not None:
        image = _reflect(pts, mirror)
        ax.plot(image[:, 0], image[:, 1], color=color, lw=1.2)


def render_design(
    path: Union[str, Path],
    positions: np.ndarray,
    connectivity: np.ndarray,
    deformed: Optional[np.ndarray] = None,
    rigid_surfaces: Sequence[RigidSurface] = (),
    contact_points: Optional[np.ndarray] = None,
    desired_curve: Optional[np.ndarray] = None,
    actual_curve: Optional[np.ndarray] = None,
    mirror: Mirror = None,
    title: str = ""
) -> Path:
    """
    Write an SVG with the smoothed design (left) and its deformed configuration (right).

    Args:
        path: Output file
        positions: (n, 2) smoothed reference positions
        connectivity: Vertex ids of the solid elements
        deformed: (n, 2) equilibrium positions, None for a design-only frame
        rigid_surfaces: Rigid circles
        contact_points: Active contact sites in the deformed configuration
        desired_curve: Target curve
        actual_curve: Deformed shape-morphing curve
        mirror: (axis, position) for half-domain problems
        title: Figure title

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    panels = 1 if deformed is None else 2
    fig, axes = plt.subplots(1, panels, figsize=(6 * panels, 6), squeeze=False)
    axes = axes[0]

    _draw_elements(axes[0], positions, connectivity, SOLID_COLOR, mirror)
    _draw_rigid(axes[0], rigid_surfaces, mirror)
    axes[0].set_title("design")

    if deformed is not None:
        ax = axes[1]
        _draw_elements(ax, positions, connectivity, SOLID_COLOR, None)
        _draw_elements(ax, deformed, connectivity, DEFORMED_COLOR, mirror)
        _draw_rigid(ax, rigid_surfaces, mirror)
        _draw_curve(ax, desired_curve, DESIRED_CURVE_COLOR, "desired", mirror)
        _draw_curve(ax, actual_curve, ACTUAL_CURVE_COLOR, "actual", mirror)
        if contact_points is not None and len(contact_points):
            cp = np.asarray(contact_points, dtype=float)
            ax.scatter(cp[:, 0], cp[:, 1], s=8, color=CONTACT_MARK_COLOR, zorder=3, label="contact")
            if mirror is not None:
                image = _reflect(cp, mirror)
                ax.scatter(image[:, 0], image[:, 1], s=8, color=CONTACT_MARK_COLOR, zorder=3)
        ax.set_title("deformed")
        if ax.get_legend_handles_labels()[0]:
            ax.legend(loc="upper right", fontsize=7)

    for ax in axes:
        ax.set_aspect("equal")
        ax.autoscale_view()
        ax.axis("off")
    if title:
        fig.suptitle(title)
    fig.savefig(path, format="svg", dpi=SVG_DPI, bbox_inches="tight")
    plt.close(fig)
    return path
