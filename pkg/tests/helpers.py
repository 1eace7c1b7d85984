"""Oracles and builders shared by several test modules."""

import math

import numpy as np


def regular_polygon(n: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> np.ndarray:
    angles = phase + 2.0 * math.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)])


def brute_force_components(solid: np.ndarray, neighbors) -> list:
    """Breadth-first component id per element (-1 for void)."""
    labels = [-1] * len(solid)
    current = 0
    for start in range(len(solid)):
        if not solid[start] or labels[start] >= 0:
            continue
        queue = [start]
        labels[start] = current
        while queue:
            e = queue.pop(0)
            for nb in neighbors[e]:
                if solid[nb] and labels[nb] < 0:
                    labels[nb] = current
                    queue.append(nb)
        current += 1
    return labels


def quad_grid(nx: int, ny: int, width: float = 1.0, height: float = 1.0, origin=(0.0, 0.0)):
    """Structured quad patch: (positions, connectivity) with counter-clockwise cells."""
    xs = origin[0] + width * np.arange(nx + 1)
    ys = origin[1] + height * np.arange(ny + 1)
    positions = np.array([[x, y] for y in ys for x in xs], dtype=float)
    cells = []
    for j in range(ny):
        for i in range(nx):
            n0 = j * (nx + 1) + i
            cells.append([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])
    return positions, np.array(cells, dtype=int)


def cantilever_problem_data(**overrides) -> dict:
    """6 x 3 honeycomb clamped on the left, loaded downwards at the right tip, V-shaped morphing nodes on top."""
    data = {
        "domain": {"cols": 6, "rows": 3, "edge_length": 1.0},
        "supports": [{"box": [-0.1, -0.1, 0.1, 10.0]}],
        "loads": [{"points": [[9.5, 2.598]], "direction": [0.0, -1.0]}],
        "shape_morphing": {"points": [[0.5, 6.062], [3.0, 5.196], [7.5, 6.062]]},
        "target_curve": {"points": [[0.5, 6.2], [3.0, 5.4], [7.5, 6.1]]},
        "optimizer": {
            "mask_grid": [2, 1],
            "radius_limits": [0.1, 1.0],
            "force_limits": [-20.0, 20.0],
            "initial_force": 5.0,
            "max_iterations": 3,
        },
        "solver": {"load_steps": 2},
        "output": {"frames_every": 1},
    }
    data.update(overrides)
    return data
