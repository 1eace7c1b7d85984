"""
Benchmarking Module
Hill-climber performance on a smooth 2-variable surrogate objective (no FEA)
"""

import logging
import time
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
import pandas as pd

from core.design_rep import DesignVector, Mask
from .evaluation import Candidate
from .optimizer import HillClimbSettings, hill_climb

logger = logging.getLogger(__name__)

SURROGATE_OPTIMUM = (3.0, 7.0)


def surrogate_objective(design: DesignVector, optimum: Tuple[float, float] = SURROGATE_OPTIMUM) -> float:
    """(x - x*)^2 + (y - y*)^2 on the center of the first mask."""
    mask = design.masks[0]
    return (mask.x - optimum[0]) ** 2 + (mask.y - optimum[1]) ** 2


def surrogate_settings(
    max_iterations: int = 2000,
    target: float = 1e-2,
    mutation_probability: float = 0.5,
    mutation_size: float = 1.0
) -> HillClimbSettings:
    return HillClimbSettings(
        mutation_probability=mutation_probability,
        mutation_size=mutation_size,
        center_bounds=(-10.0, -10.0, 20.0, 20.0),
        radius_limits=(0.1, 8.0),
        force_limits=(-1000.0, 1000.0),
        fraction_scale=0.1,
        max_iterations=max_iterations,
        stall_tolerance=1e-2,
        stall_window=0,
        target_objective=target,
    )


def run_surrogate_benchmark(
    seeds: Iterable[int] = range(30),
    max_iterations: int = 2000,
    target: float = 1e-2,
    start: Tuple[float, float] = (0.0, 0.0),
    progress_callback: Optional[Callable[[int, int, str], None]] = None
) -> pd.DataFrame:
    """
    Run the hill climber once per seed on the surrogate objective.

    Args:
        seeds: RNG seeds
        max_iterations: Iteration budget per run
        target: Objective value counted as reaching the optimum
        start: Initial mask center
        progress_callback: Optional callback(current, total, status)

    Returns:
        DataFrame with seed, iterations, final_objective, reached, time_ms
    """
    seeds = list(seeds)
    settings = surrogate_settings(max_iterations=max_iterations, target=target)
    initial = DesignVector(masks=(Mask(start[0], start[1], 1.0, 0, 0.5),), force=0.0)

    def evaluate_fn(design: DesignVector) -> Candidate:
        value = surrogate_objective(design)
        return Candidate(design=design, objective=value, feasible=True, volume_fraction=0.0,
                         shape_objective=value)

    results = []
    for i, seed in enumerate(seeds):
        if progress_callback:
            progress_callback(i, len(seeds), f"Running seed {seed} ({i + 1}/{len(seeds)})")

        start_time = time.time()
        outcome = hill_climb(initial, evaluate_fn, settings, np.random.default_rng(seed))
        elapsed_time = time.time() - start_time

        results.append({
            "seed": seed,
            "iterations": outcome.iterations,
            "final_objective": outcome.best.objective,
            "reached": outcome.best.objective <= target,
            "time_ms": round(elapsed_time * 1000, 2),
        })

    frame = pd.DataFrame(results, columns=["seed", "iterations", "final_objective", "reached", "time_ms"])
    logger.info("Surrogate benchmark: %d/%d seeds reached f <= %g",
                int(frame["reached"].sum()), len(frame), target)
    return frame
