"""
Optimizer Module
Stochastic hill climber over the mask design vector: per-variable mutation,
strict-improvement acceptance and the stall / iteration-limit termination
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd

from core.design_rep import DesignVector, Mask, center_bounds, clamp_mask
from core.exceptions import InvalidArgumentError
from .evaluation import Candidate, evaluate
from .problem import SynthesisProblem

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = [
    "iter", "f_incumbent", "f_candidate", "accepted",
    "volume_fraction", "newton_iters", "contact_pairs_active",
]


@dataclass(frozen=True)
class HillClimbSettings:
    """Mutation and termination parameters of one run."""
    mutation_probability: float
    mutation_size: float
    center_bounds: Tuple[float, float, float, float]
    radius_limits: Tuple[float, float]
    force_limits: Tuple[float, float]
    fraction_scale: float
    max_iterations: int
    stall_tolerance: float
    stall_window: int
    mutate_surfaces: bool = True
    mutate_force: bool = True
    target_objective: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.mutation_probability < 1.0:
            raise InvalidArgumentError("mutation probability must lie in (0, 1)")
        if not self.mutation_size > 0:
            raise InvalidArgumentError("mutation size must be positive")
        if not self.radius_limits[0] < self.radius_limits[1]:
            raise InvalidArgumentError("radius limits must satisfy r_min < r_max")
        if not self.force_limits[0] < self.force_limits[1]:
            raise InvalidArgumentError("force limits must satisfy F_low < F_upp")
        if not self.stall_tolerance > 0:
            raise InvalidArgumentError("stall tolerance must be positive")

    @classmethod
    def from_problem(cls, problem: SynthesisProblem) -> "HillClimbSettings":
        opt = problem.config.optimizer
        L1, L2 = problem.mesh.domain_size
        return cls(
            mutation_probability=opt.mutation_probability,
            mutation_size=opt.mutation_size,
            center_bounds=center_bounds(problem.mesh, opt.radius_limits[1]),
            radius_limits=tuple(opt.radius_limits),
            force_limits=tuple(opt.force_limits),
            fraction_scale=1.0 / max(L1, L2),
            max_iterations=opt.max_iterations,
            stall_tolerance=opt.stall_tolerance,
            stall_window=opt.stall_window,
            mutate_surfaces=problem.config.contact.mutual_contact,
            mutate_force=opt.optimize_force,
        )


@dataclass
class OptimizationResult:
    best: Candidate
    history: pd.DataFrame
    stop_reason: str
    iterations: int


def _step(value: float, size: float, rng) -> float:
    kappa = rng.random()
    sign = 1.0 if rng.random() < 0.5 else -1.0
    return value + sign * kappa * size


def mutate(design: DesignVector, settings: HillClimbSettings, rng) -> DesignVector:
    """
    Mutate every variable independently with probability pr.

    Continuous variables move by +/- kappa m (f by +/- kappa m / max(L1, L2))
    and are clamped to their bounds; s becomes 1 when kappa < 0.5, else 0.
    Only rng.random() is drawn, in the order x, y, r, s, f per mask and then F.

    Args:
        design: Current design
        settings: Mutation parameters
        rng: numpy Generator (or any object with random())

    Returns:
        New DesignVector
    """
    pr = settings.mutation_probability
    m = settings.mutation_size
    r_min, r_max = settings.radius_limits
    masks: List[Mask] = []

    for mask in design.masks:
        x, y, r, s, f = mask.x, mask.y, mask.r, mask.s, mask.f
        if rng.random() < pr:
            x = _step(x, m, rng)
        if rng.random() < pr:
            y = _step(y, m, rng)
        if rng.random() < pr:
            r = _step(r, m, rng)
        if settings.mutate_surfaces and rng.random() < pr:
            s = 1 if rng.random() < 0.5 else 0
        if rng.random() < pr:
            f = _step(f, m * settings.fraction_scale, rng)
        masks.append(clamp_mask(Mask(x, y, r, s, f), settings.center_bounds, r_min, r_max))

    force = design.force
    if settings.mutate_force and rng.random() < pr:
        force = _step(force, m, rng)
    f_low, f_upp = settings.force_limits
    force = float(min(max(force, f_low), f_upp))
    return DesignVector(masks=tuple(masks), force=force)


def _history_row(iteration: int, incumbent: Candidate, candidate: Candidate, accepted: bool) -> dict:
    diag = candidate.diagnostics
    return {
        "iter": iteration,
        "f_incumbent": incumbent.objective,
        "f_candidate": candidate.objective,
        "accepted": bool(accepted),
        "volume_fraction": candidate.volume_fraction,
        "newton_iters": int(diag.get("newton_iterations", 0)),
        "contact_pairs_active": int(diag.get("contact_pairs_active", 0)),
    }


def hill_climb(
    initial: DesignVector,
    evaluate_fn: Callable[[DesignVector], Candidate],
    settings: HillClimbSettings,
    rng,
    on_iteration: Optional[Callable[[int, Candidate, Candidate, bool], None]] = None
) -> OptimizationResult:
    """
    Mutate -> evaluate -> accept iff strictly better.

    Stops after max_iterations, when the incumbent improved by less than
    stall_tolerance over the last stall_window iterations (0 disables the
    rule), or when target_objective is reached.

    Args:
        initial: Starting design
        evaluate_fn: Design -> Candidate
        settings: Mutation and termination parameters
        rng: numpy Generator
        on_iteration: Called with (iteration, incumbent, candidate, accepted)

    Returns:
        OptimizationResult with one history row per iteration (row 0 is the initial design)
    """
    incumbent = evaluate_fn(initial)
    rows = [_history_row(0, incumbent, incumbent, True)]
    best_trace = [incumbent.objective]
    if on_iteration is not None:
        on_iteration(0, incumbent, incumbent, True)

    stop_reason = "max_iterations"
    iteration = 0
    if settings.target_objective is not None and incumbent.objective <= settings.target_objective:
        stop_reason = "target"
    else:
        for iteration in range(1, settings.max_iterations + 1):
            candidate = evaluate_fn(mutate(incumbent.design, settings, rng))
            accepted = candidate.objective < incumbent.objective
            if accepted:
                incumbent = candidate
            rows.append(_history_row(iteration, incumbent, candidate, accepted))
            best_trace.append(incumbent.objective)
            if on_iteration is not None:
                on_iteration(iteration, incumbent, candidate, accepted)

            if iteration % 100 == 0:
                logger.info("Iteration %d: f = %.6g (V = %.3f)",
                            iteration, incumbent.objective, incumbent.volume_fraction)

            if settings.target_objective is not None and incumbent.objective <= settings.target_objective:
                stop_reason = "target"
                break
            w = settings.stall_window
            if w > 0 and iteration >= w and best_trace[-1 - w] - best_trace[-1] < settings.stall_tolerance:
                stop_reason = "stall"
                logger.warning("Stalled at iteration %d: improvement below %.3g over %d iterations",
                               iteration, settings.stall_tolerance, w)
                break

    history = pd.DataFrame(rows, columns=HISTORY_COLUMNS)
    return OptimizationResult(best=incumbent, history=history, stop_reason=stop_reason, iterations=iteration)


def run(
    problem: SynthesisProblem,
    seed: Optional[int] = None,
    on_iteration: Optional[Callable[[int, Candidate, Candidate, bool], None]] = None,
    on_evaluation: Optional[Callable[[Candidate], None]] = None,
    settings: Optional[HillClimbSettings] = None
) -> OptimizationResult:
    """
    Hill-climb a resolved problem from its initial design.

    Args:
        problem: Resolved problem
        seed: RNG seed (defaults to the problem's seed)
        on_iteration: Progress callback
        on_evaluation: Called with every evaluated candidate (statistics)
        settings: Override of the settings derived from the problem

    Returns:
        OptimizationResult
    """
    settings = settings or HillClimbSettings.from_problem(problem)
    rng = np.random.default_rng(problem.config.seed if seed is None else seed)

    def evaluate_fn(design: DesignVector) -> Candidate:
        candidate = evaluate(design, problem)
        if on_evaluation is not None:
            on_evaluation(candidate)
        return candidate

    logger.info("Hill climber: %d masks, pr = %.3g, m = %.4g, max %d iterations",
                len(problem.initial_design.masks), settings.mutation_probability,
                settings.mutation_size, settings.max_iterations)
    return hill_climb(problem.initial_design, evaluate_fn, settings, rng, on_iteration)
