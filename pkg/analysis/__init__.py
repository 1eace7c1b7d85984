# Analysis module - problem resolution, candidate evaluation, hill climbing and benchmarking
from .problem import SynthesisProblem, build_problem, full_curve
from .evaluation import Analysis, Candidate, evaluate, resolve_material
from .optimizer import HillClimbSettings, OptimizationResult, mutate, hill_climb, run
from .benchmarking import surrogate_objective, run_surrogate_benchmark

__all__ = [
    "SynthesisProblem",
    "build_problem",
    "full_curve",
    "Analysis",
    "Candidate",
    "evaluate",
    "resolve_material",
    "HillClimbSettings",
    "OptimizationResult",
    "mutate",
    "hill_climb",
    "run",
    "surrogate_objective",
    "run_surrogate_benchmark",
]
