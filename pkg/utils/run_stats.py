"""
Run Statistics Utility
Counters for candidate evaluations, penalty causes and solver effort
"""

from collections import Counter
from typing import Dict


class RunStatsTracker:
    """
    Track evaluation counts across a run, separated by outcome.
    """

    def __init__(self):
        self.reset()

    def add_evaluation(self, candidate):
        """Add one evaluated candidate."""
        self.evaluations += 1
        diag = candidate.diagnostics
        self.newton_iterations += int(diag.get("newton_iterations", 0))
        self.uzawa_iterations += int(diag.get("uzawa_iterations", 0))
        self.masks_shifted += int(diag.get("masks_shifted", 0))
        if candidate.failure is not None:
            self.penalized[candidate.failure] += 1
        elif diag.get("uzawa_unconverged"):
            self.uzawa_unconverged += 1

    def get_summary(self) -> Dict[str, int]:
        """Get complete evaluation summary."""
        penalized = sum(self.penalized.values())
        return {
            "evaluations": self.evaluations,
            "penalized": penalized,
            "successful": self.evaluations - penalized,
            "penalized_by_cause": dict(sorted(self.penalized.items())),
            "newton_iterations": self.newton_iterations,
            "uzawa_iterations": self.uzawa_iterations,
            "uzawa_unconverged": self.uzawa_unconverged,
            "masks_shifted": self.masks_shifted,
        }

    def reset(self):
        """Reset all counters."""
        self.evaluations = 0
        self.newton_iterations = 0
        self.uzawa_iterations = 0
        self.uzawa_unconverged = 0
        self.masks_shifted = 0
        self.penalized: Counter = Counter()
