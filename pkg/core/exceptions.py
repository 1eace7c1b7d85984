"""
Exceptions Module
Error types raised by the numerical library; the evaluation pipeline turns
most of them into penalized candidates
"""


class SynthesisError(Exception):
    """Base class for every error raised by the synthesizer."""


class InvalidArgumentError(SynthesisError, ValueError):
    """An argument is outside its admissible range."""


class ConfigError(SynthesisError):
    """A problem file is missing, malformed or references unknown entities."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class ElementInversionError(SynthesisError):
    """det F <= 0 at a quadrature point."""

    def __init__(self, element: int, det_f: float):
        self.element = element
        self.det_f = det_f
        super().__init__(f"element {element} inverted (det F = {det_f:.3e})")


class ShapeFunctionError(SynthesisError):
    """Mean value shape functions evaluated on (or too close to) the polygon boundary."""


class NonManifoldBoundaryError(SynthesisError):
    """A boundary node does not have exactly two incident boundary edges."""


class DegenerateProjectionError(SynthesisError):
    """Closest-point projection is undefined (point at a circle center)."""


class ShapeEvaluationError(SynthesisError):
    """A curve cannot be closed, oriented or described."""


class UndefinedInvariantError(SynthesisError):
    """A curve invariant has a zero denominator."""


class SolverDivergenceError(SynthesisError):
    """Load stepping fell below the minimum increment without converging."""
