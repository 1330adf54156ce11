"""Exception hierarchy shared across the package.

Assumption violations carry the name of the violated assumption so callers
(and the CLI exit-code mapping) can distinguish them from plain numerical
failures.
"""


class GossipTDError(Exception):
    """Base class for all package errors."""


class StructuralError(GossipTDError):
    """Malformed input: wrong shapes, non-stochastic rows, bad arguments."""


class AssumptionViolationError(GossipTDError):
    """A model assumption (A1, A2, A3, A6, or the self-loop condition) fails."""

    def __init__(self, assumption: str, message: str):
        self.assumption = assumption
        super().__init__(f"{assumption}: {message}")


class NumericalError(GossipTDError):
    """A linear solve or residual check failed beyond tolerance."""


class DivergenceError(NumericalError):
    """Iterate weights blew up during a simulation run."""

    def __init__(self, step: int, message: str):
        self.step = step
        super().__init__(f"divergence at step {step}: {message}")
