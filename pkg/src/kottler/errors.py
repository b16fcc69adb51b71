"""Exception and warning types shared across the package."""

from __future__ import annotations


class KottlerError(Exception):
    """Base class for all package errors."""


class DomainError(KottlerError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class BelowDeSitterError(DomainError):
    """A surface gravity below 1, which no model solution realizes."""


class InputError(KottlerError, ValueError):
    """Malformed or incomplete user input (files, regions, missing data)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ResolutionError(InputError):
    """A sampled profile is too coarse for the requested stencil."""


class SolverError(KottlerError, RuntimeError):
    """A bracketed root search failed to converge.

    Attributes
    ----------
    bracket : tuple of float
        The last bracket ``(lo, hi)`` held when the search stopped.
    """

    def __init__(self, message: str, bracket: tuple[float, float]):
        self.bracket = bracket
        super().__init__(f"{message} (last bracket [{bracket[0]!r}, {bracket[1]!r}])")


class QuadratureError(KottlerError, RuntimeError):
    """Numerical integration failed to reach the requested tolerance.

    Attributes
    ----------
    nodes : int
        Number of integrand evaluations in the final refinement level.
    estimates : tuple of float
        The last two estimates of the integral.
    """

    def __init__(self, message: str, nodes: int, estimates: tuple[float, float]):
        self.nodes = nodes
        self.estimates = estimates
        super().__init__(
            f"{message} after {nodes} nodes; last estimates {estimates[0]!r}, {estimates[1]!r}"
        )


class PoleError(DomainError):
    """Evaluation requested exactly at a pole of a closed-form expression."""


class AmbiguousRootWarning(UserWarning):
    """More than one admissible root was found; the larger one was returned."""
