"""Exception hierarchy.

Domain errors map to CLI exit code 2, convergence errors to 3.
"""

from __future__ import annotations


class QentError(Exception):
    """Base class for all library errors. ``fields`` names the quantities involved."""

    def __init__(self, *fields: str, detail: str | None = None):
        self.fields = tuple(fields)
        self.detail = detail
        msg = ", ".join(fields) if fields else type(self).__name__
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


class DomainError(QentError, ValueError):
    """Invalid parameters; ``fields`` lists every violated invariant."""


class DegenerateSpectrum(DomainError):
    """Eigenvector matrix of the dressed matrix is numerically singular."""


class InfiniteTimescale(DomainError):
    """Re(lambda_1) vanishes, so the entanglement time diverges."""


class InfiniteEntanglement(DomainError):
    """The dominant pole width is zero (or below the grid floor)."""


class PoleOnGrid(DomainError):
    """A pole of the amplitude coincides with an evaluation point."""


class ZeroState(DomainError):
    """The amplitude vanishes identically (no photon is emitted)."""


class UnknownPreset(DomainError):
    pass


class SeedRequired(DomainError):
    pass


class ConvergenceError(QentError, RuntimeError):
    """A discretization failed its self-consistency check."""


class GridTooCoarse(ConvergenceError):
    pass


class NotConverged(ConvergenceError):
    pass


class SliceUnderresolved(ConvergenceError):
    pass


class StepTooLarge(ConvergenceError):
    pass


class NotSaturatedWarning(UserWarning):
    """Emitted mass still growing at the end of a dynamics run."""
