"""Exceptions raised by the solvers and the run front end."""


class SavifError(Exception):
    """Base class for all package errors."""


class ReprMismatch(SavifError, ValueError):
    """A field was passed in the wrong (physical/spectral) representation."""


class GridMismatch(SavifError, ValueError):
    """Two fields live on different grids."""


class SolveDegenerate(SavifError, ArithmeticError):
    """The scalar update for the auxiliary variable has a vanishing denominator.

    Raised by the second-order stepper when ``|4 - 2*tau*b2|`` drops below the
    guard threshold; in practice this means the step size is too large.
    """

    def __init__(self, message, denominator=None, step=None):
        super().__init__(message)
        self.denominator = denominator
        self.step = step


class SingularStageSystem(SavifError, ArithmeticError):
    """The s-by-s stage system for the auxiliary variable is numerically singular."""


class NonFinite(SavifError, ArithmeticError):
    """NaN/Inf (or overflow) detected in a stepper output."""


class ConfigError(SavifError, ValueError):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
