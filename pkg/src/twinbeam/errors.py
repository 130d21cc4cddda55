"""Exception hierarchy shared by every module of the package."""


class TwinBeamError(Exception):
    """Base class for all package errors."""


class InvalidArgument(TwinBeamError, ValueError):
    """An argument violates an operation's precondition."""


class NumericalFailure(TwinBeamError, RuntimeError):
    """A numerical procedure failed or produced an undefined quantity."""


class TruncationError(NumericalFailure):
    """Fock-space truncation leaks more probability than allowed."""


class UndefinedQError(NumericalFailure):
    """Mandel Q requested for a detector that sees no light."""


class FitError(NumericalFailure):
    """Least-squares fit did not converge or the data carry no peak."""


class InconsistentWidths(NumericalFailure):
    """Measured width is narrower than the slit contributions it contains."""


class AmbiguousProjection(NumericalFailure):
    """Two candidate modes explain the field almost equally well."""


class UndefinedFringeCount(NumericalFailure):
    """Interferogram carries no intensity."""


class ConfigError(InvalidArgument):
    """Invalid run configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
