# Exceptions raised by the library. The CLI maps them to exit codes.


class FIOHardyError(Exception):
    pass


class StructuralError(FIOHardyError, ValueError):
    """Shapes or grids of the inputs do not fit together."""


class NumericError(FIOHardyError, ValueError):
    """A computed or supplied value is not finite."""


class ConfigurationError(FIOHardyError, ValueError):
    """Bad parameters, bumps or config files."""


class ResolutionError(FIOHardyError, ValueError):
    """The grid is too coarse for the requested object."""


class DomainError(FIOHardyError, ValueError):
    """Argument outside the domain of the operation (zero frequency, bad unit vector, ...)."""


class SingularityError(FIOHardyError, ValueError):
    """Newton iteration for the contact map did not converge."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class EmptySampleError(FIOHardyError, ValueError):
    pass


class ToleranceError(FIOHardyError, AssertionError):
    """An experiment measured a value outside its acceptance window."""
