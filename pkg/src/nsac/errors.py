"""Exception types raised by the simulator."""


class NSACError(Exception):
    """Base class for all simulator errors."""


class InvalidGridError(NSACError, ValueError):
    pass


class InvalidExponentError(NSACError, ValueError):
    pass


class InvalidParamsError(NSACError, ValueError):
    pass


class GridMismatchError(NSACError, ValueError):
    pass


class UnderResolvedModeError(NSACError, ValueError):
    """More Galerkin modes requested than the grid can carry (N > n/4)."""


class MollifierRadiusError(NSACError, ValueError):
    pass


class SolvabilityError(NSACError, ValueError):
    """Right-hand side of a pure Neumann problem has nonzero mean."""


class IncompatibleDataError(NSACError, ValueError):
    pass


class PositivityViolationError(NSACError, ArithmeticError):
    pass


class CFLViolationError(NSACError, ValueError):
    pass


class DegenerateCoefficientError(NSACError, ArithmeticError):
    pass


class DegenerateMassMatrixError(NSACError, ArithmeticError):
    pass


class StepRejectedError(NSACError):
    """Picard iteration did not reach tolerance within the iteration budget."""

    def __init__(self, message, report=None, suggested_dt=None):
        super().__init__(message)
        self.report = report
        self.suggested_dt = suggested_dt
        self.report = report
        self.suggested_dt = suggested_dt


class ConfigError(NSACError, ValueError):
    """Invalid run configuration.  ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
