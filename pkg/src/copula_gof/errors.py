"""Exception types raised across the package."""


class GofError(Exception):
    """Base class for all package errors."""


class InvalidParameters(GofError, ValueError):
    pass


class DomainError(GofError, ValueError):
    pass


class SupportViolation(GofError, ValueError):
    pass


class DegenerateData(GofError, ValueError):
    pass


class TiesInData(GofError, ValueError):
    pass


class NumericalSingularity(GofError, ArithmeticError):
    pass


class NonConvergence(GofError, RuntimeError):
    pass


class SingularInformation(GofError, ArithmeticError):
    """Partial information matrix not positive definite or too ill-conditioned."""


class QuadratureFailure(GofError, ArithmeticError):
    pass


class GridMismatch(GofError, ValueError):
    """A reference table was built on a different grid than the statistic."""


class EmptyGrid(GofError, ValueError):
    pass
