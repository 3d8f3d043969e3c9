"""Exception hierarchy.

Every numerical or domain failure derives from :class:`NumericalError`; the
CLI maps those to exit code 2.
"""


class NumericalError(ValueError):
    """Base class for numerical/domain failures."""


class GridMismatchError(NumericalError):
    pass


class InsufficientGridError(NumericalError):
    pass


class EmptyNeighborhoodError(NumericalError):
    """No sample curve receives positive kernel weight."""


class SingularDesignError(NumericalError):
    """Design matrix is rank deficient."""


class IllConditionedDesignError(NumericalError):
    """Condition number of H^T H exceeds the configured cap."""


class DegenerateDesignError(NumericalError):
    """Closed-form weights have a zero denominator, or a builder produced an invalid design."""


class QuadratureError(NumericalError):
    pass


class ExperimentFailedError(NumericalError):
    """Every Monte Carlo replication failed."""


class DegenerateDiagnosticError(NumericalError):
    pass
