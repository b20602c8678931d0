"""Exception types shared across the package."""


class RatingStatsError(Exception):
    """Base class for all package errors."""


class ValidationError(RatingStatsError, ValueError):
    """Input data or configuration violates a declared constraint."""


class SchemaError(ValidationError):
    """An instrument schema document is malformed."""


class UndefinedCoefficientError(RatingStatsError, ArithmeticError):
    """A coefficient has a zero denominator for the given data (e.g. constant ratings)."""


class UndefinedTestError(RatingStatsError, ArithmeticError):
    """A hypothesis test has no information to work with (e.g. all differences zero)."""


class SingularMatrixError(RatingStatsError, ArithmeticError):
    """A correlation matrix is numerically singular."""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition number {condition:.3g})")
        self.condition = condition
