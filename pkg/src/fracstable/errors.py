"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter or input lies outside the admissible domain."""


class QuadratureError(ArithmeticError):
    """Numerical integration did not reach the requested accuracy.

    The estimated absolute error is kept on ``error_estimate``.
    """

    def __init__(self, message, error_estimate=float("nan")):
        super().__init__(message)
        self.error_estimate = error_estimate


class EstimationError(ArithmeticError):
    """The closed-form moment estimator produced no usable value."""
