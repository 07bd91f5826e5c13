"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Raised when an input fails a construction-time check.

    ``field`` names the offending input when it is known, so file loaders and
    the command line can point at the exact key that was wrong.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class DarkStateError(ArithmeticError):
    """The post-selected final state is (numerically) never reached."""


class GridError(ArithmeticError):
    """The quadrature grid cannot resolve the distribution to tolerance."""
