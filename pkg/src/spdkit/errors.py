"""Exception types raised across spdkit.

Input problems derive from :class:`InputError` (CLI exit code 2); numerical
breakdowns derive from :class:`NumericalError` (CLI exit code 3).
"""


class SpdError(Exception):
    """Base class for every error raised by spdkit."""


class InputError(SpdError, ValueError):
    pass


class NumericalError(SpdError, ArithmeticError):
    pass


class NotSquare(InputError):
    pass


class NotSymmetric(InputError):
    pass


class NotPositiveDefinite(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class DimensionOverflow(InputError):
    pass


class NonPositiveInput(InputError):
    pass


class InvalidParameter(InputError):
    pass


class UnknownLaw(InputError):
    pass


class ParseError(InputError):
    """Malformed bundle document. ``locus`` names the line or field."""

    def __init__(self, message, locus=None):
        self.locus = locus
        if locus is not None:
            message = f"{locus}: {message}"
        super().__init__(message)


class ValidationError(InputError):
    """A bundle matrix failed SPD validation. ``label`` names the item."""

    def __init__(self, message, label=None):
        self.label = label
        if label is not None:
            message = f"item {label!r}: {message}"
        super().__init__(message)


class ConvergenceFailure(NumericalError):
    pass


class Overflow(NumericalError):
    pass


class MaxItersExceeded(NumericalError):
    """Iterative solver ran out of budget; ``report`` holds the partial result."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
