"""Exception hierarchy shared by every module."""


class ZrlError(Exception):
    """Base class for all errors raised by the package."""


class ConfigurationError(ZrlError, ValueError):
    """Invalid parameters or an inconsistent configuration."""


class DomainError(ZrlError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class TableTooSmallError(ZrlError, ValueError):
    """The prime table does not reach far enough for the request."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) the pole of zeta."""


class PrecisionError(ZrlError, ArithmeticError):
    """A numerical target could not be met.

    ``achieved`` carries the best error estimate reached and ``partial`` any
    partial result, so callers can decide whether to use it anyway.
    """

    def __init__(self, message, achieved=None, partial=None):
        super().__init__(message)
        self.achieved = achieved
        self.partial = partial
