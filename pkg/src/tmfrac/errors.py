"""Exception hierarchy shared across the package."""


class TmfracError(Exception):
    """Base class for package errors."""


class DomainError(TmfracError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InputError(TmfracError, ValueError):
    """Malformed input data (NaN samples, bad grid sizes, ...)."""


class PreconditionError(TmfracError, ValueError):
    """A documented precondition does not hold."""


class ConstraintError(TmfracError, ValueError):
    """The constraint radicand ``|u'|^p - nu |u|^p`` came out negative."""


class FunctionalOverflowError(TmfracError, OverflowError):
    """The exponent of the Moser integrand exceeded the safe range."""

    def __init__(self, message, index=None, radius=None):
        super().__init__(message)
        self.index = index
        self.radius = radius


class ConvergenceError(TmfracError, RuntimeError):
    """An iterative solver hit its iteration cap.

    The best iterate (whatever the solver considers its partial result) is
    attached as ``best`` and a short history as ``trace``.
    """

    def __init__(self, message, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace if trace is not None else []
