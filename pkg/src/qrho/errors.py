"""Exception hierarchy shared by all modules.

The CLI maps :class:`PreconditionError` to exit status 1 and
:class:`ConvergenceError` (including :class:`StabilityError`) to exit status 2.
"""


class QrhoError(Exception):
    """Base class for errors raised by this package."""


class PreconditionError(QrhoError, ValueError):
    """An input violates an operation's precondition."""


class AiryRangeError(PreconditionError):
    """Argument outside the range where Airy values are representable."""


class CapabilityError(PreconditionError):
    """Request exceeds a documented capability bound (e.g. polynomial degree)."""


class ConvergenceError(QrhoError, RuntimeError):
    """A numerical procedure did not reach its tolerance.

    Attributes
    ----------
    estimate : best value obtained before giving up
    residual : error estimate or residual attached to ``estimate``
    """

    def __init__(self, message, estimate=None, residual=None):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual


class StabilityError(ConvergenceError):
    """The time stepper produced non-finite or runaway values."""
