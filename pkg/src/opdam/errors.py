"""Exception hierarchy shared by all modules."""


class OpdamError(Exception):
    """Base class for every error raised by this package."""


class PoleError(OpdamError, ValueError):
    """Argument sits on a pole of a Gamma-type factor."""


class AccuracyError(OpdamError, ArithmeticError):
    """A numerical procedure could not reach the requested tolerance."""


class SpectralTailError(AccuracyError):
    """A spectral integral whose tail could not be certified below target.

    ``partial`` holds the value integrated up to the cap, a lower bound for
    nonnegative integrands.
    """

    def __init__(self, message: str, partial):
        super().__init__(message)
        self.partial = partial


class DomainError(OpdamError, ValueError):
    """Input lies outside the domain where the operation is defined."""


class FitError(OpdamError):
    """Constant fitting failed (empty window or no usable samples)."""


class DegenerateInput(OpdamError, ValueError):
    """Input makes the requested quantity meaningless (e.g. a zero norm)."""


class GenerationError(OpdamError):
    """A corpus member failed the finiteness screen."""

    def __init__(self, member: str, reason: str):
        super().__init__(f"corpus member {member!r}: {reason}")
        self.member = member
        self.reason = reason
