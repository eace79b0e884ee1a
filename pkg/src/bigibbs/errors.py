"""Exception types shared across the package."""


class BiGibbsError(Exception):
    """Base class for all errors raised by this package."""


class DuplicatePoint(BiGibbsError):
    """A point was inserted into a configuration that already contains it."""


class CoincidentPoint(BiGibbsError):
    """Points that must be distinct have exactly equal coordinates."""


class InfeasibleBoundary(BiGibbsError):
    """A frozen boundary configuration violates a hard-core constraint."""


class NotNonnegativeModel(BiGibbsError):
    """The operation needs all potential amplitudes >= 0, but got a negative one."""


class WrongArity(BiGibbsError):
    """A test function with the wrong arity was passed to a verifier."""


class SubwindowNotContained(BiGibbsError):
    """A subwindow extends outside the window that must contain it."""


class ParseError(BiGibbsError):
    """Experiment configuration text could not be parsed."""


class ValidationError(BiGibbsError):
    """Configuration parsed but failed validation.

    ``problems`` lists every issue found, not just the first.
    """

    def __init__(self, problems):
        self.problems = [str(p) for p in problems]
        super().__init__("; ".join(self.problems))
