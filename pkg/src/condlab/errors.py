"""Exception hierarchy shared by all condlab modules."""


class CondlabError(Exception):
    """Base class for condlab failures."""


class PreconditionError(CondlabError, ValueError):
    """An argument violates the documented precondition of a routine."""


class LinAlgFailure(CondlabError, RuntimeError):
    """A factorization did not converge."""


class UnsupportedModeError(CondlabError, ValueError):
    """An evaluation mode was requested outside the domain where it applies."""


class OutputAtOriginError(CondlabError, ValueError):
    """Relative condition requested at an output of norm zero."""


class SigmaError(CondlabError):
    """The instance lies on (or numerically next to) the ill-posed set.

    ``gap`` carries the quantity that fell below its threshold, when one exists.
    """

    def __init__(self, msg, gap=None):
        super().__init__(msg)
        self.gap = gap


class AmbiguousRankError(SigmaError):
    """The numerical rank does not separate cleanly at the requested value."""


class DegreeDeficientError(PreconditionError):
    """Leading coefficient of a polynomial is numerically zero."""


class TrackingFailure(CondlabError):
    """A perturbed re-solve could not be matched to the original solution branch."""
