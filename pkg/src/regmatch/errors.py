"""Exception hierarchy shared by every module of the package."""


class RegMatchError(Exception):
    """Base class for all errors raised by regmatch."""


class ConstructionError(RegMatchError):
    """A randomized generator exhausted its retry budget."""


class ParityError(RegMatchError, ValueError):
    """A size or degree parameter has the wrong parity or multiplicity."""


class DomainError(RegMatchError, ValueError):
    """A numeric parameter lies outside its documented range."""


class InvalidMatchingError(RegMatchError, ValueError):
    """An edge set is not a matching of the host graph."""


class NotRegularError(RegMatchError, ValueError):
    """An operation that requires a regular graph received an irregular one."""


class NotBipartiteError(RegMatchError, ValueError):
    """An operation that requires a bipartite graph received a non-bipartite one."""


class TooLargeError(RegMatchError, ValueError):
    """An exact (exponential-time) routine was given an instance above its size limit."""


class NotAugmentingError(RegMatchError, ValueError):
    """A path handed to ``augment`` is not an augmenting path."""


class ProbabilityOverflowError(RegMatchError, ValueError):
    """Selection probabilities at some node sum to more than one."""


class UnfinishedTraceError(RegMatchError, ValueError):
    """A statistic needs every node to have finished, but some did not."""


class SpecViolationError(RegMatchError):
    """A sampled random process breached the bounds it declared."""


class ConfigError(RegMatchError, ValueError):
    """An experiment configuration is malformed; ``field`` names the culprit."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
