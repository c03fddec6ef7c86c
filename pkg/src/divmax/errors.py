"""Exception hierarchy shared by every module."""


class DivmaxError(Exception):
    """Base class for all errors raised by divmax."""


class DomainError(DivmaxError, ValueError):
    """An argument lies outside the domain of an operation."""


class SizeError(DivmaxError):
    """A state space or enumeration exceeds the configured limits."""


class ConditioningError(DomainError):
    """Conditioning on an event of probability zero."""


class UnsupportedError(DivmaxError):
    """The requested combination (e.g. non-binary RBM) is not implemented."""
