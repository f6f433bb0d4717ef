"""Exception hierarchy shared by all pdlaws modules.

Two broad families matter to callers: parameter/usage problems
(:class:`DomainError`, a ``ValueError``) and numerical failures
(:class:`NumericalError` subclasses).  The CLI maps the former to exit
code 2 and the latter to exit code 3.
"""


class PdLawsError(Exception):
    """Base class for all pdlaws errors."""


class DomainError(PdLawsError, ValueError):
    """A parameter or argument lies outside its admissible domain."""


class EnumerationCapError(DomainError):
    """Requested sample size exceeds the exact-enumeration cap."""


class NumericalError(PdLawsError):
    """Base class for numerical failures (series, quadrature, inversion)."""


class SeriesDivergenceError(NumericalError):
    """A series evaluation could not certify the requested tolerance."""


class QuadratureError(NumericalError):
    """An adaptive quadrature failed its internal error estimate."""


class InversionError(NumericalError):
    """A Fourier/Laplace inversion failed its internal error estimate."""


class AtomBudgetError(NumericalError):
    """The jump-atom budget of the trimmed-subordinator sampler is too
    small for the requested accuracy."""


class EmptyBinError(NumericalError):
    """A conditioning bin holds too few draws to form a statistic."""
