"""Exception hierarchy for the release model.

The CLI maps these onto stable exit codes: input/validation problems
(:class:`DomainError`, :class:`DataFormatError`) exit 2, mathematical
infeasibility (:class:`InfeasibleError` and subclasses) exits 3, and
:class:`InsufficientDataError` exits 4.
"""


class ModelError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ModelError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DataFormatError(ModelError, ValueError):
    """A configuration file or dataset does not match its schema."""


class InfeasibleError(ModelError):
    """Parameters violate a feasibility bound (for example a Gamma-function
    argument that must stay positive for the requested moment to exist)."""


class DegenerateSizeError(InfeasibleError):
    """The size distribution has zero spread; no finite shape parameter
    reproduces it.  Use the fixed-radius release curve instead."""


class ConvergenceError(InfeasibleError):
    """An iterative solve exhausted its iteration budget."""


class InsufficientDataError(ModelError):
    """Too few usable data points for the requested fit."""


class SupportMismatchError(DomainError):
    """Histogram comparison where the left distribution has mass on a bin
    with zero mass on the right."""
