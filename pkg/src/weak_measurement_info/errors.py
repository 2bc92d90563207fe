"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`WeakMeasurementError`. Input problems also derive from ``ValueError`` so
callers that only catch ``ValueError`` keep working.
"""


class WeakMeasurementError(Exception):
    """Base class for all package errors."""


class ValidationError(WeakMeasurementError, ValueError):
    """Input outside the accepted domain (non-Hermitian matrix, η ∉ [0, 1], ...)."""


class ImpossibleOutcomeError(WeakMeasurementError, ValueError):
    """A Kraus branch with zero probability was requested."""


class DegenerateRecordError(WeakMeasurementError, ValueError):
    """A record has zero likelihood under every element of the prior."""


class CapacityError(WeakMeasurementError, ValueError):
    """Exhaustive enumeration would exceed the record-count guard."""


class UnsupportedModelError(WeakMeasurementError, ValueError):
    """An execution backend cannot sample the requested model or prior."""


class IntegratorBlowupError(WeakMeasurementError, RuntimeError):
    """The SME integrator left the Bloch ball by more than the blowup tolerance."""
