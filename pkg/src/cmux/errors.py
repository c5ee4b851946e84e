"""Exception hierarchy."""


class CmuxError(Exception):
    """Base class for all package errors."""


class DimensionError(CmuxError, ValueError):
    """Array shapes do not match the operator or model dimensions."""


class GenerationError(CmuxError):
    """An ensemble could not be generated with the requested rank."""


class UndefinedMetricError(CmuxError, ValueError):
    """A metric is undefined for the input (e.g. coherence of a zero matrix)."""


class DenseCapError(CmuxError):
    """Dense materialization would exceed the configured entry cap."""


class IllPosedError(CmuxError):
    """The least-squares problem is rank deficient."""


class ConstraintInfeasibleError(CmuxError):
    """The lambda continuation never met the residual bound.

    ``report`` holds the last iterate when the solver attached one.
    """

    report = None


class SearchExhaustedError(CmuxError):
    """A minimum-rate search reached the top of its range without success."""


class FormatError(CmuxError, ValueError):
    """A file does not follow the expected on-disk format."""
