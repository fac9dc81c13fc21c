"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: input problems -> 2, data-quality
problems -> 3, numerical non-convergence -> 4.
"""


class EgakitError(Exception):
    """Base class for all toolkit errors."""


class InputError(EgakitError):
    """Malformed or missing user input (files, configs, flags)."""


class DataQualityError(EgakitError):
    """Data is structurally unusable for the requested estimate."""


class ConstantColumnError(DataQualityError):
    """One or more columns carry no variance.

    ``columns`` holds the offending zero-based column indices.
    """

    def __init__(self, columns, message=None):
        self.columns = list(columns)
        if message is None:
            message = f"constant column(s) at index {self.columns}"
        super().__init__(message)


class UndefinedCorrelationError(DataQualityError):
    """A 2x2 table has an empty margin, so no correlation is identified."""


class NotPositiveDefiniteError(EgakitError):
    """A matrix required to be positive definite is not.

    ``minor`` is the 1-based order of the offending leading minor when
    known (Cholesky), else None.
    """

    def __init__(self, message, minor=None):
        self.minor = minor
        super().__init__(message)


class NonConvergenceError(EgakitError):
    """An iterative solver hit its iteration cap.

    ``last_iterate`` carries the final parameter state for diagnostics.
    """

    def __init__(self, message, last_iterate=None):
        self.last_iterate = last_iterate
        super().__init__(message)


class DegeneratePathError(EgakitError):
    """The regularization path collapses (no off-diagonal signal)."""


class InfeasibleModelError(EgakitError):
    """A factor model has negative degrees of freedom."""

