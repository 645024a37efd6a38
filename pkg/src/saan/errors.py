"""Exception types shared across the package."""


class SaanError(Exception):
    """Base class for all errors raised by this package."""


class ZeroNormError(SaanError):
    """A vector's Euclidean norm is at or below the representable floor."""


class EmptyBatchError(SaanError):
    """An operation that needs at least one sample received none."""


class DimensionMismatchError(SaanError):
    """Vector or matrix dimensions do not agree."""


class InvalidDimensionError(SaanError):
    """Requested feature dimension is too small to be meaningful."""


class NonSquareError(SaanError):
    """Assignment cost matrix is not square."""


class NonFiniteError(SaanError):
    """Assignment cost matrix contains NaN or infinite entries."""


class TooManyClassesError(SaanError):
    """More classes than available centers."""


class UnassignedLabelError(SaanError):
    """A class label has no center assigned to it."""


class EmptyClassError(SaanError):
    """A class has no samples where at least one is required."""


class UnknownClassError(SaanError):
    """A class label cannot be resolved by the fitted model."""


class InvalidSigmaError(SaanError):
    """A standard deviation parameter is not strictly positive."""


class InvalidConfigError(SaanError):
    """A configuration value is missing or out of range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ClassBudgetExceededError(SaanError):
    """Session sampling asked for more classes than the scenario provides."""


class LengthMismatchError(SaanError):
    """Prediction and label sequences differ in length."""


class ManifestHashMismatchError(SaanError):
    """A results file was produced by a different manifest."""
