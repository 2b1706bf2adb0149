"""Exception hierarchy shared across the toolkit.

Three branches map onto the CLI exit-code contract: ConfigError -> 2,
DataError -> 3, ModelError -> 4.
"""


class EvmcastError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(EvmcastError):
    """Invalid configuration or arguments (CLI exit code 2)."""


class DataError(EvmcastError):
    """Problem with input data (CLI exit code 3)."""


class ModelError(EvmcastError):
    """Model fitting or prediction failure (CLI exit code 4)."""


# --- data ---------------------------------------------------------------

class MissingColumn(DataError):
    """A required CSV column is absent."""


class ParseError(DataError):
    """A cell failed to parse; message locates row and column."""


class EmptyInput(DataError):
    """An operation received an empty series or file."""


class FailedInvariant(DataError):
    """A data invariant could not be restored under the active policy."""


class AllMissingColumn(DataError):
    """A numeric column has no observed values to impute from."""


class NonFiniteInput(DataError):
    """NaN or infinity where a finite number is required."""


class LengthMismatch(DataError):
    """Paired series have different lengths."""


class ZeroVariance(DataError):
    """Correlation is undefined for a constant series."""


class TooShort(DataError):
    """Series too short for the requested operation."""


# --- config-shaped ------------------------------------------------------

class InvalidWindow(ConfigError):
    """Rolling or sliding window size below 1."""


class TooManyFeatures(ConfigError):
    """Feature count exceeds the exact-enumeration budget; reduce the set."""


# --- models -------------------------------------------------------------

class DegenerateIndices(ModelError):
    """CPI or SPI undefined at the forecast origin."""


class Diverged(ModelError):
    """Optimization encountered a non-finite objective."""


class NotConverged(ModelError):
    """Operation requires a converged model."""


class AnchorMismatch(ModelError):
    """Differencing anchors inconsistent with the requested order."""


class SingularDesign(ModelError):
    """Collinear exogenous regressors."""


class ShapeMismatch(ModelError):
    """Array shape inconsistent with model parameters."""


class EmptyDataset(ModelError):
    """Training dataset has no samples."""


class NonFiniteLoss(ModelError):
    """Training loss went non-finite; try a lower learning rate."""


class MissingFutureExog(ModelError):
    """Forecast needs future values for a feature that cannot be derived."""


class IncomparableReports(ModelError):
    """Evaluation reports were computed on different splits."""
