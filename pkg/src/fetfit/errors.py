"""Exception types shared across the package."""


class FetfitError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(FetfitError):
    """A compact-model parameter is non-finite or violates a hard invariant."""


class ExtractionError(FetfitError):
    """A curve feature could not be extracted; the message names the feature."""


class ConfigError(FetfitError):
    """Invalid configuration: bad ranges, unknown keys, incompatible settings."""


class DataError(FetfitError):
    """Malformed input data: bad CSV headers, NaN cells, grid mismatches."""


class TrainingDivergedError(FetfitError):
    """Training aborted because the validation loss became non-finite."""
