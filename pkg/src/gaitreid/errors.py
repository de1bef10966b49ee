"""Exception hierarchy shared by every stage of the toolkit.

The CLI maps these onto exit codes: ConfigError -> 2, DataError (and
subclasses) -> 3, ModelCompatibilityError -> 4.
"""


class GaitReidError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(GaitReidError):
    """Invalid or inconsistent pipeline configuration."""


class DataError(GaitReidError):
    """Problem with input data (parsing, schema, coverage, degeneracy)."""


class SchemaError(DataError):
    """CSV header does not match the expected column set."""


class ParseError(DataError):
    """A cell could not be parsed; carries row/column location in the message."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyInputError(DataError):
    """An operation received an empty collection or file."""


class ContractViolationError(DataError):
    """A documented precondition of an operation was violated."""


class DegenerateFrameError(DataError):
    """A frame cannot yield finite features (e.g. zero hip width)."""


class CalibrationCoverageError(DataError):
    """A person seen in a non-reference camera is absent from the reference."""


class DegenerateCalibrationError(DataError):
    """Calibration statistics collapsed (e.g. zero mean height)."""


class MissingFactorError(DataError):
    """A row's camera id has no entry in the correction table."""


class DegenerateLabelError(DataError):
    """Training data does not contain at least two classes."""


class ModelCompatibilityError(GaitReidError):
    """Persisted model does not match the data it is applied to."""
