"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericalError -> 4.  Everything else is a plain bug and propagates.
"""


class SaroptError(Exception):
    """Base class for all package errors."""


class ConfigError(SaroptError):
    """Invalid configuration value or inconsistent option combination."""


class ValidationError(SaroptError):
    """An operation received arguments violating its preconditions."""


class ShapeError(ValidationError):
    """Array shape incompatible with the operation (message names the fix)."""


class DegenerateInputError(ValidationError):
    """Input that makes the operation mathematically undefined (e.g. all-zero SAR)."""


class DataError(SaroptError):
    """Missing, unreadable, or inconsistent data on disk."""


class PairingError(DataError):
    """SAR and optical tile sets do not cover the same coordinates."""

    def __init__(self, message, offending_ids=()):
        super().__init__(message)
        self.offending_ids = list(offending_ids)


class NumericalError(SaroptError):
    """Non-finite value encountered during training or evaluation."""

    def __init__(self, message, snapshot_path=None):
        super().__init__(message)
        self.snapshot_path = snapshot_path
