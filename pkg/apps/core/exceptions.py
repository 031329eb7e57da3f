# apps/core/exceptions.py
"""
Error hierarchy for DBNode.

Each error carries the exit code the management commands report, so the CLI
never has to guess how to map a failure.
"""


class DBNodeError(Exception):
    exit_code = 1

    def __init__(self, message="", **context):
        super().__init__(message)
        self.context = context


class ConfigurationError(DBNodeError):
    exit_code = 3


class ConstraintViolation(DBNodeError):
    """Code parameters break one or more of the consortium constraints."""
    exit_code = 4

    def __init__(self, violations):
        self.violations = list(violations)
        names = ", ".join(v.equation for v in self.violations)
        super().__init__(f"code parameters violate {names}: " + "; ".join(
            v.detail for v in self.violations))


class NotFound(DBNodeError):
    exit_code = 5


class FileNotFound(NotFound):
    pass


class ChunkNotFound(NotFound):
    pass


class PermissionDenied(DBNodeError):
    exit_code = 6


class Unrecoverable(DBNodeError):
    exit_code = 7


class UnrecoverableStripe(Unrecoverable):
    pass


class MissingStripe(Unrecoverable):
    pass


class DigestMismatch(Unrecoverable):
    pass


class PlacementImpossible(DBNodeError):
    exit_code = 8


class WriteFailed(DBNodeError):
    exit_code = 9


class DuplicateFile(DBNodeError):
    exit_code = 10


class NotInitialized(DBNodeError):
    exit_code = 11


class CapacityExceeded(DBNodeError):
    exit_code = 9


class TransferFailed(DBNodeError):
    exit_code = 7


class InvalidFileTree(WriteFailed):
    """A file tree that does not match the consortium's code."""
