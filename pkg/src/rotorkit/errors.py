"""Exception hierarchy.

Each family carries the CLI exit code it maps to: 1 for configuration
problems, 2 for unreadable or malformed input, 3 for analysis failures.
"""


class RotorkitError(Exception):
    exit_code = 3


class ConfigInvalid(RotorkitError):
    exit_code = 1


class InputError(RotorkitError):
    exit_code = 2


class InputUnreadable(InputError):
    pass


class MalformedRow(InputError):
    pass


class DuplicateDate(InputError):
    pass


class ColumnMissing(InputError):
    pass


class AnalysisError(RotorkitError):
    exit_code = 3


class EmptySeries(AnalysisError):
    pass


class DimensionTooSmall(AnalysisError):
    pass


class OutOfRangeInput(AnalysisError):
    pass


class LengthMismatch(AnalysisError):
    pass


class UnknownMember(AnalysisError):
    pass


class UnknownParent(AnalysisError):
    pass


class DateNotFound(AnalysisError):
    pass


class InsufficientData(AnalysisError):
    pass


class ZeroVariance(AnalysisError):
    pass
