"""
Exception hierarchy shared by the library modules and the command line.

Each class carries the process exit code the CLI maps it to.
"""

from typing import Optional


class PathCalError(Exception):
    """Base class for every error raised by the toolkit"""

    exit_code = 1


class UsageError(PathCalError):
    """Bad arguments, empty inputs, mismatched series"""

    exit_code = 2


class ConfigError(UsageError):
    """Unreadable or invalid site configuration"""


class ModelDomainError(PathCalError):
    """A model was evaluated outside its mathematical domain"""

    exit_code = 3

    def __init__(self, message: str, distance_m: Optional[float] = None):
        super().__init__(message)
        self.distance_m = distance_m


class ParseError(PathCalError):
    """Malformed measurement CSV"""

    exit_code = 4

    def __init__(self, message: str, row: Optional[int] = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class DegenerateDataError(PathCalError):
    """Too little data to fit or score anything"""

    exit_code = 5
