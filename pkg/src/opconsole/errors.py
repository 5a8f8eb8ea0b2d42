"""Exception types shared across the console, simulator, and tools.

Every error that can cross the wire has a stable snake_case code so error
envelopes stay readable on the other end of a lossy link.
"""

from __future__ import annotations


class ConsoleError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class ValidationError(ConsoleError):
    code = "validation"


class ParseError(ConsoleError):
    code = "parse"


class ProtocolError(ConsoleError):
    """Structurally valid message with an unknown kind or version."""

    code = "protocol"

    def __init__(self, offending: str, message: str | None = None):
        super().__init__(message or f"unknown kind {offending!r}")
        self.offending = offending


class ServiceUnavailableError(ConsoleError):
    code = "service_unavailable"

    def __init__(self, channel: str):
        super().__init__(f"no provider for service {channel!r}")
        self.channel = channel


class DuplicateError(ConsoleError):
    code = "duplicate"


class NotFoundError(ConsoleError):
    code = "not_found"


class BusyError(ConsoleError):
    code = "busy"


class StateError(ConsoleError):
    """Command not legal in the current state machine phase."""

    code = "state"


class CycleError(ConsoleError):
    code = "cycle"


class FeedbackError(ConsoleError):
    """Toggle feedback extractor returned something unusable."""

    code = "feedback"


class ConfigError(ConsoleError):
    code = "config"


class ScriptError(ConsoleError):
    code = "script"


class DegenerateError(ConsoleError):
    """Corner geometry too close to collinear or a singular solve."""

    code = "degenerate"


class HorizonError(ConsoleError):
    """Point maps to infinity under the homography."""

    code = "horizon"


class UnreachableError(ConsoleError):
    code = "unreachable"


class PermissionDeniedError(ConsoleError):
    """Command outside the session role's capability set."""

    code = "permission"


class IoError(ConsoleError):
    code = "io"


def wire_code(exc: BaseException) -> str:
    """Stable error code for an exception crossing the wire."""
    if isinstance(exc, ConsoleError):
        return exc.code
    return "internal"
