"""Exception types shared across the storage, routing, and harness layers."""


class QRouteError(Exception):
    """Base class for all package errors."""


class ParseError(QRouteError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NotFoundError(QRouteError):
    """A node id is absent from the graph / storage tier."""


class PreconditionError(QRouteError):
    """An operation's preconditions were violated (e.g. edge on missing node)."""


class ConfigurationError(QRouteError):
    """Invalid or incomplete run configuration."""


class TransportError(QRouteError):
    """A transport-level failure (socket error, bad frame). Retriable."""


class OptimizerError(QRouteError):
    """The simplex optimizer hit a non-finite objective value."""


class EmbeddingError(QRouteError):
    """Graph embedding is impossible for the given inputs."""
