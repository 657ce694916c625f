"""Custom exceptions for dialogue state tracking operations."""

from __future__ import annotations


class TrackerError(Exception):
    """Base exception for all tracker-related errors."""


class SchemaError(TrackerError):
    """Raised when a schema document cannot be parsed."""

    def __init__(self, message: str, location: str | None = None) -> None:
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class SchemaValidationError(TrackerError):
    """Raised when a schema or catalog breaks one of its invariants."""


class PromptError(TrackerError):
    """Raised when a prompt cannot be assembled from its inputs."""


class TemplateError(PromptError):
    """Raised when a chat template is unknown or malformed."""


class BackendError(TrackerError):
    """Raised when a completion backend fails."""


class RetryableBackendError(BackendError):
    """Raised when transport failures persist after all retry attempts."""

    def __init__(self, message: str, attempts: int) -> None:
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempts)")


class ProtocolError(BackendError):
    """Raised when a server payload does not follow the completion protocol."""


class FixtureMissingError(BackendError):
    """Raised when the replay store has no entry for a request."""

    def __init__(self, key: str) -> None:
        self.key = key
        super().__init__(f"No recorded completion for request {key}")


class StoreError(BackendError):
    """Raised when the replay store cannot be read or written."""


class DatasetError(TrackerError):
    """Raised when a dialogue dataset is structurally invalid."""


class CoverageError(TrackerError):
    """Raised when a run manifest does not cover every gold turn."""

    def __init__(self, missing: list[str]) -> None:
        self.missing = missing
        super().__init__(f"Run manifest is missing dialogues: {', '.join(missing)}")


class MetricError(TrackerError):
    """Raised when a metric is undefined for its inputs."""


class ExportError(TrackerError):
    """Raised when training data cannot be produced."""


class ConfigurationError(TrackerError):
    """Raised when configuration is invalid or incomplete."""


class FileAccessError(TrackerError):
    """Raised when an input or output file cannot be read or written."""
