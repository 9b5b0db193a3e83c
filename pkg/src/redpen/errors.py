"""Exception hierarchy shared across the package."""


class RedpenError(Exception):
    """Base class for all package errors."""


class ParseError(RedpenError):
    """A source document could not be parsed."""


class ValidationError(RedpenError):
    """A parsed document violates a structural invariant."""


class AnchorError(RedpenError):
    """An anchor was applied to the wrong draft."""


class ProviderError(RedpenError):
    """The LLM provider failed (transport, timeout, or unusable payload)."""


class PipelineError(RedpenError):
    """A per-rubric pipeline step failed.

    Carries the rubric id so batch callers can isolate the failure.
    """

    def __init__(self, message: str, rubric_id: str | None = None):
        super().__init__(message)
        self.rubric_id = rubric_id


class ServiceError(RedpenError):
    """A grading-service request was invalid for the current state."""

    def __init__(self, message: str, status_code: int = 400):
        super().__init__(message)
        self.status_code = status_code
