"""Exception types shared across the toolkit."""


class CorefError(Exception):
    """Base class for every error raised by this package."""


class SpanError(CorefError):
    """A span is malformed or lies outside its document."""


class OverlapError(CorefError):
    """An operation would violate the non-overlap rule."""


class ProtocolError(CorefError):
    """An operation is illegal in the current engine phase or mode."""


class IncompleteStateError(CorefError):
    """A submission-gated operation was attempted on an unfinished annotation."""


class ScriptError(CorefError):
    """A reviewer or onboarding script cannot drive the session."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class FormatError(CorefError):
    """Input text or JSON does not conform to the expected format.

    ``line`` is set for line-oriented inputs (CoNLL), ``path`` (a JSON
    pointer) for JSON documents.
    """

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        super().__init__(message)
        self.line = line
        self.path = path


class MentionSetMismatch(CorefError):
    """Key and response partitions cover different mention sets."""

    def __init__(self, only_key=(), only_response=()):
        self.only_key = sorted(only_key)
        self.only_response = sorted(only_response)
        parts = []
        if self.only_key:
            parts.append("only in key: %s" % self.only_key[:10])
        if self.only_response:
            parts.append("only in response: %s" % self.only_response[:10])
        super().__init__("mention sets differ; " + "; ".join(parts))
