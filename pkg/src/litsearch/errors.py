"""Exception types shared across the package."""


class LitsearchError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(LitsearchError):
    """A file or record could not be parsed.

    Carries the 1-based line number when one is known.
    """

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class RejectionError(ParseError):
    """A record was well-formed but violates a required invariant."""


class IndexingError(LitsearchError):
    """Index construction or lookup failed."""


class FusionError(LitsearchError):
    """Ranked lists could not be combined."""


class ScorerError(LitsearchError):
    """A relevance scorer failed or returned an invalid response."""

    def __init__(self, message: str, batch_index: int | None = None):
        if batch_index is not None:
            message = f"{message} (batch index {batch_index})"
        super().__init__(message)
        self.batch_index = batch_index


class SingleClassError(LitsearchError):
    """Feedback training set contains only one class.

    Callers should fall back to the unmixed (no-feedback) scores.
    """
