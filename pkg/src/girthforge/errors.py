"""Exception types shared across the package."""


class DigraphFormatError(ValueError):
    """Malformed digraph text; ``lineno`` is 1-based (0 when unknown)."""

    def __init__(self, message, lineno=0):
        self.lineno = lineno
        if lineno:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class DimensionMismatch(ValueError):
    pass


class InvalidColouring(ValueError):
    pass


class NoMajorityColour(ValueError):
    pass


class NotLarge(ValueError):
    pass


class RetriesExhausted(RuntimeError):
    pass


class EnumerationTruncated(RuntimeError):
    """An enumeration hit its cap before finishing."""

    def __init__(self, limit):
        self.limit = limit
        super().__init__(f"enumeration truncated at {limit} results")
