"""Exception types shared across the package."""


class DtoptError(Exception):
    """Base class for every error this package raises on purpose."""


class ValidationError(DtoptError):
    """Instance data violates a structural requirement."""


class ParseError(DtoptError):
    """Malformed instance or tree text; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedTreeError(DtoptError):
    """A tree references a key or class that the instance does not define."""


class CostOverflowError(DtoptError):
    """A cost accumulation would exceed the 64-bit budget."""


class ResourceLimitError(DtoptError):
    """The subproblem dictionary would exceed its record cap."""
