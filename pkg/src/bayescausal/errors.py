"""Exception types raised across the package."""


class ArgumentError(ValueError):
    """An argument is outside the domain an operation accepts."""


class ParseError(ValueError):
    """A tabular or config file could not be parsed."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class ValidationError(ValueError):
    """A parsed value violates its field's domain."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class InitializationError(RuntimeError):
    """The sampler could not find a starting point with finite log posterior."""
