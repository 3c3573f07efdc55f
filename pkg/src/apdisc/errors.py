"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Malformed input: index out of range, universe mismatch, bad shape."""


class DomainError(ValueError):
    """Input violates a mathematical precondition (e.g. point outside domain)."""


class ResourceLimitError(RuntimeError):
    """An enumeration would exceed the configured desk-scale guard."""

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class ConstructionError(RuntimeError):
    """A certificate composition received a misaligned decomposition."""
