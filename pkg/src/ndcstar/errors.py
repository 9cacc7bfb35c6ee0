"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Operands do not fit together (descriptor, shape or group mismatch)."""


class DomainError(ValueError):
    """A mathematical precondition of an operation is not met."""
