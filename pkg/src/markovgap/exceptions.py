"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class StructureError(ValueError):
    """Objects are structurally incompatible (wrong algebra, broken invariants)."""


class UnsupportedChannelError(StructureError):
    """No explicit construction exists for this channel representation."""


class NumericalInstabilityError(ArithmeticError):
    """A numerical procedure failed to reach the requested agreement."""


class ConfigError(ValueError):
    """A configuration document failed schema validation.

    ``errors`` holds ``(path, message)`` pairs, one per problem found.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"{path}: {msg}" for path, msg in self.errors]
        super().__init__("invalid config:\n  " + "\n  ".join(lines))
