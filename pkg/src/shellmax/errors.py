"""Exception types shared across the package.

The CLI maps these onto process exit codes: config/parse problems exit 2,
resource-budget refusals exit 3, internal invariant breaches exit 4.
"""


class ShellmaxError(Exception):
    """Base class for all package-specific errors."""


class SpecParseError(ShellmaxError):
    """Malformed group specification; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"col {position}: {message}")
        self.position = position


class ConfigError(ShellmaxError):
    """Invalid run configuration or precondition (e.g. polynomial-growth model
    passed to a suite that requires exponential growth)."""


class ResourceBudgetError(ShellmaxError):
    """An enumeration or window would exceed the configured element budget."""

    def __init__(self, message: str, radius: int | None = None):
        super().__init__(message)
        self.radius = radius


class InvariantBreachError(ShellmaxError):
    """Two independently computed values that must agree exactly did not.

    This is always a bug in the package, never a property of the input.
    """
