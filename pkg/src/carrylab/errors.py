"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """An operation would exceed its documented enumeration/memory budget."""


class ConfigError(ValueError):
    """A run or sweep configuration is malformed or inconsistent."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite value.

    step records the first offending time step when known.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step
