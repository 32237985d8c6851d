"""Exception types raised across the package."""

import numpy as np


class KsdtError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(KsdtError, ValueError):
    """An argument violates an operation's precondition (shape, index, range)."""


class EmptyDictionaryError(ContractError):
    """The KSD of an empty dictionary is undefined."""


class ConfigError(KsdtError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericError(KsdtError, ArithmeticError):
    """A kernel value, score or Gram sum became non-finite or inconsistent."""

    def __init__(self, message: str, point=None, step: int | None = None):
        self.point = None if point is None else np.array(point, dtype=float)
        self.step = step
        if point is not None:
            message = f"{message} (at point {self.point.tolist()})"
        if step is not None:
            message = f"{message} [step {step}]"
        super().__init__(message)
