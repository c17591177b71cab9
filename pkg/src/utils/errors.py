"""Error types shared by the simulator, solvers and experiment harness."""

from typing import Any, Optional


class LiquarError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(LiquarError, ValueError):
    """A configuration value is missing, unknown or malformed.

    Attributes:
        key: Dotted path of the offending key (e.g. ``schedule.c_eta``)
    """

    def __init__(self, key: str, message: str):
        self.key = key
        self.detail = message
        super().__init__(f"{key}: {message}")

    def __reduce__(self):
        return type(self), (self.key, self.detail)


class DomainError(LiquarError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class UnstablePolicyError(LiquarError, ValueError):
    """The arrival rate reaches or exceeds the service rate."""

    def __init__(self, lam: float, mu: float, context: str = ""):
        self.lam = lam
        self.mu = mu
        self.context = context
        where = f" ({context})" if context else ""
        super().__init__(
            f"Unstable policy{where}: arrival rate {lam:.6g} >= service rate {mu:.6g}.\n"
            "The queue has no stationary regime; choose a larger service rate "
            "or a higher price."
        )

    def __reduce__(self):
        return type(self), (self.lam, self.mu, self.context)


class FitError(LiquarError):
    """Demand fitting produced no usable parameters.

    Attributes:
        result: The best iterate reached before giving up, if any
    """

    def __init__(self, message: str, result: Optional[Any] = None):
        self.result = result
        super().__init__(message)

    def __reduce__(self):
        return type(self), (self.args[0], self.result)


class ReplicationError(LiquarError):
    """One replication of an experiment failed."""

    def __init__(self, seed: int, cause: BaseException):
        self.seed = seed
        self.cause = cause
        super().__init__(f"Replication with seed {seed} failed: {type(cause).__name__}: {cause}")
