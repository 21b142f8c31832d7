"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """A physical parameter violates its domain (non-positive length, t > b, ...)."""


class ModelDomainError(ValueError):
    """A state left the region where the mechanism model is defined."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ConvergenceError(RuntimeError):
    """An iterative solve ran out of budget before meeting its tolerance."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


class ElasticaDomainError(ValueError):
    """Load or constraint outside the range the elastica solver accepts."""


class ConfigError(ValueError):
    """Configuration file could not be read, parsed or validated.

    ``problems`` holds every violation found, not just the first one.
    """

    def __init__(self, message, problems=()):
        self.problems = list(problems)
        if self.problems:
            message = message + ":\n" + "\n".join(f"  - {p}" for p in self.problems)
        super().__init__(message)
