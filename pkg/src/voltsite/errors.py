"""Exception hierarchy shared by every voltsite module."""


class VoltsiteError(Exception):
    """Base class for all voltsite errors."""


class ContractViolation(VoltsiteError, ValueError):
    """A precondition of an operation was not met by the caller."""


class ValidationError(VoltsiteError):
    """Input data (scenario, config, checkpoint) failed validation.

    ``path`` names the offending field, e.g. ``stations[3].x``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class OutOfExtentError(VoltsiteError, ValueError):
    pass


class NoRouteError(VoltsiteError):
    pass


class GenerationError(VoltsiteError):
    pass


class ConfigurationError(VoltsiteError):
    pass


class InfeasibleError(VoltsiteError):
    pass


class NonFiniteGradientError(VoltsiteError, FloatingPointError):
    pass
