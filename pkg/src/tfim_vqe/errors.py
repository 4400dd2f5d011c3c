class TfimVqeError(Exception):
    """Base class for errors raised by this package."""


class DomainError(TfimVqeError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ContractError(TfimVqeError, ValueError):
    """A caller violated an interface precondition (shapes, lengths, partitions)."""


class CapacityError(TfimVqeError):
    """The requested problem size exceeds a configured capacity cap."""


class UndefinedVarianceError(TfimVqeError, ArithmeticError):
    """The normalized energy variance divides by an energy too close to zero."""


class DegeneracyResolutionError(TfimVqeError):
    """Parity could not be made sharp within a near-degenerate subspace."""


class OptimizationError(TfimVqeError):
    """Every restart of an optimization failed."""


class ConfigError(TfimVqeError, ValueError):
    """Experiment configuration is invalid; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class OracleError(TfimVqeError):
    """An eigensolver result failed its residual check."""
