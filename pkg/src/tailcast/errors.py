"""Exception types shared across the library."""


class TailcastError(Exception):
    """Base class for all library errors."""


class DomainError(TailcastError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ParameterError(TailcastError, ValueError):
    """Invalid distribution or model parameterization."""


class InsufficientDataError(TailcastError):
    """Not enough observations to carry out an estimation."""


class ConvergenceError(TailcastError):
    """An iterative optimizer failed to converge."""

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class InconsistentComponentsError(TailcastError):
    """Mixture component probabilities cannot be made consistent."""


class ShapeError(TailcastError, ValueError):
    """Tensor operands with non-conforming shapes."""


class IngestionError(TailcastError):
    """Malformed or missing input data on load."""


class ConfigurationError(TailcastError, ValueError):
    """Invalid run or split configuration."""


class DivergenceError(TailcastError):
    """Training produced a non-finite loss."""

    def __init__(self, message, batch_index=None):
        super().__init__(message)
        self.batch_index = batch_index
