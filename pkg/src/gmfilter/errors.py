"""Exception types shared across the package."""


class ShapeMismatchError(ValueError):
    """Operands have incompatible dimensions."""


class DegenerateInputError(ValueError):
    """Input is too small or too collapsed for the operation (e.g. a
    sample covariance of fewer than two points)."""


class NumericalError(ArithmeticError):
    """A matrix factorization or state evaluation left the numerically
    valid domain (indefinite covariance, non-finite state, ...)."""


class ContractViolationError(ValueError):
    """A caller-side precondition was violated (e.g. unnormalized weights)."""


class ConfigError(ValueError):
    """An experiment configuration is invalid; the message names the key."""


class IngestError(ValueError):
    """A data file could not be parsed; the message names the line."""
