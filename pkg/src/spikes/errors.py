"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigurationError -> 2,
StatisticsError -> 3, NumericalError -> 4.
"""


class ConfigurationError(ValueError):
    """Invalid model parameters or experiment configuration."""


class DomainError(ValueError):
    """State outside the model's domain, or an unreachable level."""


class StepSizeError(ValueError):
    """Euler step too coarse: a Bernoulli parameter left (0, 1)."""


class NumericalError(RuntimeError):
    """Root finding, quadrature, or series evaluation failed."""


class StatisticsError(RuntimeError):
    """Not enough data to form the requested estimate."""
