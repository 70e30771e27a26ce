"""Exception types shared across the package."""


class ConfigError(Exception):
    """Invalid or refused configuration (bad parameters, under-resolved grids)."""


class NumericalError(RuntimeError):
    """Evaluation produced non-finite or otherwise unusable numbers."""
