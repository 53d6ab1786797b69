"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad flag values, inconsistent hyperparameters."""


class DataError(ValueError):
    """Invalid input data: malformed files, readings off the network, bad shapes."""
