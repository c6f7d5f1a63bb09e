"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """An experiment or size configuration is outside the supported range."""


class TopologyError(ValueError):
    """A gate placement violates the 1D nearest-neighbor chain."""


class NumericError(RuntimeError):
    """A numerical routine failed to meet its accuracy bound."""
