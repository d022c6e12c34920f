"""Exception types shared across the package."""

__all__ = ["ConfigError", "DivergenceError"]


class ConfigError(ValueError):
    """Invalid configuration: bad key, malformed value, or infeasible geometry."""


class DivergenceError(RuntimeError):
    """A trajectory left the divergence guard envelope."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t
