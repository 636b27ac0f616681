"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConvergenceError(RuntimeError):
    """An iterative or adaptive numerical procedure failed to converge."""


class ConfigError(ValueError):
    """A scenario configuration document is malformed or invalid."""

    def __init__(self, message, key_path=None):
        self.key_path = key_path
        if key_path:
            message = f"{key_path}: {message}"
        super().__init__(message)
