"""Exception types shared across the package."""


class FockprepError(Exception):
    """Base class for package errors."""


class NumericsError(FockprepError):
    """A numerical computation produced an invalid or inconsistent result."""


class ConvergenceError(NumericsError):
    """An iterative solve failed to converge."""


class GridMismatchError(NumericsError):
    """Two spectra were combined that do not share a grid."""


class ConfigError(FockprepError):
    """A run configuration is malformed or inconsistent."""
