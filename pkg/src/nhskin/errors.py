class NHSkinError(Exception):
    """Base class for errors raised by this package."""


class NotReducibleError(NHSkinError, ValueError):
    """Couplings are not of the SSH-reducible form."""


class ConfigError(NHSkinError, ValueError):
    """A run configuration failed validation."""


class NumericalError(NHSkinError, RuntimeError):
    """A numerical routine failed; ``diagnostic`` carries partial results."""

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic


class ConvergenceError(NumericalError):
    pass


class IllConditionedError(NumericalError):
    pass


class BasePointError(NumericalError):
    """Winding base point lies on (or too close to) the spectral locus."""
