"""Exception types shared across the package."""


class DegenerateSpectrum(ValueError):
    """Raised when an operation needs a simple spectrum and the minimum gap is too small."""


class Collision(DegenerateSpectrum):
    """An eigenvalue step left the open Weyl chamber."""


class ModelFailure(RuntimeError):
    """A step model could not advance its state."""


class EigenNonConvergence(ModelFailure):
    pass


class ZeroVector(ValueError):
    pass


class EmptySample(ValueError):
    pass


class ConfigError(ValueError):
    """Bad or missing configuration. ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
