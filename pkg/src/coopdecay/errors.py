"""Exception types shared across the package."""


class CoopDecayError(Exception):
    """Base class for all package errors."""


class ValidationError(CoopDecayError, ValueError):
    """Invalid input: bad spec fields, malformed config, unnormalized state."""


class DegenerateConfigurationError(CoopDecayError):
    """Disorder resampling failed to produce an admissible configuration."""


class SingularSeparationError(CoopDecayError):
    """Two atoms closer than the minimum admissible separation."""


class DecompositionError(CoopDecayError):
    """Eigendecomposition failed; carries seed info for triage."""

    def __init__(self, message: str, seed: int | None = None,
                 realization_index: int | None = None):
        super().__init__(message)
        self.seed = seed
        self.realization_index = realization_index


class PropagationError(CoopDecayError):
    """Time propagation produced non-finite amplitudes."""


class ConfigError(ValidationError):
    """Configuration text could not be parsed or validated."""
