"""Exception types shared across the package."""


class EcgDynError(Exception):
    """Base class for all package-specific errors."""


class IntegrationDiverged(EcgDynError):
    """A trajectory left the trusted numeric range during integration."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"integration diverged at step {step}")


class ConfigurationError(EcgDynError):
    """A required parameter set, lead, or class entry is missing."""


class NoRhythmError(EcgDynError):
    """The peak detector could not find at least two beats."""


class InsufficientDataError(EcgDynError):
    """Too few usable inputs to estimate a distribution."""


class ParamFileError(EcgDynError):
    """Malformed parameter file; carries the offending line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FitDiverged(EcgDynError):
    """An optimization produced a non-finite objective value."""
