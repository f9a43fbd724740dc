"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An instance, event, or parameter failed structural validation."""


class GenerationError(RuntimeError):
    """An instance generator exhausted its retry budget."""


class RegimeError(ValueError):
    """An exhaustive operation was asked to run outside its tractable regime."""


class ResolutionError(ValueError):
    """A Monte-Carlo estimate cannot resolve the requested quantity."""
