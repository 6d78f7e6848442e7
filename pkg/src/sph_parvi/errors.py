"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A config value is missing, unknown, or outside its documented domain."""


class CapabilityError(RuntimeError):
    """An operation needs a target capability (score, log-density) that is absent."""


class NumericsError(RuntimeError):
    """The particle state or a derived quantity became non-finite.

    ``particle`` is the index of the first offending particle when known,
    ``iteration`` the run iteration during which the failure occurred.
    """

    def __init__(self, message: str, particle: int | None = None, iteration: int | None = None):
        super().__init__(message)
        self.particle = particle
        self.iteration = iteration
