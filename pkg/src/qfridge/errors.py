"""Exception types shared across the package."""


class SpecError(ValueError):
    """Invalid machine parameters."""


class StructureError(ValueError):
    """A matrix or state does not have the structure an operation requires."""


class SpectralError(RuntimeError):
    """The spectral route cannot be used; callers should fall back to integration.

    ``stage`` names the failing step and ``condition`` carries the condition
    estimate when one is available.
    """

    def __init__(self, message, *, stage="spectral", condition=None):
        super().__init__(message)
        self.stage = stage
        self.condition = condition


class IntegratorConfigError(ValueError):
    """Integrator step size violates the resolution bound."""


class DivergenceError(ArithmeticError):
    def __init__(self, message, step_index):
        super().__init__(message)
        self.step_index = step_index


class ConfigError(ValueError):
    """Malformed run configuration."""
