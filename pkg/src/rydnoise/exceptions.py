"""Exception types shared across the package."""


class RydnoiseError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RydnoiseError):
    """Invalid physical configuration or config-file contents."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class SelectionRuleError(RydnoiseError):
    """Electric-dipole forbidden transition requested."""


class AmbiguousSteadyStateError(RydnoiseError):
    """The Liouvillian null space is degenerate; no unique steady state."""


class IntegrationFailureError(RydnoiseError):
    """Time propagation failed (step-size underflow or tolerance failure)."""


class NumericalError(RydnoiseError):
    """A solve produced an unacceptable residual."""


class VelocityConvergenceError(RydnoiseError):
    """Velocity-grid refinement did not reach the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved
