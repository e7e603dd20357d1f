"""Exception hierarchy shared by all modules."""


class SRKineticsError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SRKineticsError, ValueError):
    """Invalid rates, graph structure, initial condition or input shape."""


class UnsupportedGraphError(SRKineticsError):
    """The requested solver cannot handle this graph (e.g. pump cycles)."""


class DegenerateFormulaError(SRKineticsError):
    """A closed-form expression is singular at the requested parameters."""


class IntegrationError(SRKineticsError):
    """The ODE integrator failed or violated probability conservation."""


class NumericalFailure(SRKineticsError):
    """A linear solve was singular or too badly conditioned to trust."""
