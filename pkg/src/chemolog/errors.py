class ChemologError(Exception):
    """Base class for all package errors."""


class CoefficientError(ChemologError, ValueError):
    """Bad coefficient spec, negative argument, or failed structural check."""


class SolverDivergenceError(ChemologError):
    """CG hit its iteration cap before reaching the residual target."""

    def __init__(self, message, residual, iterations):
        super().__init__(f"{message} (relative residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class StabilityError(ChemologError):
    """A time step produced a negative density beyond rounding noise."""


class ConfigError(ChemologError, ValueError):
    """Invalid configuration; ``errors`` holds every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


class InsufficientDataError(ChemologError, ValueError):
    pass


class FamilyConstructionError(ChemologError):
    """Root find for a spike amplitude failed to bracket."""
