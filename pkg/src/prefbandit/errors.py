"""Exception types shared across the package."""


class PrefBanditError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PrefBanditError, ValueError):
    """Invalid parameters or configuration."""


class DomainError(PrefBanditError, ValueError):
    """Inputs outside the domain where a quantity is defined."""


class NumericError(PrefBanditError, ArithmeticError):
    """Numerical failure: non-PD matrices, lost precision, shape mismatch."""


class SolverError(PrefBanditError, RuntimeError):
    """A MAP solve did not converge."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ExperimentError(PrefBanditError, RuntimeError):
    """An agent failed during a run; carries where it happened."""

    def __init__(self, message, seed=None, t=None, agent=None):
        super().__init__(message)
        self.seed = seed
        self.t = t
        self.agent = agent
