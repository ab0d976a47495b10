"""Exception hierarchy shared by all modules."""


class RephasingError(Exception):
    """Base class for errors raised by :mod:`rephasing`."""


class DomainError(RephasingError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(RephasingError, ValueError):
    """An input object violates its structural invariants."""


class ConfigError(RephasingError, ValueError):
    """A run configuration is incomplete or inconsistent."""


class ConvergenceError(RephasingError, ArithmeticError):
    """A numerical integration did not converge to the requested accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
