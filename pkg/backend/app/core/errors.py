"""
errors.py

Exception hierarchy shared by the geometry core, the experiments and the CLI.
The CLI maps usage and configuration errors to exit code 1.
"""


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class UsageError(ToolkitError, ValueError):
    """Raised when a caller violates an operation's precondition."""


class DomainError(ToolkitError, ValueError):
    """Raised when an input lies outside the mathematical domain of an operation."""


class NumericalError(ToolkitError, ArithmeticError):
    """Raised when a solver or quadrature fails; carries the residual."""

    def __init__(self, message: str, residual: float = float("nan")) -> None:
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class ConfigurationError(ToolkitError):
    """Raised for unsupported configurations; ``gate`` names the rule that fired."""

    def __init__(self, message: str, gate: str = "config") -> None:
        super().__init__(f"[{gate}] {message}")
        self.gate = gate
