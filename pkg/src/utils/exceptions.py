"""
Exception hierarchy shared by the numerical modules and the CLI.
"""


class NumericFailure(RuntimeError):
    """Base class for failures of a numerical stage (exit code 3)."""


class NonContractive(NumericFailure):
    """Fixed-point map measured with contraction factor >= 1."""

    def __init__(self, message: str, factor: float = float('nan')):
        super().__init__(message)
        self.factor = factor


class NoConvergence(NumericFailure):
    """Iteration budget exhausted before reaching the tolerance."""

    def __init__(self, message: str, iterations: int = 0, residual: float = float('nan')):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class NearResonance(NumericFailure):
    """Forward operator too ill-conditioned: frequency close to a resonance."""

    def __init__(self, message: str, condition: float = float('nan')):
        super().__init__(message)
        self.condition = condition


class GridMismatch(ValueError):
    """Two fields that must share a grid do not."""


class ConfigError(ValueError):
    """Invalid configuration value or input file (exit code 2)."""
