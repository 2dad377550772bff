"""Exception types raised across the toolkit."""


class DomainError(ValueError):
    """A radius, spin or other parameter lies outside the domain of a formula."""


class SectorError(ValueError):
    """Sector, rank, parity, chart or time-gauge mismatch."""


class ConfigError(ValueError):
    """Configuration could not be parsed or failed validation."""

    def __init__(self, message: str, line: int = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConvergenceError(RuntimeError):
    """Root finding, root tracking or integration did not converge."""

    def __init__(self, message: str, history=None):
        self.history = list(history or [])
        super().__init__(message)


class SingularPairingError(ConvergenceError):
    """The pairing matrix of a leading-order solve is not invertible."""
