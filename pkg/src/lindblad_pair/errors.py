"""Exception hierarchy.

Hard failures raise; soft physical-consistency violations (Heisenberg,
Schwarz, PSD couplings) are reported in :class:`ValidationReport` objects
instead, because the reference parameter set itself breaks some of them.
"""


class LindbladPairError(Exception):
    """Base class for all package errors."""


class ValidationError(LindbladPairError, ValueError):
    """Input that cannot describe a state at all (non-finite or nonpositive variances)."""


class DegenerateStateError(LindbladPairError, ValueError):
    """Uncertainty product is not positive, so lengths are undefined."""


class SingularKernelError(LindbladPairError, ValueError):
    """A Gaussian kernel needs an inverse that does not exist."""


class ModelViolationError(LindbladPairError, ValueError):
    """Couplings outside the simplified model were supplied to it."""


class NoStationaryStateError(LindbladPairError, ArithmeticError):
    """The stationary linear system is singular (typically: no damping)."""


class UnsupportedParameterError(LindbladPairError, ValueError):
    """Parameters where a closed form has no literal evaluation (e.g. r = 1)."""


class DivergenceError(LindbladPairError, ArithmeticError):
    """Integration produced non-finite values."""

    def __init__(self, tau: float, message: str | None = None):
        self.tau = tau
        super().__init__(message or f"non-finite state encountered at tau={tau:.9g}")


class ConfigError(LindbladPairError, ValueError):
    """Malformed or inconsistent run configuration."""
