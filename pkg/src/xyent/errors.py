"""Exception hierarchy.

Each exception carries the CLI exit code it maps to: 1 for bad input or an
unsupported regime, 2 for numerical failures.
"""


class XYEntropyError(Exception):
    exit_code = 2


class DomainError(XYEntropyError, ValueError):
    """Argument outside the domain of the function."""

    exit_code = 1


class RegimeError(DomainError):
    """Operation not defined for the regime of the couplings."""


class ApplicabilityError(RegimeError):
    """Parameters lie outside every window of an asymptotic formula."""


class SingularSymbolError(RegimeError):
    """The symbol numerator vanishes on the unit circle (critical lines)."""


class PoleError(DomainError):
    """Argument sits on a zero of the theta function."""


class ProximityError(DomainError):
    """Spectral parameter too close to an eigenvalue."""

    def __init__(self, message, nu=None):
        super().__init__(message)
        self.nu = nu


class ConvergenceError(XYEntropyError, ArithmeticError):
    """A series, grid or quadrature failed to converge."""

    def __init__(self, message, tau0=None):
        super().__init__(message)
        self.tau0 = tau0


class ResolutionError(ConvergenceError):
    """Fourier grid too coarse to resolve the symbol coefficients."""


class NumericError(ConvergenceError):
    """Eigensolver failure or an out-of-range spectrum."""


class AsymmetryError(NumericError):
    """Spectrum of iB is not symmetric under sign flip."""


class BranchError(NumericError):
    """Continuous square-root branch could not be tracked."""
