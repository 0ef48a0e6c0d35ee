"""Block entanglement entropy of the anisotropic XY spin chain.

Finite-block entropies from the Majorana correlation matrix, and the
limiting entropy from a theta-function series, a theta-function integral and
elliptic-integral closed forms.
"""

from .asymptotics import (
    critical_estimate,
    critical_fit,
    entropy_closed,
    entropy_integral,
    entropy_series,
    lambda_sequence,
    s_lambda,
    small_tau_estimate,
)
from .correlation import (
    binary_entropy,
    build_correlation,
    contour_entropy,
    entropy_finite,
    entropy_kernel,
    fourier_blocks,
    majorana_spectrum,
    symbol_g,
)
from .errors import (
    ConvergenceError,
    DomainError,
    RegimeError,
    XYEntropyError,
)
from .model import (
    EllipticData,
    EntropyEstimate,
    Method,
    ModelParams,
    Regime,
    classify,
    cut_geometry,
    elliptic_data,
    modulus,
    symbol_roots,
)
from .special import elliptic_K, theta3, theta3_logderiv, ThetaArgument, ThetaParams
from .verify import char_determinant, dlog_asymptotic, doubling_check, phi_vs_g, residual_scan

__version__ = "0.1.0"
