"""Complete elliptic integral of the first kind and the theta function θ₃.

Only a pure-imaginary modulus τ = i·tau0 is supported, so the nome
q = exp(-π·tau0) is real.  The theta series is always summed on a lattice
representative of its argument; the quasi-periodicity multiplier is carried
in log space, so arguments with very large imaginary part do not overflow.

The array functions (``log_theta3``, ``theta3_values``,
``theta3_logderiv_values``) accept numpy arrays and are what the quadrature
code uses.  ``theta3`` and ``theta3_logderiv`` are the scalar, typed entry
points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConvergenceError, DomainError, PoleError

TAIL_TOL = 1e-16
MAX_TERMS = 10**6
POLE_TOL = 1e-10
AGM_MAXITER = 64


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two positive numbers."""
    for _ in range(AGM_MAXITER):
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_K(k: float, k_prime: float | None = None) -> float:
    """Complete elliptic integral of the first kind, as a function of the modulus.

    K(k) = ∫₀¹ dx / sqrt((1 - x²)(1 - k²x²)) = π / (2 AGM(1, k')).

    Parameters
    ----------
    k : float
        Modulus, 0 <= k < 1.  k may round to 1 when ``k_prime`` is given.
    k_prime : float, optional
        Complementary modulus sqrt(1 - k²).  Pass it when it is known
        more accurately than ``k`` itself (k close to 1); otherwise it is
        formed as sqrt((1 - k)(1 + k)).

    Raises
    ------
    DomainError
        If k is outside [0, 1).
    """
    if not 0.0 <= k <= 1.0:
        raise DomainError(f"elliptic_K requires 0 <= k < 1, got k={k!r}")
    if k_prime is None:
        if k == 1.0:
            raise DomainError("elliptic_K diverges at k = 1")
        k_prime = math.sqrt((1.0 - k) * (1.0 + k))
    if not k_prime > 0.0:
        raise DomainError(f"elliptic_K diverges: complementary modulus {k_prime!r}")
    return math.pi / (2.0 * agm(1.0, k_prime))


@dataclass(frozen=True)
class ThetaParams:
    """Modulus τ = i·tau0 of θ₃ and the cached nome."""

    tau0: float
    nome: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.tau0 > 0.0 and math.isfinite(self.tau0)):
            raise DomainError(f"tau0 must be finite and positive, got {self.tau0!r}")
        object.__setattr__(self, "nome", math.exp(-math.pi * self.tau0))


@dataclass(frozen=True)
class ThetaArgument:
    """Argument of θ₃ together with its lattice reduction.

    ``s == reduced_s + shift_n + shift_m * (i*tau0)`` with the reduced
    value in the cell |Re| <= 1/2, |Im| <= tau0/2.
    """

    s: complex
    reduced_s: complex
    shift_m: int
    shift_n: int

    @classmethod
    def reduce(cls, s: complex, params: ThetaParams | float) -> "ThetaArgument":
        tau0 = params.tau0 if isinstance(params, ThetaParams) else float(params)
        r, m, n = _reduce(np.asarray(s, dtype=complex), tau0)
        return cls(complex(s), complex(r), int(m), int(n))


def _reduce(s: np.ndarray, tau0: float):
    m = np.round(s.imag / tau0)
    r = s - 1j * (m * tau0)
    n = np.round(r.real)
    r = r - n
    return r, m, n


def _n_terms(tau0: float, ymax: float, tol: float) -> int:
    # smallest N with exp(-π tau0 N² + 2π ymax N) < tol
    a = math.pi * tau0
    b = 2.0 * math.pi * ymax
    c = math.log(1.0 / tol)
    n = (b + math.sqrt(b * b + 4.0 * a * c)) / (2.0 * a)
    n = int(math.ceil(n)) + 1
    if n > MAX_TERMS:
        raise ConvergenceError(
            f"theta series needs {n} terms (cap {MAX_TERMS}) at tau0={tau0!r}",
            tau0=tau0,
        )
    return n


def _theta_sums(r: np.ndarray, tau0: float, derivative: bool = False):
    """Partial sums of θ₃ (and θ₃') at reduced arguments ``r``."""
    ymax = float(np.max(np.abs(r.imag), initial=0.0))
    n_terms = _n_terms(tau0, ymax, TAIL_TOL)
    while True:
        n = np.arange(-n_terms, n_terms + 1, dtype=float)
        terms = np.exp(-math.pi * tau0 * n * n + 2j * math.pi * r[..., None] * n)
        val = terms.sum(axis=-1)
        der = (2j * math.pi * n * terms).sum(axis=-1) if derivative else None
        smin = float(np.min(np.abs(val), initial=1.0))
        # tail must be small relative to the partial sum, not just to 1
        scale = min(1.0, max(smin, 1e-300))
        if derivative:
            scale /= 2.0 * math.pi * (n_terms + 1)
        needed = _n_terms(tau0, ymax, TAIL_TOL * scale)
        if needed <= n_terms:
            return _near_zero_fix(r, tau0, val, der, derivative)
        n_terms = needed


NEAR_ZERO = 0.25


def _paired_sums(d: np.ndarray, tau0: float, derivative: bool):
    """F(δ) = θ₃(±1/2 + iτ₀/2 + δ) and F'(δ) from the paired series.

    Pairing the terms n and -n-1 gives
    F(δ) = 2i e^{-iπδ} Σ_{n≥0} (-1)^n q^{n(n+1)} sin((2n+1)πδ),
    which keeps full relative accuracy as δ → 0, where the plain series
    cancels down to rounding level.
    """
    a = math.pi * tau0
    ymax = float(np.max(np.abs(d.imag), initial=0.0))
    n = 1
    while a * n * (n + 1) - (2 * n + 1) * math.pi * ymax - math.log(2 * n + 1) < math.log(1e17):
        n += 1
        if n > MAX_TERMS:
            raise ConvergenceError(f"theta series needs more than {MAX_TERMS} terms at tau0={tau0!r}", tau0=tau0)
    k = np.arange(n + 1, dtype=float)
    w = np.where(k % 2 == 0, 1.0, -1.0) * np.exp(-a * k * (k + 1))
    arg = np.pi * (2 * k + 1) * d[..., None]
    S = (w * np.sin(arg)).sum(axis=-1)
    pre = 2j * np.exp(-1j * math.pi * d)
    val = pre * S
    der = None
    if derivative:
        C = (w * np.pi * (2 * k + 1) * np.cos(arg)).sum(axis=-1)
        der = pre * (C - 1j * math.pi * S)
    return val, der


def _near_zero_fix(r: np.ndarray, tau0: float, val, der, derivative: bool):
    # reduced arguments close to a corner (±1/2, ±τ₀/2) of the cell hold a zero
    sx = np.where(r.real >= 0, 1.0, -1.0)
    sy = np.where(r.imag >= 0, 1.0, -1.0)
    d = r - (0.5 * sx + 0.5j * tau0 * sy)
    mask = np.abs(d) <= NEAR_ZERO * min(1.0, tau0)
    if not np.any(mask):
        return val, der
    # lower corners map to upper ones by evenness: θ₃(r) = F(-δ)
    dd = np.where(sy[mask] > 0, d[mask], -d[mask])
    v, dv = _paired_sums(dd, tau0, derivative)
    val = np.array(val, dtype=complex)
    val[mask] = v
    if derivative:
        der = np.array(der, dtype=complex)
        der[mask] = np.where(sy[mask] > 0, dv, -dv)
    return val, der


def _prepare(s, tau0):
    if not (tau0 > 0.0 and math.isfinite(tau0)):
        raise DomainError(f"tau0 must be finite and positive, got {tau0!r}")
    s = np.asarray(s, dtype=complex)
    r, m, _ = _reduce(s, tau0)
    return s, r, m


def log_theta3(s, tau0: float):
    """Complex logarithm of θ₃(s | i·tau0), elementwise.

    The imaginary part is only defined modulo 2π.  Returns ``-inf`` (real
    part) at exact lattice zeros.
    """
    s, r, m = _prepare(s, tau0)
    val, _ = _theta_sums(r, tau0)
    with np.errstate(divide="ignore"):
        out = np.log(val) + math.pi * tau0 * m * m - 2j * math.pi * m * r
    return out if out.ndim else complex(out)


def theta3_values(s, tau0: float):
    """θ₃(s | i·tau0) = Σ exp(-π tau0 n² + 2πi s n), elementwise."""
    s, r, m = _prepare(s, tau0)
    val, _ = _theta_sums(r, tau0)
    out = val * np.exp(math.pi * tau0 * m * m - 2j * math.pi * m * r)
    return out if out.ndim else complex(out)


def _distance_to_zero(r: np.ndarray, tau0: float) -> np.ndarray:
    # nearest zeros of the reduced cell sit at (±1/2, ±tau0/2)
    return np.hypot(np.abs(r.real) - 0.5, np.abs(r.imag) - 0.5 * tau0)


def theta3_logderiv_values(s, tau0: float):
    """θ₃'(s)/θ₃(s), elementwise; raises PoleError on the zero lattice."""
    s, r, m = _prepare(s, tau0)
    dist = _distance_to_zero(r, tau0)
    if np.any(dist < POLE_TOL):
        bad = s.flat[int(np.argmin(dist))]
        raise PoleError(f"theta3 logarithmic derivative has a pole near s={bad!r}")
    val, der = _theta_sums(r, tau0, derivative=True)
    out = der / val - 2j * math.pi * m
    return out if out.ndim else complex(out)


ArgLike = Union[ThetaArgument, complex, float]


def _arg_value(arg: ArgLike) -> complex:
    return arg.s if isinstance(arg, ThetaArgument) else complex(arg)


def theta3(arg: ArgLike, params: ThetaParams) -> complex:
    """θ₃ at a single argument.

    Examples
    --------
    >>> abs(theta3(0.0, ThetaParams(1.0)) - 1.0864348112133080) < 1e-15
    True
    """
    return theta3_values(_arg_value(arg), params.tau0)


def theta3_logderiv(arg: ArgLike, params: ThetaParams) -> complex:
    """θ₃'(s)/θ₃(s) at a single argument."""
    return theta3_logderiv_values(_arg_value(arg), params.tau0)
