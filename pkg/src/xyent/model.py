"""Couplings, regime classification and the derived elliptic constants.

The XY chain H = -Σ (1+γ)σˣσˣ + (1-γ)σʸσʸ + hσᶻ is parameterised by the
anisotropy ``gamma`` and the transverse field ``h``.  Everything downstream
(the symbol roots, the modulus k, tau0 and the parity sigma) is a function
of the regime the pair falls into.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError, RegimeError
from .special import elliptic_K

BOUNDARY_TOL = 1e-9


class Regime(str, enum.Enum):
    CASE_1A = "Case1a"
    CASE_1B = "Case1b"
    CASE_2 = "Case2"
    BOUNDARY_1A1B = "Boundary1a1b"
    CRITICAL_FIELD = "CriticalFieldH2"
    CRITICAL_XX = "CriticalXX"

    @property
    def is_critical(self) -> bool:
        return self in (Regime.CRITICAL_FIELD, Regime.CRITICAL_XX)

    @property
    def is_case(self) -> bool:
        return self in (Regime.CASE_1A, Regime.CASE_1B, Regime.CASE_2)

    @property
    def sigma(self) -> int:
        if self.is_critical:
            raise RegimeError(f"parity sigma is undefined on the critical line {self.value}")
        return 0 if self is Regime.CASE_2 else 1

    def __str__(self):
        return self.value


class Method(str, enum.Enum):
    FINITE = "finite"
    SERIES = "series"
    INTEGRAL = "integral"
    CLOSED_FORM = "closed_form"
    CRITICAL_ESTIMATE = "critical_estimate"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the chain, normalised to gamma >= 0 and h >= 0.

    Negative values are mapped to their absolute values: h -> -h is a global
    spin flip and gamma -> -gamma a rotation by π/2 about z, neither of which
    changes the block entropy.
    """

    gamma: float
    h: float

    def __post_init__(self):
        g, h = float(self.gamma), float(self.h)
        if not (math.isfinite(g) and math.isfinite(h)):
            raise DomainError(f"couplings must be finite, got gamma={g!r}, h={h!r}")
        object.__setattr__(self, "gamma", abs(g))
        object.__setattr__(self, "h", abs(h))

    @property
    def regime(self) -> "Regime":
        return classify(self)

    @property
    def near_excluded_line(self) -> bool:
        """True within BOUNDARY_TOL of gamma = 0 or h = 2."""
        return self.gamma <= BOUNDARY_TOL or abs(self.h - 2.0) <= BOUNDARY_TOL


@dataclass(frozen=True)
class EntropyEstimate:
    """Entropy in nats, the method that produced it and an error bound.

    ``value`` is a float, or an ``mpmath.mpf`` for the extended-precision
    paths.
    """

    value: float
    method: Method
    error_bound: float
    regime: Regime


@dataclass(frozen=True)
class SymbolRoots:
    lambda1: complex
    lambda2: complex


@dataclass(frozen=True)
class EllipticData:
    """Modulus, complete integrals, tau0 = K'/K and the parity sigma.

    On the 1a/1b boundary (and for gamma = 0 in Case 2) the modulus is zero
    and ``tau0`` is ``inf``; ``boundary`` flags that situation.
    """

    k: float
    k_prime: float
    K: float
    K_prime: float
    tau0: float
    sigma: int
    regime: Regime
    boundary: bool = False


def classify(params: ModelParams) -> Regime:
    g, h = params.gamma, params.h
    if abs(h - 2.0) <= BOUNDARY_TOL:
        return Regime.CRITICAL_FIELD
    if g <= BOUNDARY_TOL and h < 2.0:
        return Regime.CRITICAL_XX
    if abs(h * h - 4.0 * (1.0 - g) * (1.0 + g)) <= BOUNDARY_TOL:
        return Regime.BOUNDARY_1A1B
    if h > 2.0:
        return Regime.CASE_2
    if h * h > 4.0 * (1.0 - g) * (1.0 + g):
        return Regime.CASE_1A
    return Regime.CASE_1B


def _require(regime: Regime, allowed, what: str):
    if regime not in allowed:
        names = ", ".join(r.value for r in allowed)
        hint = ""
        if regime is Regime.CRITICAL_XX:
            hint = " (XX critical line gamma = 0, h < 2)"
        elif regime is Regime.CRITICAL_FIELD:
            hint = " (critical field h = 2)"
        raise RegimeError(f"{what} is not defined in regime {regime.value}{hint}; needs one of {names}")


CASES = (Regime.CASE_1A, Regime.CASE_1B, Regime.CASE_2)


def symbol_roots(params: ModelParams) -> SymbolRoots:
    """Points lambda1, lambda2 parameterising the factorised symbol.

    In Cases 1a and 2 the roots are real and {lambda2, 1/lambda1} solve
    (1-γ)z² - hz + (1+γ) = 0.  Both are computed from the rationalised
    forms 2(1∓γ)/(h + sqrt(D)), which stay finite at γ = 1.  In Case 1b
    they are complex with lambda2 = 1/conj(lambda1).
    """
    regime = classify(params)
    _require(regime, CASES, "symbol_roots")
    return _symbol_roots(params, regime)


def _symbol_roots(params: ModelParams, regime: Regime) -> SymbolRoots:
    # also covers the 1a/1b boundary, for callers that need the factorisation there
    g, h = params.gamma, params.h
    if regime is Regime.CASE_1B:
        lam1 = complex(h, -math.sqrt(4.0 * (1.0 - g) * (1.0 + g) - h * h)) / (2.0 * (1.0 + g))
        return SymbolRoots(lam1, 1.0 / lam1.conjugate())
    if regime is Regime.BOUNDARY_1A1B:
        # both forms meet here; lambda1 = 0 at (gamma, h) = (1, 0)
        lam1 = h / (2.0 * (1.0 + g))
        return SymbolRoots(complex(lam1), complex(1.0 / lam1 if lam1 else math.inf))
    root = math.sqrt(h * h - 4.0 * (1.0 - g) * (1.0 + g))
    return SymbolRoots(complex(2.0 * (1.0 - g) / (h + root)), complex(2.0 * (1.0 + g) / (h + root)))


@dataclass(frozen=True)
class CutGeometry:
    """End points of the two cuts, labelled A-D as in the factorisation.

    ``by_modulus`` lists the labels in increasing order of |point|.
    """

    points: dict
    by_modulus: tuple

    @property
    def lambda_C(self) -> complex:
        return self.points["C"]


def cut_geometry(params: ModelParams) -> CutGeometry:
    regime = classify(params)
    roots = symbol_roots(params)
    l1, l2 = roots.lambda1, roots.lambda2
    inv = lambda z: 1.0 / z if z != 0 else complex(math.inf)  # noqa: E731
    if regime in (Regime.CASE_1A, Regime.BOUNDARY_1A1B):
        pts = {"A": l1, "B": inv(l2), "C": l2, "D": inv(l1)}
    elif regime is Regime.CASE_1B:
        pts = {"A": l1, "B": inv(l2), "C": inv(l1), "D": l2}
    else:
        pts = {"A": l1, "B": l2, "C": inv(l2), "D": inv(l1)}
    order = tuple(sorted(pts, key=lambda key: abs(pts[key])))
    return CutGeometry(pts, order)


def _moduli(g, h, regime: Regime, sqrt: Callable = math.sqrt):
    """(k, k') for a Case regime, each from its own cancellation-free radicand.

    Works with any number type given the matching ``sqrt``.
    """
    half = h / 2
    if regime is Regime.CASE_1A:
        excess = half * half - (1 - g) * (1 + g)
        return sqrt(excess) / g, sqrt((1 - half) * (1 + half)) / g
    if regime is Regime.CASE_1B:
        deficit = (1 - g) * (1 + g) - half * half
        room = (1 - half) * (1 + half)
        return sqrt(deficit / room), g / sqrt(room)
    denom = sqrt((half - 1) * (half + 1) + g * g)
    return g / denom, sqrt((half - 1) * (half + 1)) / denom


def modulus(params: ModelParams) -> float:
    """Elliptic modulus k; 0 on the 1a/1b boundary."""
    regime = classify(params)
    if regime is Regime.BOUNDARY_1A1B:
        return 0.0
    _require(regime, CASES, "modulus")
    return _moduli(params.gamma, params.h, regime)[0]


def elliptic_data(params: ModelParams) -> EllipticData:
    regime = classify(params)
    if regime is Regime.BOUNDARY_1A1B:
        return EllipticData(0.0, 1.0, math.pi / 2, math.inf, math.inf, 1, regime, boundary=True)
    _require(regime, CASES, "elliptic_data")
    k, kp = _moduli(params.gamma, params.h, regime)
    sigma = regime.sigma
    if k == 0.0:
        # gamma = 0 beyond the critical field: fully polarised product state
        return EllipticData(0.0, 1.0, math.pi / 2, math.inf, math.inf, sigma, regime, boundary=True)
    K = elliptic_K(k, kp)
    K_prime = elliptic_K(kp, k)
    return EllipticData(k, kp, K, K_prime, K_prime / K, sigma, regime)
