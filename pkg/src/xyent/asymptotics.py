"""Limiting (L → ∞) block entropy.

Three independent routes are provided for the gapped regimes:

* ``entropy_series``  sums H over the double eigenvalues
  λ_m = tanh((m + (1-σ)/2) π τ₀);
* ``entropy_integral`` integrates the logarithm of a ratio of θ₃ values
  along the real axis;
* ``entropy_closed`` evaluates the elliptic-integral closed forms.

``critical_estimate`` gives the leading logarithmic behaviour near the two
critical lines, and ``critical_fit`` extracts the slope and intercept of
that behaviour from closed-form values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import (
    ApplicabilityError,
    ConvergenceError,
    DomainError,
    NumericError,
)
from .model import (
    CASES,
    EllipticData,
    EntropyEstimate,
    Method,
    ModelParams,
    Regime,
    _moduli,
    _require,
    classify,
    elliptic_data,
)
from .special import log_theta3, theta3_logderiv_values

LN2 = math.log(2.0)
MAX_LADDER = 10**6
GL_NODES = 20
GL_CHECK_NODES = 30
CARDY_WINDOW = 0.5
CARDY_MIN_GAMMA = 0.1
XX_MAX_GAMMA = 0.1


def _h_of_x(x):
    """H(tanh x) for x >= 0, accurate when tanh x is within rounding of 1."""
    x = np.asarray(x, dtype=float)
    u = np.exp(-2.0 * x)
    return np.log1p(u) + 2.0 * x * u / (1.0 + u)


@dataclass(frozen=True)
class AsymptoticSpectrum:
    """Ladder λ_0..λ_M of limiting double eigenvalues."""

    sigma: int
    tau0: float
    lambdas: tuple
    M: int

    @property
    def x(self) -> np.ndarray:
        """Arguments x_m with λ_m = tanh x_m."""
        m = np.arange(len(self.lambdas))
        return (m + 0.5 * (1 - self.sigma)) * math.pi * self.tau0


def lambda_sequence(data: EllipticData, tol: float = 1e-12) -> AsymptoticSpectrum:
    """λ_m = tanh((m + (1-σ)/2) π τ₀) for m = 0..M.

    M is the first index with H(λ_M) < tol·(1 - e^{-2πτ₀}), which makes the
    geometric tail beyond M smaller than ``tol``.  On the 1a/1b boundary
    (τ₀ = ∞) every λ_m with m ≥ 1 equals 1: the result is [0] for σ = 1
    and [] for σ = 0.
    """
    if not 0.0 < tol <= 1e-2:
        raise DomainError(f"tol must lie in (0, 1e-2], got {tol!r}")
    sigma, tau0 = data.sigma, data.tau0
    if data.boundary or math.isinf(tau0):
        lams = (0.0,) if sigma == 1 else ()
        return AsymptoticSpectrum(sigma, math.inf, lams, len(lams) - 1)
    if not tau0 > 0.0:
        raise DomainError(f"tau0 must be positive, got {tau0!r}")
    guard = tol * -math.expm1(-2.0 * math.pi * tau0)
    shift = 0.5 * (1 - sigma)
    lams = []
    m = 0
    while True:
        x = (m + shift) * math.pi * tau0
        lams.append(math.tanh(x))
        if float(_h_of_x(x)) < guard:
            break
        m += 1
        if m > MAX_LADDER:
            raise ConvergenceError(f"eigenvalue ladder exceeds {MAX_LADDER} terms", tau0=tau0)
    return AsymptoticSpectrum(sigma, tau0, tuple(lams), m)


def two_sided_ladder(ladder: AsymptoticSpectrum) -> np.ndarray:
    """λ_m for m ∈ ℤ (truncated), via the odd extension.

    σ = 1: λ_{-m} = -λ_m.  σ = 0: λ_{-1-m} = -λ_m.  With this extension
    Σ_ℤ H(λ_m) equals Σ_ℤ (1 + λ_m) ln(2/(1 + λ_m)).
    """
    lam = np.asarray(ladder.lambdas, dtype=float)
    if ladder.sigma == 1:
        return np.concatenate([-lam[:0:-1], lam])
    return np.concatenate([-lam[::-1], lam])


def entropy_series(params: ModelParams, tol: float = 1e-10, dps: int | None = None) -> EntropyEstimate:
    """S = Σ_{m∈ℤ} H(λ_m), folded by evenness of H.

    σ = 1: H(0) + 2 Σ_{m≥1} H(λ_m).  σ = 0: 2 Σ_{m≥0} H(λ_m).

    Parameters
    ----------
    params : ModelParams
    tol : float
        Truncation tolerance for the tail.
    dps : int, optional
        Evaluate k, K and the sum with mpmath at this many digits; the value
        is then an ``mpmath.mpf``.
    """
    regime = classify(params)
    _require(regime, CASES + (Regime.BOUNDARY_1A1B,), "entropy_series")
    if dps is not None:
        return _entropy_series_mp(params, regime, dps)
    data = elliptic_data(params)
    if data.boundary:
        return EntropyEstimate(LN2 if data.sigma == 1 else 0.0, Method.SERIES, 0.0, regime)
    value, bound = series_from_tau(data.tau0, data.sigma, tol)
    return EntropyEstimate(value, Method.SERIES, bound, regime)


def series_from_tau(tau0: float, sigma: int, tol: float = 1e-10) -> tuple:
    """(S, error bound) of the ladder sum for given τ₀ and σ.

    The series depends on the couplings only through τ₀ and σ, so this also
    serves τ₀ values whose couplings are not representable in double
    precision (τ₀ → 0 at the critical field).
    """
    data = EllipticData(math.nan, math.nan, math.nan, math.nan, tau0, sigma, Regime.CASE_2 if sigma == 0 else Regime.CASE_1A)
    ladder = lambda_sequence(data, min(tol, 1e-2))
    h = _h_of_x(ladder.x)
    if sigma == 1:
        value = LN2 + 2.0 * math.fsum(h[1:])
    else:
        value = 2.0 * math.fsum(h)
    bound = 2.0 * tol + 4.0 * np.finfo(float).eps * (len(h) + 1) * max(value, 1.0)
    return value, bound


def entropy_series_two_sided(params: ModelParams, tol: float = 1e-10) -> float:
    """Σ_{m∈ℤ} (1 + λ_m) ln(2/(1 + λ_m)) over the two-sided ladder."""
    regime = classify(params)
    _require(regime, CASES + (Regime.BOUNDARY_1A1B,), "entropy_series_two_sided")
    data = elliptic_data(params)
    lam = two_sided_ladder(lambda_sequence(data, min(tol, 1e-2)))
    if data.boundary:
        # λ = ±1 terms are not stored; they contribute 0 and 2 ln 1 = 0
        return LN2 * lam.size
    a = 1.0 + lam
    return math.fsum(a * LN2 - xlogy(a, a))


def _entropy_series_mp(params: ModelParams, regime: Regime, dps: int) -> EntropyEstimate:
    import mpmath as mp

    with mp.workdps(dps + 10):
        if regime is Regime.BOUNDARY_1A1B:
            return EntropyEstimate(+mp.log(2), Method.SERIES, 0.0, regime)
        g, h = mp.mpf(params.gamma), mp.mpf(params.h)
        k, kp = _moduli(g, h, regime, sqrt=mp.sqrt)
        sigma = regime.sigma
        if k == 0:
            return EntropyEstimate(mp.mpf(0), Method.SERIES, 0.0, regime)
        tau0 = mp.ellipk(kp * kp) / mp.ellipk(k * k)
        tol = mp.mpf(10) ** (-(dps + 5))
        shift = mp.mpf(1 - sigma) / 2
        total = mp.log(2) if sigma == 1 else mp.mpf(0)
        m = 1 if sigma == 1 else 0
        while True:
            x = (m + shift) * mp.pi * tau0
            u = mp.exp(-2 * x)
            term = mp.log1p(u) + 2 * x * u / (1 + u)
            total += 2 * term
            if term < tol:
                break
            m += 1
            if m > MAX_LADDER:
                raise ConvergenceError("extended-precision ladder did not converge", tau0=float(tau0))
        value = +total
    with mp.workdps(dps):
        return EntropyEstimate(+value, Method.SERIES, float(mp.mpf(10) ** (-dps)), regime)


def _theta_term(lam, data: EllipticData):
    """-(i/π)(1/(1-λ²)) [θ₃'/θ₃(β + iστ₀/2) + θ₃'/θ₃(β - iστ₀/2)], complex λ.

    β = (1/2πi) ln((λ+1)/(λ-1)).  The branch of the logarithm is irrelevant
    because θ₃'/θ₃ has period 1.
    """
    lam = np.asarray(lam, dtype=complex)
    if data.boundary or math.isinf(data.tau0):
        # τ₀ → ∞: the theta quotient reduces to elementary functions
        if data.sigma == 0:
            return np.zeros_like(lam)
        return 2.0 / lam + 2.0 * lam / (1.0 - lam * lam)
    beta = np.log1p(2.0 / (lam - 1.0)) / (2j * math.pi)
    half = 0.5j * data.sigma * data.tau0
    ld = theta3_logderiv_values(beta + half, data.tau0) + theta3_logderiv_values(beta - half, data.tau0)
    return -1j / math.pi / (1.0 - lam * lam) * ld


def s_lambda(lam: float, data: EllipticData) -> float:
    """s(λ) for real λ > 1: the λ-derivative of the limiting ln D_L minus its linear part."""
    lam = float(lam)
    if not lam > 1.0 or lam - 1.0 < 1e-8:
        raise DomainError(f"s_lambda needs lambda > 1 (and not within 1e-8 of 1), got {lam!r}")
    val = complex(_theta_term(lam, data))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise NumericError(f"s(lambda) has imaginary part {val.imag!r}")
    return val.real


def _integrand(t: np.ndarray, data: EllipticData) -> np.ndarray:
    # λ = coth t: β = -it/π, dλ = -csch²t dt
    tau0 = data.tau0
    beta = -1j * t / math.pi
    half = 0.5j * data.sigma * tau0
    f = log_theta3(beta + half, tau0) + log_theta3(beta - half, tau0)
    f = f.real - 2.0 * complex(log_theta3(half, tau0)).real
    return 0.5 * f / np.sinh(t) ** 2


def _gl_panels(edges: np.ndarray, n: int, data: EllipticData) -> float:
    x, w = np.polynomial.legendre.leggauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    t = 0.5 * (b - a) * x + 0.5 * (b + a)
    vals = _integrand(t.ravel(), data).reshape(t.shape)
    return math.fsum((vals * w * 0.5 * (b - a)).ravel())


def _tail_cutoff(tau0: float, tol: float) -> float:
    # ∫_T^∞ of the integrand is below (4T²/(πτ₀) + 4) e^{-2T}
    T = 1.0
    while (4.0 * T * T / (math.pi * tau0) + 4.0) * math.exp(-2.0 * T) > 0.01 * tol:
        T += 0.5
    return T


def entropy_integral(params: ModelParams, tol: float = 1e-10) -> EntropyEstimate:
    """S = (1/2) ∫₁^∞ ln[θ₃(β+στ/2) θ₃(β-στ/2) / θ₃²(στ/2)] dλ.

    The substitution λ = coth t makes β = -it/π exactly, so every θ₃
    argument is purely imaginary and each θ₃ value is real and positive.
    The t-integrand is bounded at 0 and decays like t² e^{-2t}.
    Gauss-Legendre panels of width min(1, πτ₀) are used; the error estimate
    is the difference between 20- and 30-node rules on the same panels.
    """
    regime = classify(params)
    _require(regime, CASES, "entropy_integral")
    data = elliptic_data(params)
    if data.boundary:
        return EntropyEstimate(0.0, Method.INTEGRAL, 0.0, regime)
    tau0 = data.tau0
    T = _tail_cutoff(tau0, tol)
    width = min(1.0, math.pi * tau0)
    for _ in range(6):
        n_panels = max(1, int(math.ceil(T / width)))
        edges = np.linspace(0.0, T, n_panels + 1)
        coarse = _gl_panels(edges, GL_NODES, data)
        fine = _gl_panels(edges, GL_CHECK_NODES, data)
        err = abs(fine - coarse)
        if err <= tol:
            bound = err + 0.01 * tol + 1e-14 * max(1.0, abs(fine))
            return EntropyEstimate(fine, Method.INTEGRAL, bound, regime)
        width *= 0.5
    raise ConvergenceError(f"theta integral did not converge (estimate {err:.2e})", tau0=tau0)


def entropy_closed(params: ModelParams) -> EntropyEstimate:
    """Closed forms in terms of complete elliptic integrals.

    Case 1a/1b:
        S = (1/6)[ln(k²/(16k')) + (1 - k²/2)·4KK'/π] + ln 2
    Case 2:
        S = (1/12)[ln(16/(k²k'²)) + (k² - k'²)·4KK'/π]
    Boundary 1a/1b: S = ln 2.
    """
    regime = classify(params)
    _require(regime, CASES + (Regime.BOUNDARY_1A1B,), "entropy_closed")
    data = elliptic_data(params)
    if data.boundary:
        return EntropyEstimate(LN2 if data.sigma == 1 else 0.0, Method.CLOSED_FORM, 0.0, regime)
    k, kp, K, Kp = data.k, data.k_prime, data.K, data.K_prime
    prod = 4.0 * K * Kp / math.pi
    if data.sigma == 1:
        value = (2.0 * math.log(k) - math.log(16.0) - math.log(kp) + (1.0 - 0.5 * k * k) * prod) / 6.0 + LN2
    else:
        value = (math.log(16.0) - 2.0 * math.log(k) - 2.0 * math.log(kp) + (k - kp) * (k + kp) * prod) / 12.0
    scale = abs(math.log(k)) + abs(math.log(kp)) + prod + 1.0
    bound = 16.0 * np.finfo(float).eps * scale
    return EntropyEstimate(max(value, 0.0), Method.CLOSED_FORM, bound, regime)


def critical_estimate(params: ModelParams) -> EntropyEstimate:
    """Leading logarithmic entropy near a critical line.

    Near h = 2 (|2-h| < 0.5, γ >= 0.1):
        S ≈ -(1/6) ln|2-h| + (1/3) ln 4γ,   error O(δ ln²δ), δ = |2-h|.
    Near γ = 0 (γ < 0.1, h < 2):
        S ≈ -(1/3) ln γ + (1/6) ln(4-h²) + (1/3) ln 2,   error O(γ ln²γ).
    """
    g, h = params.gamma, params.h
    regime = classify(params)
    if regime.is_critical:
        raise ApplicabilityError(f"entropy diverges on the critical line ({regime.value})")
    if abs(2.0 - h) < CARDY_WINDOW and g >= CARDY_MIN_GAMMA:
        d = abs(2.0 - h)
        value = -math.log(d) / 6.0 + math.log(4.0 * g) / 3.0
        bound = d * math.log(d) ** 2
    elif g < XX_MAX_GAMMA and h < 2.0:
        value = -math.log(g) / 3.0 + math.log(4.0 - h * h) / 6.0 + LN2 / 3.0
        bound = g * math.log(g) ** 2
    else:
        raise ApplicabilityError(
            f"(gamma={g}, h={h}) is outside both critical windows: "
            f"|2-h| < {CARDY_WINDOW} with gamma >= {CARDY_MIN_GAMMA}, or gamma < {XX_MAX_GAMMA} with h < 2"
        )
    return EntropyEstimate(value, Method.CRITICAL_ESTIMATE, bound, regime)


def small_tau_estimate(params: ModelParams) -> EntropyEstimate:
    """S ≈ π/(6τ₀) as τ₀ → 0, with error bound e^{-π/τ₀}/τ₀²."""
    regime = classify(params)
    _require(regime, CASES, "small_tau_estimate")
    tau0 = elliptic_data(params).tau0
    if math.isinf(tau0):
        raise ApplicabilityError("small-tau estimate needs finite tau0")
    return EntropyEstimate(math.pi / (6.0 * tau0), Method.CRITICAL_ESTIMATE, math.exp(-math.pi / tau0) / tau0**2, regime)


@dataclass(frozen=True)
class CriticalFit:
    """Least-squares fit S ≈ slope·ln δ + intercept (+ corrections).

    ``kind`` is ``"field"`` (δ = |2-h| at fixed γ) or ``"xx"`` (δ = γ at
    fixed h).  ``leading_slope``/``leading_intercept`` come from the
    two-parameter fit; ``slope``/``intercept`` from the fit that also
    carries the first-order terms δ ln²δ, δ ln δ and δ when
    ``corrected`` is true.
    """

    kind: str
    fixed: float
    deltas: tuple
    values: tuple
    slope: float
    intercept: float
    leading_slope: float
    leading_intercept: float
    expected_slope: float
    expected_intercept: float
    corrected: bool

    @property
    def slope_deviation(self) -> float:
        return abs(self.slope / self.expected_slope - 1.0)

    @property
    def intercept_deviation(self) -> float:
        return abs(self.intercept / self.expected_intercept - 1.0)


def critical_fit(
    kind: str,
    fixed: float,
    window: tuple,
    points: int = 20,
    spacing: str = "linear",
    correction: bool = True,
) -> CriticalFit:
    """Fit closed-form entropies against ln δ across a window.

    Parameters
    ----------
    kind : {"field", "xx"}
        ``"field"``: vary h over ``window`` at γ = ``fixed``.
        ``"xx"``: vary γ over ``window`` at h = ``fixed``.
    window : (lo, hi)
        Range of h (field) or γ (xx).  Must not touch the critical line.
    points : int
    spacing : {"linear", "log"}
        Sampling of the varied coupling (log spacing is in δ).
    correction : bool
        Include δ ln²δ, δ ln δ and δ regressors.
    """
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi) or points < 3:
        raise DomainError(f"bad fit window {window!r} or points={points}")
    if kind == "field":
        if lo <= 2.0 <= hi or fixed < CARDY_MIN_GAMMA:
            raise DomainError("field fit window must stay on one side of h = 2 with gamma >= 0.1")
        dlo, dhi = sorted((abs(2.0 - lo), abs(2.0 - hi)))
        side = 1.0 if lo > 2.0 else -1.0
        to_params = lambda d: ModelParams(fixed, 2.0 + side * d)  # noqa: E731
        expected = (-1.0 / 6.0, math.log(4.0 * fixed) / 3.0)
    elif kind == "xx":
        if lo <= 0.0 or fixed >= 2.0:
            raise DomainError("xx fit needs gamma > 0 and h < 2")
        dlo, dhi = lo, hi
        to_params = lambda d: ModelParams(d, fixed)  # noqa: E731
        expected = (-1.0 / 3.0, math.log(4.0 - fixed * fixed) / 6.0 + LN2 / 3.0)
    else:
        raise DomainError(f"unknown fit kind {kind!r}")
    if dlo <= 1e-9:
        raise DomainError("fit window touches the critical line")
    if spacing == "linear":
        if kind == "field":
            varied = np.linspace(lo, hi, points)
            deltas = np.abs(2.0 - varied)
        else:
            deltas = np.linspace(dlo, dhi, points)
    elif spacing == "log":
        deltas = np.geomspace(dlo, dhi, points)
    else:
        raise DomainError(f"unknown spacing {spacing!r}")
    values = np.array([entropy_closed(to_params(d)).value for d in deltas])
    ld = np.log(deltas)
    lead = np.linalg.lstsq(np.column_stack([ld, np.ones_like(ld)]), values, rcond=None)[0]
    if correction:
        A = np.column_stack([ld, np.ones_like(ld), deltas * ld * ld, deltas * ld, deltas])
        coef = np.linalg.lstsq(A, values, rcond=None)[0]
    else:
        coef = lead
    return CriticalFit(
        kind,
        float(fixed),
        tuple(float(d) for d in deltas),
        tuple(float(v) for v in values),
        float(coef[0]),
        float(coef[1]),
        float(lead[0]),
        float(lead[1]),
        expected[0],
        expected[1],
        bool(correction),
    )
