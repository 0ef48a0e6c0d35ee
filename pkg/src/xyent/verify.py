"""Determinant-level checks.

* ``char_determinant``: D_L(λ) = det(iλI - B_L) by LU, against the
  eigenvalue product (-1)^L ∏(λ² - ν_m²).
* ``dlog_asymptotic``: large-L form of d/dλ ln D_L(λ).
* ``residual_scan``: decay of the difference between the two in L.
* ``doubling_check``: pairing of ν_m around the limiting λ_m.
* ``phi_vs_g``: the factorised scalar symbol φ against g on the circle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor

from .asymptotics import _theta_term, lambda_sequence
from .correlation import build_correlation, majorana_spectrum, symbol_g
from .errors import BranchError, DomainError, NumericError, ProximityError, RegimeError
from .model import (
    EllipticData,
    ModelParams,
    Regime,
    classify,
    cut_geometry,
    elliptic_data,
    _symbol_roots,
)

OMEGA_RADIUS = 0.05
OMEGA_MAX = 100.0
PROXIMITY_TOL = 1e-8
RESIDUAL_FLOOR = 1e-13
CLOSURE_TOL = 1e-6


@dataclass(frozen=True)
class DeterminantSample:
    """ln D_L(λ) (mod 2πi) and its λ-derivative.

    ``log_det`` comes from the LU factorisation and ``log_det_product``
    from the eigenvalue product; ``dlog`` is the eigenvalue sum
    Σ 2λ/(λ² - ν_m²) and ``dlog_trace`` is i·tr((iλI - B)^{-1}).
    """

    lam: complex
    L: int
    log_det: complex
    dlog: complex
    log_det_product: complex
    dlog_trace: complex

    @property
    def relative_difference(self) -> float:
        """|D_LU / D_product - 1|."""
        return abs(cmath.exp(self.log_det - self.log_det_product) - 1.0)


def _lu_logdet(M: np.ndarray) -> complex:
    lu, piv = lu_factor(M, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0):
        raise NumericError("LU factorisation hit an exactly singular pivot")
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    return complex(np.sum(np.log(diag)) + 1j * math.pi * swaps)


def _wrap(z: complex) -> complex:
    # imaginary part into (-π, π]
    return complex(z.real, math.remainder(z.imag, 2.0 * math.pi))


def char_determinant(lam: complex, L: int, params: ModelParams) -> DeterminantSample:
    """D_L(λ) = det(iλI - B_L) by two independent routes.

    Raises
    ------
    ProximityError
        If λ is within 1e-8 of some ±ν_m.
    NumericError
        If LU and the eigenvalue product disagree by more than 1e-6.
    """
    lam = complex(lam)
    B = build_correlation(L, params)
    nu = majorana_spectrum(B).nu
    dist = np.minimum(np.abs(lam - nu), np.abs(lam + nu))
    j = int(np.argmin(dist))
    if dist[j] < PROXIMITY_TOL:
        raise ProximityError(f"lambda={lam!r} is within {dist[j]:.1e} of nu={nu[j]!r}", nu=float(nu[j]))
    M = 1j * lam * np.eye(2 * L) - B.entries
    log_det = _wrap(_lu_logdet(M))
    log_prod = _wrap(1j * math.pi * L + complex(np.sum(np.log(lam * lam - nu * nu + 0j))))
    dlog = complex(np.sum(2.0 * lam / (lam * lam - nu * nu)))
    dlog_trace = complex(1j * np.trace(np.linalg.inv(M)))
    sample = DeterminantSample(lam, L, log_det, dlog, log_prod, dlog_trace)
    if sample.relative_difference > 1e-6:
        raise NumericError(f"LU and product determinants disagree ({sample.relative_difference:.2e})")
    return sample


def _check_omega(lam: complex, data: EllipticData):
    if abs(lam) > OMEGA_MAX:
        raise DomainError(f"|lambda| = {abs(lam):.3g} exceeds {OMEGA_MAX}")
    for end in (1.0, -1.0):
        if abs(lam - end) < OMEGA_RADIUS:
            raise DomainError(f"lambda={lam!r} within {OMEGA_RADIUS} of {end:+.0f}")
    for lm in lambda_sequence(data, 1e-12).lambdas:
        if min(abs(lam - lm), abs(lam + lm)) < OMEGA_RADIUS:
            raise DomainError(f"lambda={lam!r} within {OMEGA_RADIUS} of ±lambda_m = ±{lm!r}")


def dlog_asymptotic(lam: complex, L: int, data: EllipticData) -> complex:
    """-2λL/(1-λ²) plus the L-independent theta-function term."""
    lam = complex(lam)
    _check_omega(lam, data)
    return complex(-2.0 * lam * L / (1.0 - lam * lam) + _theta_term(lam, data))


@dataclass(frozen=True)
class DoublingRow:
    m: int
    nu_a: float
    nu_b: float
    lambda_m: float
    gap: float
    midpoint_error: float


def _ladder_value(m: int, data: EllipticData) -> float:
    x = (m + 0.5 * (1 - data.sigma)) * math.pi
    if math.isinf(data.tau0):
        return 0.0 if x == 0.0 else 1.0
    return math.tanh(x * data.tau0)


def doubling_check(L: int, params: ModelParams, m_max: int = 3) -> list:
    """Pair the finite-L ν around each λ_m, m = 0..m_max.

    With the ν sorted ascending, σ = 0 pairs (ν_{2m}, ν_{2m+1}).  For
    σ = 1 the m = 0 partner of the smallest ν is -ν (λ_0 = 0 is a double
    zero of D_L shared between ±), and m >= 1 pairs (ν_{2m-1}, ν_{2m}).
    On the 1a/1b boundary only the m = 0 row exists.
    """
    if m_max < 0 or L < 2 * m_max + 2:
        raise DomainError(f"L={L} too small for m_max={m_max}; need L >= 2*m_max + 2")
    data = elliptic_data(params)
    if data.boundary:
        m_max = 0
    nu = np.sort(majorana_spectrum(build_correlation(L, params)).nu)
    rows = []
    for m in range(m_max + 1):
        if data.sigma == 1:
            a, b = (-nu[0], nu[0]) if m == 0 else (nu[2 * m - 1], nu[2 * m])
        else:
            a, b = nu[2 * m], nu[2 * m + 1]
        lm = _ladder_value(m, data)
        rows.append(DoublingRow(m, float(a), float(b), lm, float(abs(b - a)), float(abs(0.5 * (a + b) - lm))))
    return rows


@dataclass(frozen=True)
class ResidualReport:
    """|exact - asymptotic| d/dλ ln D_L at each L, and the fitted decay base.

    Points below the 1e-13 floor are flagged ``saturated`` and left out of
    the fit.  ``fitted_rho`` is ``inf`` when fewer than two points remain.
    """

    lam: complex
    L_values: tuple
    residuals: tuple
    fitted_rho: float
    saturated: tuple
    lambda_C: float = field(default=math.nan)

    @property
    def monotone(self) -> bool:
        """Decreasing in L, tolerating one inversion, above the floor."""
        r = [x for x, s in zip(self.residuals, self.saturated) if not s]
        return sum(1 for a, b in zip(r, r[1:]) if b > a) <= 1


def residual_scan(lam: complex, params: ModelParams, L_values) -> ResidualReport:
    data = elliptic_data(params)
    L_values = tuple(int(L) for L in L_values)
    res = []
    for L in L_values:
        exact = char_determinant(lam, L, params).dlog
        res.append(abs(exact - dlog_asymptotic(lam, L, data)))
    saturated = tuple(r < RESIDUAL_FLOOR for r in res)
    pts = [(L, r) for L, r, s in zip(L_values, res, saturated) if not s]
    if len(pts) >= 2:
        x = np.array([p[0] for p in pts], dtype=float)
        y = np.log([p[1] for p in pts])
        slope = np.polyfit(x, y, 1)[0]
        rho = float(math.exp(-slope))
    else:
        rho = math.inf
    try:
        lc = abs(cut_geometry(params).lambda_C)
    except RegimeError:
        lc = math.nan
    return ResidualReport(complex(lam), L_values, tuple(float(r) for r in res), rho, saturated, lc)


@dataclass(frozen=True)
class PhiReport:
    """φ(e^{iθ}) against g(θ) on a uniform θ grid."""

    max_deviation: float
    sign: int
    sign_flips: int
    unit_modulus_error: float
    n_samples: int


def _phi_squared(z, l1: complex, l2: complex):
    c1, c2 = l1.conjugate(), l2.conjugate()
    pref = c1 / l1 if l1 != 0 else 1.0
    return pref * (1.0 - l1 * z) * (1.0 - l2 / z) / ((1.0 - c1 / z) * (1.0 - c2 * z))


def _track(path: np.ndarray, l1: complex, l2: complex, start: complex) -> np.ndarray:
    w = np.sqrt(_phi_squared(path, l1, l2).astype(complex))
    out = np.empty_like(w)
    prev = start
    for i, v in enumerate(w):
        dp, dm = abs(v - prev), abs(v + prev)
        if min(dp, dm) > 0.5 * max(dp, dm):
            raise BranchError(f"square-root branch ambiguous at z={path[i]!r}")
        prev = v if dp <= dm else -v
        out[i] = prev
    return out


def phi_vs_g(params: ModelParams, n_samples: int = 1024) -> PhiReport:
    """Compare φ from the factorised form with the symbol g on |z| = 1.

    φ² is single valued; φ itself is followed by continuity from z = ∞
    along the ray arg z = 3π/4 (which meets no zero or pole of φ² in any
    regime) and then once around the unit circle.  The starting value at
    |z| = 1e6 is the principal root, which tends to the positive root of
    φ²(∞) = conj(λ1/λ2) whenever that limit is positive.  The reported
    deviation is max_θ min(|φ - g|, |φ + g|).
    """
    regime = classify(params)
    if regime.is_critical:
        raise RegimeError(f"phi_vs_g needs off-critical couplings, got {regime.value}")
    roots = _symbol_roots(params, regime)
    l1, l2 = roots.lambda1, roots.lambda2
    if not cmath.isfinite(l2):
        raise RegimeError("factorised symbol degenerates at gamma = 1, h = 0")
    phase = cmath.exp(0.75j * math.pi)
    ray = np.geomspace(1e6, 1.0, 4000) * phase
    start = cmath.sqrt(complex(_phi_squared(ray[0], l1, l2)))
    on_ray = _track(ray, l1, l2, start)
    # circle from arg 3π/4 once around, finely subdivided between samples
    sub = 16
    theta = 0.75 * math.pi + 2.0 * math.pi * np.arange(n_samples * sub + 1) / (n_samples * sub)
    circ = _track(np.exp(1j * theta), l1, l2, on_ray[-1])
    closure = abs(circ[-1] - circ[0])
    if closure > CLOSURE_TOL:
        raise BranchError(f"phi does not return to itself around the circle (gap {closure:.2e})")
    # samples on the uniform grid θ_j = 2πj/n
    theta_s = theta[:-1:sub]
    phi = circ[:-1:sub]
    g = symbol_g(theta_s, params)
    dplus, dminus = np.abs(phi - g), np.abs(phi + g)
    signs = np.where(dplus <= dminus, 1, -1)
    flips = int(np.count_nonzero(signs != np.roll(signs, 1)))
    return PhiReport(
        float(np.max(np.minimum(dplus, dminus))),
        int(np.sign(np.sum(signs)) or signs[0]),
        flips,
        float(np.max(np.abs(np.abs(phi) - 1.0))),
        n_samples,
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    details: dict


LEVELS = {
    "quick": {"det_L": (4, 8), "det_samples": 10, "res_L": (10, 15, 20, 25, 30), "dbl_L": (20, 40), "phi_n": 1024},
    "full": {
        "det_L": tuple(range(1, 11)),
        "det_samples": 10,
        "res_L": (10, 15, 20, 25, 30, 35, 40),
        "dbl_L": (20, 40, 60),
        "phi_n": 4096,
    },
}


def _random_lambdas(rng, nu: np.ndarray, n: int) -> list:
    out = []
    while len(out) < n:
        lam = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        if np.min(np.minimum(np.abs(lam - nu), np.abs(lam + nu))) >= OMEGA_RADIUS:
            out.append(lam)
    return out


def check_determinant(params: ModelParams, L_values, n_samples: int = 10, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for L in L_values:
        nu = majorana_spectrum(build_correlation(L, params)).nu
        for lam in _random_lambdas(rng, nu, n_samples):
            worst = max(worst, char_determinant(lam, L, params).relative_difference)
    return CheckResult("determinant", worst <= 1e-10, {"max_relative_difference": worst})


def check_residual(params: ModelParams, L_values, lam: complex = 2.0) -> CheckResult:
    rep = residual_scan(lam, params, L_values)
    ok = rep.fitted_rho > 1.0 and rep.monotone
    return CheckResult(
        "residual",
        ok,
        {
            "lambda": lam,
            "L": list(rep.L_values),
            "residuals": list(rep.residuals),
            "fitted_rho": rep.fitted_rho,
            "abs_lambda_C": rep.lambda_C,
        },
    )


def check_doubling(params: ModelParams, L_values, m_max: int = 3) -> CheckResult:
    runs = {L: doubling_check(L, params, m_max) for L in L_values}
    Ls = sorted(runs)
    # midpoints approach λ_m and the total splitting shrinks as L grows; single
    # gaps of pairs close to 1 can open up before they close near criticality
    ok = True
    for a, b in zip(Ls, Ls[1:]):
        for ra, rb in zip(runs[a], runs[b]):
            ok &= rb.midpoint_error <= max(ra.midpoint_error, 1e-12)
        ok &= sum(r.gap for r in runs[b]) <= max(sum(r.gap for r in runs[a]), 1e-12)
    last = runs[Ls[-1]]
    return CheckResult(
        "doubling",
        bool(ok),
        {"L": Ls[-1], "gaps": [r.gap for r in last], "midpoint_errors": [r.midpoint_error for r in last]},
    )


def check_phi(params: ModelParams, n_samples: int) -> CheckResult:
    rep = phi_vs_g(params, n_samples)
    ok = rep.max_deviation <= 1e-10 and rep.sign_flips == 0 and rep.unit_modulus_error <= 1e-12
    return CheckResult(
        "phi_vs_g",
        ok,
        {"max_deviation": rep.max_deviation, "sign": rep.sign, "sign_flips": rep.sign_flips},
    )


def run_checks(params: ModelParams, level: str = "quick") -> list:
    """All verification suites at the given level ("quick" or "full")."""
    if level not in LEVELS:
        raise DomainError(f"unknown level {level!r}")
    regime = classify(params)
    if regime.is_critical:
        raise RegimeError(f"verification needs off-critical couplings, got {regime.value}")
    cfg = LEVELS[level]
    results = [check_determinant(params, cfg["det_L"], cfg["det_samples"])]
    results.append(check_residual(params, cfg["res_L"]))
    results.append(check_doubling(params, cfg["dbl_L"]))
    if not cmath.isfinite(_symbol_roots(params, regime).lambda2):
        results.append(CheckResult("phi_vs_g", True, {"skipped": "degenerate factorisation"}))
    else:
        results.append(check_phi(params, cfg["phi_n"]))
    return results
