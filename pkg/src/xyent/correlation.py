"""Finite-block Majorana correlation matrix and its exact entropy.

The 2L×2L matrix B_L is block Toeplitz with 2×2 blocks

    Π_l = [[0, g_l], [-g_{-l}, 0]],

where g_l are the Fourier coefficients of the unimodular symbol
g(θ) = (cos θ - iγ sin θ - h/2) / |cos θ - iγ sin θ - h/2|.  The L
nonnegative eigenvalues ν_m of iB_L give S_L = Σ H(ν_m).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import xlogy

from .errors import (
    AsymmetryError,
    DomainError,
    NumericError,
    ResolutionError,
    SingularSymbolError,
)
from .model import EntropyEstimate, Method, ModelParams, Regime, classify

SYMBOL_ZERO_TOL = 1e-13
COEFF_TOL = 1e-13
IMAG_TOL = 1e-12
MIN_GRID = 512
MAX_GRID = 2**22
PAIRING_TOL = 1e-8
OVERSHOOT_TOL = 1e-8


def symbol_g(theta, params: ModelParams):
    """Unimodular symbol g(θ); accepts scalars or arrays."""
    theta = np.asarray(theta, dtype=float)
    num = np.cos(theta) - 0.5 * params.h - 1j * params.gamma * np.sin(theta)
    mag = np.abs(num)
    if np.any(mag < SYMBOL_ZERO_TOL):
        bad = float(theta.flat[int(np.argmin(mag))])
        raise SingularSymbolError(
            f"symbol numerator vanishes at theta={bad!r} (gamma={params.gamma}, h={params.h})"
        )
    out = num / mag
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class FourierBlock:
    """Coefficients g_l and g_{-l} for one block index l >= 0."""

    l: int
    g_plus: float
    g_minus: float

    def pi(self) -> np.ndarray:
        """Π_l."""
        return np.array([[0.0, self.g_plus], [-self.g_minus, 0.0]])

    def pi_negative(self) -> np.ndarray:
        """Π_{-l} (equal to -Π_lᵀ)."""
        return np.array([[0.0, self.g_minus], [-self.g_plus, 0.0]])


def _dft_coefficients(params: ModelParams, n_grid: int) -> np.ndarray:
    theta = 2.0 * math.pi * np.arange(n_grid) / n_grid
    return np.fft.fft(symbol_g(theta, params)) / n_grid


def _take(coeffs: np.ndarray, l_max: int) -> np.ndarray:
    """Coefficients for l = -l_max..l_max from a length-N DFT."""
    idx = np.arange(-l_max, l_max + 1) % coeffs.size
    return coeffs[idx]


def _symbol_breakpoints(params: ModelParams) -> list:
    """Angles in [0, 2π) where the symbol numerator vanishes."""
    g, h = params.gamma, params.h
    if abs(h - 2.0) <= 1e-9:
        return [0.0]
    if g <= 1e-9 and h < 2.0:
        kf = math.acos(h / 2.0)
        return [kf, 2.0 * math.pi - kf]
    return []


def _piecewise_coefficients(params: ModelParams, l_max: int, n_nodes: int) -> np.ndarray:
    # Gauss-Legendre on each interval between symbol discontinuities
    cuts = sorted(_symbol_breakpoints(params))
    edges = [0.0] + cuts + [2.0 * math.pi] if cuts[0] > 0.0 else cuts + [2.0 * math.pi]
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    ls = np.arange(-l_max, l_max + 1)
    out = np.zeros(ls.size, dtype=complex)
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0.0:
            continue
        theta = 0.5 * (b - a) * x + 0.5 * (b + a)
        vals = symbol_g(theta, params) * (0.5 * (b - a)) * w
        out += np.exp(-1j * np.outer(ls, theta)) @ vals
    return out / (2.0 * math.pi)


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def fourier_coefficients(l_max: int, params: ModelParams, n_grid: int | None = None) -> np.ndarray:
    """Real coefficients g_l for l = -l_max..l_max (array of length 2 l_max + 1).

    Off the critical lines the symbol is analytic in a ring around the unit
    circle and the DFT on ``n_grid`` points is spectrally accurate.  The
    grid is checked against its doubling; with ``n_grid=None`` it is refined
    until the two agree to 1e-13.  On a critical line the symbol jumps, so
    the coefficients are integrated piecewise between the jumps instead.
    """
    if l_max < 0:
        raise DomainError(f"l_max must be >= 0, got {l_max}")
    regime = classify(params)
    if regime.is_critical:
        n = max(64, 2 * l_max + 64)
        coarse = _piecewise_coefficients(params, l_max, n)
        fine = _piecewise_coefficients(params, l_max, 2 * n)
        if np.max(np.abs(fine - coarse)) > COEFF_TOL:
            raise ResolutionError("piecewise quadrature of the symbol did not converge")
    elif n_grid is not None:
        if n_grid < 4 * l_max or n_grid & (n_grid - 1):
            raise DomainError(f"n_grid must be a power of two >= 4*l_max, got {n_grid}")
        coarse = _take(_dft_coefficients(params, n_grid), l_max)
        fine = _take(_dft_coefficients(params, 2 * n_grid), l_max)
        if np.max(np.abs(fine - coarse)) > COEFF_TOL:
            raise ResolutionError(
                f"symbol coefficients not resolved on {n_grid} points (gamma={params.gamma}, h={params.h})"
            )
    else:
        n = _next_pow2(max(MIN_GRID, 8 * (l_max + 1)))
        coarse = _take(_dft_coefficients(params, n), l_max)
        while True:
            fine = _take(_dft_coefficients(params, 2 * n), l_max)
            if np.max(np.abs(fine - coarse)) <= COEFF_TOL:
                break
            n *= 2
            if n > MAX_GRID:
                raise ResolutionError(
                    f"symbol coefficients not resolved on {MAX_GRID} points; too close to a critical line"
                )
            coarse = fine
    if np.max(np.abs(fine.imag), initial=0.0) > IMAG_TOL:
        raise NumericError("symbol Fourier coefficients are not real")
    return fine.real


def fourier_blocks(l_max: int, params: ModelParams, n_grid: int | None = None) -> list:
    """FourierBlock for l = 0..l_max."""
    c = fourier_coefficients(l_max, params, n_grid)
    return [FourierBlock(l, float(c[l_max + l]), float(c[l_max - l])) for l in range(l_max + 1)]


@dataclass(frozen=True)
class CorrelationMatrix:
    L: int
    entries: np.ndarray

    def block(self, j: int, k: int) -> np.ndarray:
        return self.entries[2 * j : 2 * j + 2, 2 * k : 2 * k + 2]


def _assemble(L: int, coeff) -> np.ndarray:
    """B_L from a callable/array giving g_l at integer offsets l in (-L, L)."""
    d = np.subtract.outer(np.arange(L), np.arange(L))
    B = np.zeros((2 * L, 2 * L))
    B[0::2, 1::2] = coeff[d + L - 1]
    B[1::2, 0::2] = -coeff[-d + L - 1]
    return B


def build_correlation(L: int, params: ModelParams) -> CorrelationMatrix:
    if L < 1:
        raise DomainError(f"block length must be >= 1, got {L}")
    B = _assemble(L, fourier_coefficients(L - 1, params))
    B.setflags(write=False)
    return CorrelationMatrix(L, B)


@dataclass(frozen=True)
class MajoranaSpectrum:
    """The L values ν_m in [0, 1], sorted descending."""

    L: int
    nu: np.ndarray
    pairing_residual: float
    eigenvalues: np.ndarray


def majorana_spectrum(B: CorrelationMatrix) -> MajoranaSpectrum:
    L = B.L
    skew = float(np.max(np.abs(B.entries + B.entries.T), initial=0.0))
    if skew > 1e-12:
        raise AsymmetryError(f"correlation matrix is not antisymmetric (residual {skew:.3e})")
    try:
        w = np.linalg.eigvalsh(1j * B.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    # w ascending; ± pairs sit symmetrically about the middle
    upper, lower = w[L:], -w[:L][::-1]
    residual = float(np.max(np.abs(upper - lower)))
    if residual > PAIRING_TOL:
        raise AsymmetryError(f"spectrum of iB is not ± paired (residual {residual:.3e})")
    nu = 0.5 * (upper + lower)
    if nu.max() > 1.0 + OVERSHOOT_TOL:
        raise NumericError(f"eigenvalue {nu.max()!r} of iB exceeds 1")
    nu = np.clip(nu, 0.0, 1.0)[::-1].copy()
    nu.setflags(write=False)
    w.setflags(write=False)
    return MajoranaSpectrum(L, nu, residual, w)


def entropy_kernel(x, nu):
    """e(x, ν) = -((x+ν)/2) ln((x+ν)/2) - ((x-ν)/2) ln((x-ν)/2), with 0 ln 0 = 0.

    e(1, ν) is the binary entropy H(ν) of one Majorana pair.
    """
    x = np.asarray(x, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if np.any(np.abs(nu) > x):
        raise DomainError("entropy_kernel requires |nu| <= x")
    p, q = 0.5 * (x + nu), 0.5 * (x - nu)
    out = -xlogy(p, p) - xlogy(q, q)
    return out if out.ndim else float(out)


def binary_entropy(nu):
    return entropy_kernel(1.0, nu)


def _perturbation_bound(nu: np.ndarray, delta: float) -> float:
    h0 = binary_entropy(nu)
    up = binary_entropy(np.clip(nu + delta, 0.0, 1.0))
    dn = binary_entropy(np.clip(nu - delta, 0.0, 1.0))
    return float(np.sum(np.maximum(np.abs(up - h0), np.abs(dn - h0))))


def entropy_finite(L: int, params: ModelParams, dps: int | None = None) -> EntropyEstimate:
    """Exact entropy S_L of a block of L spins.

    Parameters
    ----------
    L : int
        Block length.
    params : ModelParams
    dps : int, optional
        Decimal digits for an mpmath computation of the coefficients and the
        eigenvalues.  Off-critical couplings only.  The returned value is
        then an ``mpmath.mpf``.
    """
    regime = classify(params)
    if dps is not None:
        return _entropy_finite_mp(L, params, regime, dps)
    B = build_correlation(L, params)
    ms = majorana_spectrum(B)
    value = float(np.sum(binary_entropy(ms.nu)))
    norm = float(np.max(np.abs(B.entries), initial=0.0)) * 2 * L
    delta = max(ms.pairing_residual, 8.0 * np.finfo(float).eps * max(1.0, norm))
    return EntropyEstimate(value, Method.FINITE, _perturbation_bound(ms.nu, delta), regime)


def _entropy_finite_mp(L: int, params: ModelParams, regime: Regime, dps: int) -> EntropyEstimate:
    import mpmath as mp

    if L < 1:
        raise DomainError(f"block length must be >= 1, got {L}")
    if regime.is_critical:
        raise DomainError("extended-precision finite entropy needs off-critical couplings")
    with mp.workdps(dps + 10):
        tol = mp.mpf(10) ** (-(dps + 2))
        gamma, h = mp.mpf(params.gamma), mp.mpf(params.h)

        def coefficients(n):
            vals = []
            for j in range(n):
                th = 2 * mp.pi * j / n
                num = mp.mpc(mp.cos(th) - h / 2, -gamma * mp.sin(th))
                vals.append(num / abs(num))
            twiddle = [mp.expj(-2 * mp.pi * j / n) for j in range(n)]
            return [
                mp.fsum(vals[j] * twiddle[(l * j) % n] for j in range(n)).real / n
                for l in range(-(L - 1), L)
            ]

        n = _next_pow2(max(64, 4 * L))
        coarse = coefficients(n)
        while True:
            fine = coefficients(2 * n)
            if max(abs(a - b) for a, b in zip(fine, coarse)) <= tol:
                break
            n *= 2
            if n > 2**14:
                raise ResolutionError("extended-precision symbol coefficients did not converge")
            coarse = fine
        B = mp.matrix(2 * L, 2 * L)
        for j in range(L):
            for k in range(L):
                B[2 * j, 2 * k + 1] = fine[j - k + L - 1]
                B[2 * j + 1, 2 * k] = -fine[k - j + L - 1]
        # -B² = BᵀB has each ν² twice
        sq = sorted(mp.eigsy(B.T * B, eigvals_only=True))
        pairs = [(sq[2 * i], sq[2 * i + 1]) for i in range(L)]
        residual = max(abs(a - b) for a, b in pairs)
        if residual > mp.mpf(10) ** (-(dps // 2)):
            raise AsymmetryError(f"extended-precision spectrum not paired (residual {mp.nstr(residual, 3)})")
        total = mp.mpf(0)
        for a, b in pairs:
            nu2 = min(max((a + b) / 2, mp.mpf(0)), mp.mpf(1))
            nu = mp.sqrt(nu2)
            p = (1 + nu) / 2
            q = (1 - nu2) / (2 * (1 + nu))
            total -= (p * mp.log(p) if p > 0 else 0) + (q * mp.log(q) if q > 0 else 0)
        value = +total
    bound = float(L * mp.mpf(10) ** (-dps) + residual)
    with mp.workdps(dps):
        return EntropyEstimate(+value, Method.FINITE, bound, regime)


def _complex_kernel(x: float, lam: np.ndarray) -> np.ndarray:
    p, q = 0.5 * (x + lam), 0.5 * (x - lam)
    return -p * np.log(p) - q * np.log(q)


def contour_entropy(L: int, params: ModelParams, eps: float = 1e-3) -> tuple:
    """Entropy from the contour integral (1/4πi)∮ e(1+ε, λ) d/dλ ln D_L(λ) dλ.

    The contour is the rectangle with corners ±(1 + ε/2) ± iε/2, which
    encloses every zero ±ν_m of D_L and none of the kernel's cuts.

    Returns
    -------
    (contour_value, residue_value)
        The numerically integrated contour expression and Σ e(1+ε, ν_m).
    """
    nu = majorana_spectrum(build_correlation(L, params)).nu
    x = 1.0 + eps
    a, b = 1.0 + 0.5 * eps, 0.5 * eps

    def integrand(lam):
        dlog = np.sum(2.0 * lam / (lam * lam - nu * nu))
        return _complex_kernel(x, lam) * dlog

    corners = [complex(-a, -b), complex(a, -b), complex(a, b), complex(-a, b), complex(-a, -b)]
    total = 0.0 + 0.0j
    for z0, z1 in zip(corners[:-1], corners[1:]):
        dz = z1 - z0
        breaks = None
        if dz.real != 0.0:
            ts = sorted((s * v - z0.real) / dz.real for v in nu for s in (1.0, -1.0))
            # clustered eigenvalues near ±1 would give sliver subintervals
            merged = []
            for t in ts:
                if 1e-9 < t < 1.0 - 1e-9 and (not merged or t - merged[-1] > 1e-9):
                    merged.append(t)
            breaks = merged or None
        for part in (np.real, np.imag):
            with warnings.catch_warnings():
                # roundoff near the tolerance floor is expected; accuracy is checked by callers
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, _ = integrate.quad(
                    lambda t: part(integrand(z0 + t * dz) * dz),
                    0.0,
                    1.0,
                    points=breaks,
                    limit=400,
                    epsabs=1e-13,
                    epsrel=1e-12,
                )
            total += val if part is np.real else 1j * val
    contour = total / (4j * math.pi)
    residue = float(np.sum(entropy_kernel(x, nu)))
    return complex(contour), residue
