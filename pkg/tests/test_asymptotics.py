import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from xyent.asymptotics import (
    critical_estimate,
    critical_fit,
    entropy_closed,
    entropy_integral,
    entropy_series,
    entropy_series_two_sided,
    lambda_sequence,
    s_lambda,
    series_from_tau,
    small_tau_estimate,
    two_sided_ladder,
)
from xyent.correlation import binary_entropy
from xyent.errors import ApplicabilityError, DomainError, RegimeError
from xyent.model import EllipticData, ModelParams, Regime, elliptic_data
from xyent.special import log_theta3

from helpers import sample_case

LN2 = math.log(2.0)
# exact finite-L entropy at L = 64 for (γ, h) = (1, 1), frozen from the eigensolve
S_ISING_L64 = 0.6989875284225204


def fake_data(tau0, sigma):
    return EllipticData(math.nan, math.nan, math.nan, math.nan, tau0, sigma, Regime.CASE_1A if sigma else Regime.CASE_2)


def test_ladder_start_values():
    assert lambda_sequence(fake_data(0.7, 1)).lambdas[0] == 0.0
    assert lambda_sequence(fake_data(1.0, 0)).lambdas[0] == pytest.approx(0.917152335667274, abs=1e-14)


def test_ladder_boundary_and_domain():
    d = elliptic_data(ModelParams(0.6, 1.6))
    assert lambda_sequence(d).lambdas == (0.0,)
    assert lambda_sequence(elliptic_data(ModelParams(0.0, 3.0))).lambdas == ()
    for tol in (0.0, 0.1):
        with pytest.raises(DomainError):
            lambda_sequence(fake_data(1.0, 1), tol)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["Case1a", "Case1b", "Case2"]), st.integers(0, 10**6))
def test_ladder_invariants(regime, seed):
    d = elliptic_data(sample_case(np.random.default_rng(seed), regime))
    sp = lambda_sequence(d, 1e-12)
    lam = np.array(sp.lambdas)
    m = np.arange(lam.size)
    assert np.allclose(lam, np.tanh((m + (1 - d.sigma) / 2) * math.pi * d.tau0), atol=1e-14, rtol=0)
    assert np.all(np.diff(lam) >= 0) and np.all((0 <= lam) & (lam <= 1))
    assert np.all(np.diff(lam) <= 4 * math.pi * d.tau0)
    assert binary_entropy(lam[-1]) < 1e-12


def test_term_pair_identity():
    rng = np.random.default_rng(7)
    for lam in rng.uniform(0, 1, 100):
        lhs = (1 + lam) * math.log(2 / (1 + lam)) + (1 - lam) * math.log(2 / (1 - lam))
        assert lhs == pytest.approx(2 * binary_entropy(lam), abs=1e-14)


@pytest.mark.parametrize("g,h", [(1.0, 1.0), (0.5, 3.0), (0.5, 1.0), (0.6, 1.6)])
def test_two_sided_form(g, h):
    p = ModelParams(g, h)
    assert entropy_series_two_sided(p) == pytest.approx(entropy_series(p).value, abs=1e-10)


def test_two_sided_ladder_is_odd():
    sp = lambda_sequence(fake_data(0.8, 1))
    lam = two_sided_ladder(sp)
    assert np.allclose(lam, -lam[::-1])
    sp0 = lambda_sequence(fake_data(0.8, 0))
    assert two_sided_ladder(sp0).size == 2 * len(sp0.lambdas)


def test_series_boundary():
    assert entropy_series(ModelParams(0.6, 1.6)).value == LN2


def test_series_strong_field():
    assert entropy_series(ModelParams(0.5, 50.0)).value <= 1e-3


def test_series_matches_finite_oracle(ising):
    assert abs(entropy_series(ising).value - S_ISING_L64) <= 1e-10


def test_series_rejects_critical():
    for p in (ModelParams(0.0, 1.0), ModelParams(1.0, 2.0)):
        with pytest.raises(RegimeError):
            entropy_series(p)


def test_series_extended_precision(ising):
    hi = entropy_series(ising, dps=40)
    assert abs(float(hi.value) - entropy_series(ising).value) <= 1e-13


@pytest.mark.parametrize("g,h", [(1.0, 1.0), (0.5, 1.0), (0.5, 3.0), (1.4, 1.5)])
def test_integral_matches_series(g, h):
    p = ModelParams(g, h)
    assert abs(entropy_integral(p).value - entropy_series(p).value) <= 1e-8


def test_integral_rejects_boundary():
    with pytest.raises(RegimeError):
        entropy_integral(ModelParams(0.6, 1.6))


def test_integrand_decay_in_lambda():
    d = elliptic_data(ModelParams(1.0, 1.0))

    def F(lam):
        beta = np.log((lam + 1) / (lam - 1)) / (2j * math.pi)
        half = 0.5j * d.tau0
        v = log_theta3(beta + half, d.tau0) + log_theta3(beta - half, d.tau0) - 2 * log_theta3(half, d.tau0)
        return complex(v).real

    ratio = F(1e3) / F(1e4)
    assert ratio == pytest.approx(100.0, rel=1e-2)


def test_closed_examples(ising):
    assert entropy_closed(ModelParams(0.6, 1.6)).value == LN2
    assert abs(entropy_closed(ising).value - S_ISING_L64) <= 1e-10
    p = ModelParams(0.5, 3.0)
    assert abs(entropy_closed(p).value - entropy_series(p).value) <= 1e-8
    assert entropy_closed(ModelParams(0.0, 3.0)).value == 0.0


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["Case1a", "Case1b", "Case2"]), st.integers(0, 10**6))
def test_three_way_agreement(regime, seed):
    p = sample_case(np.random.default_rng(seed), regime)
    s, i, c = entropy_series(p).value, entropy_integral(p).value, entropy_closed(p).value
    assert max(abs(s - i), abs(s - c), abs(i - c)) <= 1e-8


def test_case2_monotone_in_field():
    S = [entropy_series(ModelParams(0.5, h)).value for h in np.linspace(2.1, 10, 40)]
    assert all(b < a for a, b in zip(S, S[1:]))


def test_boundary_minimum():
    for g in np.linspace(0.05, 0.95, 10):
        p = ModelParams(g, 2 * math.sqrt(1 - g * g))
        assert abs(entropy_series(p).value - LN2) <= 1e-10


@pytest.mark.parametrize("sigma", [0, 1])
def test_small_tau_divergence(sigma):
    tau0 = 0.05
    S, _ = series_from_tau(tau0, sigma)
    assert S * 6 * tau0 / math.pi == pytest.approx(1.0, rel=0.05)


def test_small_tau_estimate_near_field():
    p = ModelParams(1.0, 2.0 - 1e-8)
    est = small_tau_estimate(p)
    assert abs(est.value - entropy_series(p).value) <= est.error_bound + 1e-9


def test_s_lambda_decay():
    d = elliptic_data(ModelParams(1.0, 1.0))
    a, b = s_lambda(100.0, d), s_lambda(1000.0, d)
    assert a / b == pytest.approx(1000.0, rel=0.05)


def test_s_lambda_finite_difference():
    d = elliptic_data(ModelParams(1.0, 1.0))

    def F(lam):
        beta = np.log((lam + 1) / (lam - 1)) / (2j * math.pi)
        half = 0.5j * d.tau0
        return complex(log_theta3(beta + half, d.tau0) + log_theta3(beta - half, d.tau0)).real

    h = 1e-5
    fd = (F(2 + h) - F(2 - h)) / (2 * h)
    assert s_lambda(2.0, d) == pytest.approx(fd, abs=1e-7)


def test_s_lambda_domain():
    d = elliptic_data(ModelParams(1.0, 1.0))
    for lam in (0.5, 1.0 + 1e-9):
        with pytest.raises(DomainError):
            s_lambda(lam, d)


def test_integration_by_parts():
    p = ModelParams(1.0, 1.0)
    d = elliptic_data(p)
    eps, lam_max = 1.5e-8, 1e9
    # λ = coth t on [1+ε, Λ]
    f = lambda t: (1 + eps - 1 / math.tanh(t)) * s_lambda(1 / math.tanh(t), d) / math.sinh(t) ** 2  # noqa: E731
    val = 0.5 * integrate.quad(f, math.atanh(1 / lam_max), math.atanh(1 / (1 + eps)), limit=200, epsabs=1e-12)[0]
    assert abs(val - entropy_integral(p).value) <= 1e-6


def test_critical_estimates():
    assert critical_estimate(ModelParams(1.0, 1.99)).value == pytest.approx(1.2297, abs=1e-4)
    assert critical_estimate(ModelParams(0.01, 1.0)).value == pytest.approx(1.9492078, abs=1e-6)
    p = ModelParams(1.0, 1.99)
    assert abs(entropy_closed(p).value - critical_estimate(p).value) <= 0.02
    p = ModelParams(0.01, 1.0)
    est = critical_estimate(p)
    assert abs(entropy_closed(p).value - est.value) <= est.error_bound


def test_critical_estimate_windows():
    for p in (ModelParams(1.0, 1.0), ModelParams(0.05, 2.3), ModelParams(0.0, 1.0)):
        with pytest.raises(ApplicabilityError):
            critical_estimate(p)


def test_critical_fit_field():
    fit = critical_fit("field", 1.0, (1.9, 1.999), 20)
    assert fit.slope_deviation <= 0.02 and fit.intercept_deviation <= 0.05
    above = critical_fit("field", 1.0, (2.001, 2.1), 20)
    assert above.slope_deviation <= 0.02


def test_critical_fit_xx():
    fit = critical_fit("xx", 1.0, (1e-3, 1e-2), 20, correction=False)
    assert fit.slope_deviation <= 0.02


def test_critical_fit_errors():
    with pytest.raises(DomainError):
        critical_fit("field", 1.0, (1.9, 2.0), 20)
    with pytest.raises(DomainError):
        critical_fit("xx", 1.0, (0.0, 1e-2), 20)
    with pytest.raises(DomainError):
        critical_fit("bogus", 1.0, (0.1, 0.2), 20)
