import cmath
import math

import numpy as np
import pytest

from xyent.correlation import build_correlation, majorana_spectrum
from xyent.errors import DomainError, ProximityError, RegimeError
from xyent.model import ModelParams, elliptic_data
from xyent.verify import (
    char_determinant,
    check_doubling,
    dlog_asymptotic,
    doubling_check,
    phi_vs_g,
    residual_scan,
    run_checks,
)

from helpers import sample_case


def test_determinant_trivial():
    s = char_determinant(1j, 1, ModelParams(1.0, 0.0))
    assert cmath.exp(s.log_det) == pytest.approx(1.0, abs=1e-14)


def test_determinant_dual_path():
    s = char_determinant(0.3 + 0.4j, 6, ModelParams(0.5, 3.0))
    assert s.relative_difference <= 1e-10


@pytest.mark.parametrize("regime", ["Case1a", "Case1b", "Case2"])
def test_determinant_random(regime):
    rng = np.random.default_rng({"Case1a": 1, "Case1b": 2, "Case2": 3}[regime])
    p = sample_case(rng, regime)
    for L in range(1, 11):
        nu = majorana_spectrum(build_correlation(L, p)).nu
        n = 0
        while n < 10:
            lam = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
            if np.min(np.minimum(np.abs(lam - nu), np.abs(lam + nu))) < 0.05:
                continue
            s = char_determinant(lam, L, p)
            assert s.relative_difference <= 1e-10
            # eigenvalue sum against the trace of the resolvent
            assert abs(s.dlog - s.dlog_trace) <= 1e-9 * abs(s.dlog)
            n += 1


def test_determinant_real_between_gaps():
    p = ModelParams(1.0, 1.0)
    s = char_determinant(0.5, 8, p)
    D = cmath.exp(s.log_det)
    assert abs(D.imag) <= 1e-10 * abs(D)


def test_determinant_proximity():
    p = ModelParams(1.0, 1.0)
    nu = majorana_spectrum(build_correlation(5, p)).nu
    with pytest.raises(ProximityError) as exc:
        char_determinant(nu[1] + 1e-10, 5, p)
    assert exc.value.nu == pytest.approx(nu[1])


def test_dlog_asymptotic_far_field():
    d = elliptic_data(ModelParams(1.0, 1.0))
    theta_term = dlog_asymptotic(100.0, 0, d)
    assert abs(theta_term) <= 1e-3


def test_dlog_asymptotic_omega():
    d = elliptic_data(ModelParams(1.0, 1.0))
    for lam in (1.02, -0.97, 200.0, 0.01, 0.999354 + 0.01j):
        with pytest.raises(DomainError):
            dlog_asymptotic(lam, 10, d)


def test_asymptotic_residual_at_30():
    p = ModelParams(1.0, 1.0)
    d = elliptic_data(p)
    exact = char_determinant(2.0, 30, p).dlog
    assert abs(dlog_asymptotic(2.0, 30, d) - exact) <= 1e-6


def test_asymptotic_midpoint():
    p = ModelParams(1.0, 1.0)
    d = elliptic_data(p)
    lam = 0.5 * 0.9993541952096706
    exact = char_determinant(lam, 40, p).dlog
    assert abs(dlog_asymptotic(lam, 40, d) - exact) <= 1e-5


@pytest.mark.parametrize(
    "g,h", [(1.0, 1.0), (0.8, 1.5), (1.4, 1.0), (0.5, 0.5), (0.8, 0.4), (0.3, 1.2), (0.5, 3.0), (1.0, 2.5), (1.4, 4.0)]
)
def test_residual_monotone(g, h):
    rep = residual_scan(2.0, ModelParams(g, h), range(10, 31, 5))
    assert rep.monotone
    assert rep.fitted_rho > 1.0


def test_residual_boundary_saturates():
    rep = residual_scan(2.0, ModelParams(0.6, 1.6), range(10, 31, 5))
    assert rep.saturated[-1]
    assert max(rep.residuals[2:]) <= 1e-12


def test_residual_near_critical_closer_to_one():
    far = residual_scan(2.0, ModelParams(1.0, 1.0), (10, 15, 20, 25)).fitted_rho
    near = residual_scan(2.0, ModelParams(1.0, 1.95), (10, 15, 20, 25)).fitted_rho
    assert 1.0 < near < far


def test_residual_complex_lambda():
    rep = residual_scan(0.3 + 1.2j, ModelParams(0.5, 3.0), range(10, 31, 5))
    assert rep.fitted_rho > 1.0 and rep.residuals[0] < 1e-3


def test_doubling_examples():
    rows = doubling_check(40, ModelParams(1.0, 1.0), 3)
    assert rows[0].lambda_m == 0.0
    assert abs(rows[0].nu_a) <= 1e-5 and abs(rows[0].nu_b) <= 1e-5
    for r in rows[1:]:
        assert r.gap <= 1e-4 and r.midpoint_error <= 1e-4


def test_doubling_gaps_shrink():
    p = ModelParams(0.8, 1.5)
    a, b = doubling_check(20, p, 3), doubling_check(40, p, 3)
    for ra, rb in zip(a, b):
        assert rb.gap < ra.gap or rb.gap < 1e-14


def test_doubling_gap_rate_matches_residual():
    # pair splitting decays at a rate comparable to the determinant residual
    p = ModelParams(1.4, 1.5)
    g1 = doubling_check(20, p, 1)[1].gap
    g2 = doubling_check(30, p, 1)[1].gap
    rate = (g1 / g2) ** (1 / 10)
    rho = residual_scan(2.0, p, (10, 15, 20, 25, 30)).fitted_rho
    assert 0.5 * rho <= rate <= 2 * rho


def test_doubling_case2_and_boundary():
    rows = doubling_check(30, ModelParams(0.5, 3.0), 2)
    d = elliptic_data(ModelParams(0.5, 3.0))
    assert rows[0].lambda_m == pytest.approx(math.tanh(math.pi * d.tau0 / 2))
    assert all(r.gap < 1e-6 for r in rows)
    rows = doubling_check(10, ModelParams(0.6, 1.6), 3)
    assert len(rows) == 1 and rows[0].lambda_m == 0.0


def test_doubling_needs_length():
    with pytest.raises(DomainError):
        doubling_check(5, ModelParams(1.0, 1.0), 3)


@pytest.mark.parametrize("g,h", [(0.5, 3.0), (0.5, 1.0), (1.0, 1.0), (1.4, 1.5), (1.4, 3.0), (0.6, 1.6)])
def test_phi_matches_g(g, h):
    rep = phi_vs_g(ModelParams(g, h), 1024)
    assert rep.max_deviation <= 1e-10
    assert rep.sign_flips == 0
    assert rep.unit_modulus_error <= 1e-12


def test_phi_sign_is_global_minus():
    signs = {phi_vs_g(sample_case(np.random.default_rng(s), r), 256).sign for s in range(3) for r in ("Case1a", "Case1b", "Case2")}
    assert signs == {-1}


def test_phi_rejects_critical():
    with pytest.raises(RegimeError):
        phi_vs_g(ModelParams(0.0, 1.0))


@pytest.mark.parametrize("g,h", [(1.0, 1.0), (1.0, 1.95), (0.5, 3.0), (0.5, 1.0)])
def test_run_checks_quick(g, h):
    assert all(r.passed for r in run_checks(ModelParams(g, h), "quick"))


def test_run_checks_full():
    assert all(r.passed for r in run_checks(ModelParams(0.8, 2.5), "full"))


def test_check_doubling_reports():
    r = check_doubling(ModelParams(1.0, 1.0), (20, 40))
    assert r.passed and len(r.details["gaps"]) == 4
