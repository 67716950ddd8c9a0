"""Probability kernels: fixed values, independent oracles, and invariants."""

import numpy as np
import pytest
import scipy.integrate
import scipy.stats

from tailcast import (GpInvariantParams, GpThresholdParams, LogNormalParams,
                      convert_to_invariant, erf, erf_inv, gp_cdf_invariant,
                      gp_cdf_threshold, gp_fit_mle, gp_quantile_invariant,
                      lognormal_cdf, zeta_at)
from tailcast.distributions import lognormal_pdf
from tailcast.errors import DomainError, InsufficientDataError, ParameterError


def erf_oracle(x):
    """Adaptive quadrature of the defining integral, split so the quadrature
    never misses the narrow mass near the origin for large |x|."""
    edges = [e for e in (0.0, 1.0, 2.0, 4.0, abs(x)) if e < abs(x)] + [abs(x)]
    val = sum(scipy.integrate.quad(lambda t: np.exp(-t * t), lo, hi,
                                   epsabs=1e-15, epsrel=1e-13)[0]
              for lo, hi in zip(edges[:-1], edges[1:]))
    return np.sign(x) * 2.0 / np.sqrt(np.pi) * val


# ---------------------------------------------------------------------------
# error function
# ---------------------------------------------------------------------------

def test_erf_zero():
    assert erf(0.0) == 0.0


def test_erf_is_odd():
    assert erf(-0.7) == -erf(0.7)


def test_erf_one_matches_quadrature():
    assert abs(erf(1.0) - 0.842700792949715) < 1e-12
    assert abs(erf(1.0) - erf_oracle(1.0)) < 1e-12


def test_erf_against_quadrature_grid():
    for x in np.linspace(-6.0, 6.0, 61):
        assert abs(erf(x) - erf_oracle(x)) < 1e-12, x


def test_erf_saturates():
    assert abs(erf(10.0) - 1.0) < 1e-15
    assert abs(erf(-10.0) + 1.0) < 1e-15


def test_erf_monotone_and_vectorized():
    x = np.linspace(-5, 5, 401)
    y = erf(x)
    assert y.shape == x.shape
    assert np.all(np.diff(y) > 0)


def test_erf_inv_zero():
    assert erf_inv(0.0) == 0.0


def test_erf_inv_round_trip():
    assert abs(erf_inv(erf(0.5)) - 0.5) < 1e-10
    p = np.linspace(-0.999, 0.999, 201)
    assert np.max(np.abs(erf(erf_inv(p)) - p)) < 1e-12


def test_erf_inv_fixed_value():
    assert abs(erf_inv(0.842700792949715) - 1.0) < 1e-9


def test_erf_inv_domain():
    with pytest.raises(DomainError):
        erf_inv(1.0)
    with pytest.raises(DomainError):
        erf_inv(-1.5)


# ---------------------------------------------------------------------------
# log-normal
# ---------------------------------------------------------------------------

def test_lognormal_cdf_median():
    p = LogNormalParams(mu=0.3, sigma=0.8)
    assert abs(lognormal_cdf(np.exp(0.3), p) - 0.5) < 1e-14


def test_lognormal_cdf_standard_normal_value():
    # CDF at y = e with mu=0, s=1 equals the standard normal CDF at 1
    p = LogNormalParams(mu=0.0, sigma=1.0)
    phi1, _ = scipy.integrate.quad(
        lambda t: np.exp(-t * t / 2) / np.sqrt(2 * np.pi), -np.inf, 1.0)
    assert abs(lognormal_cdf(np.e, p) - 0.841344746) < 1e-9
    assert abs(lognormal_cdf(np.e, p) - phi1) < 1e-12


def test_lognormal_cdf_left_tail_vanishes():
    p = LogNormalParams(mu=0.0, sigma=1.0)
    assert lognormal_cdf(1e-12, p) < 1e-10


def test_lognormal_domain():
    p = LogNormalParams(mu=0.0, sigma=1.0)
    with pytest.raises(DomainError):
        lognormal_cdf(0.0, p)
    with pytest.raises(DomainError):
        lognormal_pdf(-1.0, p)


def test_lognormal_pdf_is_cdf_derivative():
    p = LogNormalParams(mu=0.5, sigma=0.7)
    h = 1e-6
    for y in [0.2, 1.0, 3.0, 10.0]:
        fd = (lognormal_cdf(y + h, p) - lognormal_cdf(y - h, p)) / (2 * h)
        assert abs(lognormal_pdf(y, p) - fd) < 1e-7


# ---------------------------------------------------------------------------
# generalized Pareto, threshold form
# ---------------------------------------------------------------------------

def test_gp_threshold_zero_at_threshold():
    p = GpThresholdParams(shape=0.2, scale=5.0, exceed_prob=0.1, threshold=10.0)
    assert gp_cdf_threshold(10.0, p) == 0.0


def test_gp_threshold_exponential_branch():
    p = GpThresholdParams(shape=0.0, scale=2.0, exceed_prob=0.5, threshold=1.0)
    assert abs(gp_cdf_threshold(3.0, p) - (1.0 - np.exp(-1.0))) < 1e-14


def test_gp_threshold_against_scipy():
    for xi in [-0.2, 0.1, 0.5]:
        p = GpThresholdParams(shape=xi, scale=2.0, exceed_prob=0.1, threshold=4.0)
        ys = np.linspace(4.0, 4.0 + 5.0, 30)
        if xi < 0:
            ys = ys[ys < 4.0 + 2.0 / abs(xi)]
        ref = scipy.stats.genpareto.cdf(ys - 4.0, xi, scale=2.0)
        assert np.max(np.abs(gp_cdf_threshold(ys, p) - ref)) < 1e-12


def test_gp_threshold_domain():
    p = GpThresholdParams(shape=0.2, scale=5.0, exceed_prob=0.1, threshold=10.0)
    with pytest.raises(DomainError):
        gp_cdf_threshold(9.0, p)
    neg = GpThresholdParams(shape=-0.5, scale=2.0, exceed_prob=0.1, threshold=0.0)
    with pytest.raises(DomainError):
        gp_cdf_threshold(10.0, neg)  # beyond the finite upper endpoint


def test_gp_param_validation():
    with pytest.raises(ParameterError):
        GpThresholdParams(shape=0.2, scale=0.0, exceed_prob=0.1, threshold=1.0)
    with pytest.raises(ParameterError):
        GpThresholdParams(shape=0.2, scale=1.0, exceed_prob=1.5, threshold=1.0)
    with pytest.raises(ParameterError):
        GpInvariantParams(shape=0.2, scale0=-1.0, zeta0=0.5)
    with pytest.raises(ParameterError):
        GpInvariantParams(shape=0.2, scale0=1.0, zeta0=0.0)
    with pytest.raises(ParameterError):
        LogNormalParams(mu=0.0, sigma=0.0)


# ---------------------------------------------------------------------------
# generalized Pareto, threshold-free form
# ---------------------------------------------------------------------------

def test_gp_invariant_at_zero():
    p = GpInvariantParams(shape=0.2, scale0=3.0, zeta0=0.8)
    assert abs(gp_cdf_invariant(0.0, p) - 0.2) < 1e-15


def test_gp_invariant_exponential_closed_form():
    p = GpInvariantParams(shape=0.0, scale0=2.0, zeta0=0.5)
    y = 2.0 * np.log(2.0)
    assert abs(gp_cdf_invariant(y, p) - 0.75) < 1e-14


def test_gp_invariant_fixture_consistency():
    # threshold form (xi=0.2, sigma_u=5, u=10, zeta_u=0.1) converted to the
    # threshold-free form must put CDF 0.9 at the threshold itself
    thr = GpThresholdParams(shape=0.2, scale=5.0, exceed_prob=0.1, threshold=10.0)
    inv = convert_to_invariant(thr)
    assert abs(gp_cdf_invariant(10.0, inv) - 0.9) < 1e-4
    assert abs(gp_cdf_invariant(10.0, inv) - 0.9) < 1e-12


def test_gp_quantile_round_trip():
    p = GpInvariantParams(shape=0.2, scale0=3.0, zeta0=0.9)
    ys = np.linspace(0.0, 60.0, 50)
    back = gp_quantile_invariant(gp_cdf_invariant(ys, p), p)
    assert np.max(np.abs(back - ys)) < 1e-9


def test_gp_quantile_against_bisection():
    p = GpInvariantParams(shape=0.2, scale0=3.0, zeta0=0.9)
    for q in [0.2, 0.5, 0.9, 0.99]:
        lo, hi = 0.0, 1e6
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if gp_cdf_invariant(mid, p) < q:
                lo = mid
            else:
                hi = mid
        assert abs(gp_quantile_invariant(q, p) - 0.5 * (lo + hi)) < 1e-7


def test_gp_quantile_domain():
    p = GpInvariantParams(shape=0.2, scale0=3.0, zeta0=0.9)
    with pytest.raises(DomainError):
        gp_quantile_invariant(1.0, p)
    with pytest.raises(DomainError):
        gp_quantile_invariant(0.05, p)  # below the branch covered by the tail


# ---------------------------------------------------------------------------
# reparameterization
# ---------------------------------------------------------------------------

def test_convert_identity_at_zero_threshold():
    p = GpThresholdParams(shape=0.3, scale=2.0, exceed_prob=0.4, threshold=0.0)
    inv = convert_to_invariant(p)
    assert inv.shape == 0.3
    assert inv.scale0 == 2.0
    assert abs(inv.zeta0 - 0.4) < 1e-15


def test_convert_fixture():
    p = GpThresholdParams(shape=0.2, scale=5.0, exceed_prob=0.1, threshold=10.0)
    inv = convert_to_invariant(p)
    assert abs(inv.scale0 - 3.0) < 1e-12
    # zeta0 = 0.1 * (5/3)^5
    assert abs(inv.zeta0 - 1.2860082304526745) < 1e-12


def test_zeta0_two_forms_agree():
    # zeta_u*(1 + xi*u/scale0)^(1/xi) versus zeta_u*(1 - xi*u/scale)^(-1/xi)
    rng = np.random.default_rng(3)
    for _ in range(300):
        xi = rng.uniform(-0.4, 0.9)
        if abs(xi) < 1e-6:
            continue
        u = rng.uniform(0.1, 20.0)
        sigma_u = rng.uniform(0.5, 10.0)
        if sigma_u - xi * u <= 0.01:
            continue
        zeta_u = rng.uniform(0.01, 1.0)
        p = GpThresholdParams(shape=xi, scale=sigma_u, exceed_prob=zeta_u, threshold=u)
        inv = convert_to_invariant(p)
        alt = zeta_u * (1.0 - xi * u / sigma_u) ** (-1.0 / xi)
        assert abs(inv.zeta0 - alt) <= 1e-10 * max(1.0, abs(alt))


def test_survival_relation_between_forms():
    # the threshold-tied CDF is the conditional law, so the two forms are
    # linked through 1 - F_inv(y) = zeta_u * (1 - F_u(y)) for y >= u
    p = GpThresholdParams(shape=0.2, scale=5.0, exceed_prob=0.1, threshold=10.0)
    inv = convert_to_invariant(p)
    ys = np.linspace(10.0, 80.0, 60)
    lhs = 1.0 - gp_cdf_invariant(ys, inv)
    rhs = p.exceed_prob * (1.0 - gp_cdf_threshold(ys, p))
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_zeta_at_inverts_conversion():
    p = GpThresholdParams(shape=0.3, scale=2.0, exceed_prob=0.25, threshold=4.0)
    inv = convert_to_invariant(p)
    assert abs(zeta_at(inv, 4.0) - 0.25) < 1e-12
    assert zeta_at(inv, 0.0) == inv.zeta0


def test_reparameterization_consistency():
    # moving the threshold from u1 to u2 shifts the scale linearly and
    # conditioning the invariant CDF on exceeding u2 gives that GP back
    base = GpThresholdParams(shape=0.2, scale=5.0, exceed_prob=0.1, threshold=10.0)
    inv = convert_to_invariant(base)
    u2 = 14.0
    sigma_u2 = base.scale + base.shape * (u2 - base.threshold)
    p2 = GpThresholdParams(shape=base.shape, scale=sigma_u2,
                           exceed_prob=zeta_at(inv, u2), threshold=u2)
    assert abs(convert_to_invariant(p2).scale0 - inv.scale0) < 1e-12
    ys = np.linspace(u2, u2 + 40.0, 50)
    f_u2 = gp_cdf_invariant(u2, inv)
    conditional = (gp_cdf_invariant(ys, inv) - f_u2) / (1.0 - f_u2)
    assert np.max(np.abs(conditional - gp_cdf_threshold(ys, p2))) < 1e-10


def test_monotonicity_property():
    rng = np.random.default_rng(9)
    for _ in range(50):
        xi = rng.uniform(-0.4, 0.9)
        scale0 = rng.uniform(0.5, 10.0)
        zeta0 = rng.uniform(0.05, 3.0)
        p = GpInvariantParams(shape=xi, scale0=scale0, zeta0=zeta0)
        hi = 50.0 if xi >= 0 else 0.99 * scale0 / abs(xi)
        ys = np.sort(rng.uniform(0.0, hi, size=64))
        vals = gp_cdf_invariant(ys, p)
        assert np.all(np.diff(vals) >= 0)


def test_shape_to_zero_continuity():
    p_small = GpInvariantParams(shape=1e-8, scale0=2.0, zeta0=0.7)
    p_zero = GpInvariantParams(shape=0.0, scale0=2.0, zeta0=0.7)
    ys = np.linspace(0.0, 30.0, 100)
    diff = np.abs(gp_cdf_invariant(ys, p_small) - gp_cdf_invariant(ys, p_zero))
    assert np.max(diff) < 1e-6


# ---------------------------------------------------------------------------
# maximum likelihood
# ---------------------------------------------------------------------------

def test_gp_mle_exponential_recovery():
    rng = np.random.default_rng(12)
    z = -2.0 * np.log(1.0 - rng.random(100_000))  # inverse-transform oracle
    xi, sigma, ll = gp_fit_mle(z)
    assert -0.03 <= xi <= 0.03
    assert 1.94 <= sigma <= 2.06
    assert np.isfinite(ll)


def test_gp_mle_loglik_value_matches_formula():
    rng = np.random.default_rng(4)
    z = -1.5 * np.log(1.0 - rng.random(2000))
    xi, sigma, ll = gp_fit_mle(z)
    direct = -len(z) * np.log(sigma) - (1 + 1 / xi) * np.sum(np.log(1 + xi * z / sigma))
    assert abs(ll - direct) < 1e-8 * abs(direct)


def test_gp_mle_errors():
    with pytest.raises(InsufficientDataError):
        gp_fit_mle(np.ones(5))
    with pytest.raises(DomainError):
        gp_fit_mle(np.concatenate([np.ones(50), [-1.0]]))
    with pytest.raises(DomainError):
        gp_fit_mle(np.concatenate([np.ones(50), [np.inf]]))
