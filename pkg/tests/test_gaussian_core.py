import math

import numpy as np
import pytest
from scipy import integrate, optimize

from eprlab.core.gaussian import (
    Gaussian1D,
    Gaussian2D,
    SqueezeParams,
    amplified_variance,
    conditional_distribution_p,
    conditional_distribution_x,
    epr_criterion,
    inference_variance_general,
    inference_variance_optimal,
    joint_distribution_p,
    joint_distribution_x,
    mean_photon_number,
    optimal_inference_gain,
    quadrature_variance,
    sum_difference_variances,
    sum_of_squares_mean,
)
from eprlab.errors import DomainError, RangeError


R_GRID = [0.0, 0.25, 0.5, 1.0, 2.0, 3.0]


# ---------------------------------------------------------------------------
# SqueezeParams
# ---------------------------------------------------------------------------

def test_squeeze_params_derived_scalars():
    p = SqueezeParams(1.0)
    assert p.eta == pytest.approx(math.tanh(1.0))
    assert p.g0 == pytest.approx(math.tanh(2.0))
    assert p.sigma_sq == pytest.approx(math.cosh(2.0) / 2.0)
    assert 0 <= p.eta < 1 and 0 <= p.g0 < 1


@pytest.mark.parametrize("r", [-0.1, float("nan"), float("inf")])
def test_squeeze_params_rejects_invalid_r(r):
    with pytest.raises(DomainError):
        SqueezeParams(r)


def test_squeeze_params_range_cap():
    SqueezeParams(12.0)
    with pytest.raises(RangeError):
        SqueezeParams(12.5)


def test_sigma_sq_minimum_only_at_vacuum():
    assert SqueezeParams(0.0).sigma_sq == 0.5
    for r in R_GRID[1:]:
        assert SqueezeParams(r).sigma_sq > 0.5


# ---------------------------------------------------------------------------
# Varianze
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "r, expected",
    [(0.0, 0.5), (2.0, 13.6541), (3.0, 100.8578)],
)
def test_quadrature_variance_values(r, expected):
    assert quadrature_variance(SqueezeParams(r)) == pytest.approx(expected, abs=1e-4)


def test_uncertainty_product_bound():
    assert quadrature_variance(SqueezeParams(0.0)) ** 2 == pytest.approx(0.25)
    for r in R_GRID[1:]:
        assert quadrature_variance(SqueezeParams(r)) ** 2 > 0.25


def test_inference_variance_optimal_values():
    assert inference_variance_optimal(SqueezeParams(0.0)) == pytest.approx(0.5)
    assert inference_variance_optimal(SqueezeParams(2.0)) == pytest.approx(0.018309, abs=1e-6)


@pytest.mark.parametrize("r", R_GRID)
def test_general_matches_optimal_at_g0(r):
    p = SqueezeParams(r)
    vx, vp = inference_variance_general(p, optimal_inference_gain(p))
    assert vx == pytest.approx(inference_variance_optimal(p), abs=1e-12)
    assert vp == vx


def test_general_reduces_to_quadrature_variance_at_zero_gain():
    for r in R_GRID:
        p = SqueezeParams(r)
        assert inference_variance_general(p, 0.0) == (p.sigma_sq, p.sigma_sq)


def test_general_sum_difference_at_unit_gain():
    vx, _ = inference_variance_general(SqueezeParams(1.0), 1.0)
    assert vx == pytest.approx(math.exp(-2.0), abs=1e-5)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_general_minimizer_is_tanh_2r(r):
    p = SqueezeParams(r)
    res = optimize.minimize_scalar(
        lambda g: inference_variance_general(p, g)[0], bracket=(-1.0, 0.5, 2.0), tol=1e-12
    )
    assert res.x == pytest.approx(math.tanh(2.0 * r), abs=1e-6)
    assert res.fun == pytest.approx(inference_variance_optimal(p), abs=1e-10)


def test_general_never_below_optimal_on_dense_grid():
    for r in R_GRID:
        p = SqueezeParams(r)
        opt = inference_variance_optimal(p)
        for g in np.linspace(-3.0, 3.0, 601):
            assert inference_variance_general(p, float(g))[0] >= opt - 1e-12


def test_general_rejects_non_finite_gain():
    with pytest.raises(DomainError):
        inference_variance_general(SqueezeParams(1.0), float("inf"))


def test_sum_difference_variances():
    d, s = sum_difference_variances(SqueezeParams(1.0))
    assert d == pytest.approx(0.13534, abs=1e-5)
    assert s == pytest.approx(7.389, abs=1e-3)


def test_amplified_variance():
    p = SqueezeParams(2.0)
    assert amplified_variance(p, 10.0) == pytest.approx(100.0 * p.sigma_sq)
    with pytest.raises(DomainError):
        amplified_variance(p, 0.5)


# ---------------------------------------------------------------------------
# Distribuzioni
# ---------------------------------------------------------------------------

def test_conditional_distribution_x_values():
    c0 = conditional_distribution_x(SqueezeParams(0.0), 5.0)
    assert (c0.mean, c0.variance) == (0.0, 0.5)

    c2 = conditional_distribution_x(SqueezeParams(2.0), 1.0)
    assert c2.mean == pytest.approx(0.99933, abs=1e-5)
    assert c2.variance == pytest.approx(0.018309, abs=1e-6)


def test_conditional_variance_independent_of_outcome():
    p = SqueezeParams(1.5)
    variances = {conditional_distribution_x(p, x).variance for x in (-3.0, 0.0, 3.0)}
    assert len(variances) == 1


def test_conditional_distribution_p_is_anticorrelated():
    p = SqueezeParams(2.0)
    c = conditional_distribution_p(p, 1.0)
    assert c.mean == pytest.approx(-p.g0)
    assert c.variance == conditional_distribution_x(p, 1.0).variance


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0, 2.0])
def test_conditional_matches_schur_complement(r):
    p = SqueezeParams(r)
    jx = joint_distribution_x(p).conditional(1, 0.7)
    jp = joint_distribution_p(p).conditional(1, 0.7)
    assert jx.variance == pytest.approx(inference_variance_optimal(p), abs=1e-12)
    assert jp.variance == pytest.approx(inference_variance_optimal(p), abs=1e-12)
    assert jx.mean == pytest.approx(conditional_distribution_x(p, 0.7).mean, abs=1e-12)
    assert jp.mean == pytest.approx(conditional_distribution_p(p, 0.7).mean, abs=1e-12)


def test_joint_distribution_vacuum_is_identity_over_two():
    j = joint_distribution_x(SqueezeParams(0.0))
    np.testing.assert_allclose(j.matrix, 0.5 * np.eye(2))


def test_joint_distribution_sum_difference_variances():
    j = joint_distribution_x(SqueezeParams(1.0))
    assert j.linear_variance(1.0, -1.0) == pytest.approx(math.exp(-2.0), abs=1e-12)
    assert j.linear_variance(1.0, 1.0) == pytest.approx(math.exp(2.0), abs=1e-12)

    jp = joint_distribution_p(SqueezeParams(1.0))
    assert jp.linear_variance(1.0, 1.0) == pytest.approx(math.exp(-2.0), abs=1e-12)


def test_joint_marginal_by_quadrature():
    p = SqueezeParams(0.5)
    joint = joint_distribution_x(p)
    marginal = Gaussian1D(0.0, p.sigma_sq)
    for x_A in (-1.5, 0.0, 0.4, 2.0):
        value, _ = integrate.quad(lambda x_B: joint.pdf(x_A, x_B), -np.inf, np.inf, epsabs=1e-13)
        assert value == pytest.approx(marginal.pdf(x_A), abs=1e-9)
    assert joint.marginal(0) == marginal


def test_gaussian1d_pdf_integrates_to_one():
    g = Gaussian1D(1.0, 3.0)
    total, _ = integrate.quad(g.pdf, -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_gaussian_records_validate():
    with pytest.raises(DomainError):
        Gaussian1D(0.0, 0.0)
    with pytest.raises(DomainError):
        Gaussian2D((0.0, 0.0), ((1.0, 2.0), (2.0, 1.0)))
    with pytest.raises(DomainError):
        Gaussian2D((0.0, 0.0), ((1.0, 0.1), (0.2, 1.0)))
    with pytest.raises(DomainError):
        Gaussian2D.from_sum_difference(1.0, 0.0)
    with pytest.raises(DomainError):
        Gaussian2D((0.0, 0.0), ((1.0, 0.5), (0.5, 1.0)), sum_diff=(3.0, 2.0))


@pytest.mark.parametrize("r", [10.0, 12.0])
def test_joint_distribution_at_large_squeeze(r):
    p = SqueezeParams(r)
    target = 1.0 / (2.0 * math.cosh(2.0 * r))
    for joint, sign in ((joint_distribution_x(p), 1.0), (joint_distribution_p(p), -1.0)):
        cond = joint.conditional(given=1, value=0.3)
        assert cond.variance == pytest.approx(target, rel=1e-12)
        assert cond.mean == pytest.approx(sign * math.tanh(2.0 * r) * 0.3, rel=1e-12)
        assert joint.linear_variance(1.0, -sign) == pytest.approx(math.exp(-2.0 * r), rel=1e-12)
        samples = joint.sample(1000, np.random.default_rng(5))
        assert np.all(np.isfinite(samples))
        assert np.std(samples[:, 0] - sign * samples[:, 1]) < 10 * math.exp(-r)


def test_sum_difference_pdf_matches_covariance_form():
    j = joint_distribution_x(SqueezeParams(0.7))
    c = j.matrix
    plain = Gaussian2D(j.means, ((c[0, 0], c[0, 1]), (c[1, 0], c[1, 1])))
    for u0, u1 in ((0.0, 0.0), (0.5, -0.3), (1.2, 1.0)):
        assert j.pdf(u0, u1) == pytest.approx(plain.pdf(u0, u1), rel=1e-10)


def test_joint_sampling_difference_variance():
    p = SqueezeParams(1.0)
    n = 200_000
    samples = joint_distribution_x(p).sample(n, np.random.default_rng(11))
    diff = samples[:, 0] - samples[:, 1]
    target = math.exp(-2.0)
    se = target * math.sqrt(2.0 / (n - 1))
    assert abs(np.var(diff, ddof=1) - target) < 5 * se


# ---------------------------------------------------------------------------
# Criterio EPR e fotoni
# ---------------------------------------------------------------------------

def test_epr_criterion_tmss_satisfied_for_positive_r():
    for r in R_GRID[1:]:
        dinf = math.sqrt(inference_variance_optimal(SqueezeParams(r)))
        verdict = epr_criterion(dinf, dinf)
        assert verdict.satisfied
        assert verdict.product == pytest.approx(1.0 / (2.0 * math.cosh(2.0 * r)), abs=1e-12)


def test_epr_criterion_strict_boundary_at_vacuum():
    dinf = math.sqrt(inference_variance_optimal(SqueezeParams(0.0)))
    verdict = epr_criterion(dinf, dinf)
    assert verdict.product == pytest.approx(0.5)
    assert not verdict.satisfied


def test_epr_criterion_arithmetic_and_errors():
    verdict = epr_criterion(0.7, 0.8)
    assert verdict.product == pytest.approx(0.56)
    assert not verdict.satisfied
    with pytest.raises(DomainError):
        epr_criterion(-0.1, 1.0)


def test_mean_photon_number():
    assert mean_photon_number(SqueezeParams(0.0)) == 0.0
    assert mean_photon_number(SqueezeParams(2.0)) == pytest.approx(13.1541, abs=1e-4)
    for r in R_GRID:
        p = SqueezeParams(r)
        assert sum_of_squares_mean(p) == pytest.approx(2.0 * quadrature_variance(p), rel=1e-12)
