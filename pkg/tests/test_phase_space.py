import math

import numpy as np
import pytest
from numpy.polynomial.hermite import hermgauss
from scipy import integrate

from eprlab.core.gaussian import SqueezeParams, quadrature_variance
from eprlab.errors import DomainError
from eprlab.phase_space.q_function import (
    Q_EXCESS,
    PhasePoint,
    SectorGaussian,
    q_density,
    q_density_arrays,
    q_density_p,
    q_density_x,
    q_sector_variances,
    q_single_quadrature_variance,
    sample_q,
    wigner_density,
    wigner_density_arrays,
    wigner_marginal_density,
    wigner_marginal_xA_pB,
)
from eprlab.phase_space.rng import RngStream

ORIGIN = PhasePoint(0.0, 0.0, 0.0, 0.0)


def _gauss_hermite_4d(density, variances, nodes=40):
    """
    ∫ density(x+, x−, p+, p−) su R⁴ con Gauss–Hermite tensoriale, 40 nodi per asse,
    in variabili somma/differenza; scala per asse 1.2·√(2v).
    """
    t, w = hermgauss(nodes)
    grids, weights = [], []
    for k, v in enumerate(variances):
        s = 1.2 * math.sqrt(2.0 * v)
        shape = [1, 1, 1, 1]
        shape[k] = nodes
        grids.append((s * t).reshape(shape))
        weights.append((s * w * np.exp(t * t)).reshape(shape))
    values = density(*grids)
    return float(np.sum(values * weights[0] * weights[1] * weights[2] * weights[3]))


def _from_sum_difference(fn, p):
    # dx_A dx_B = dx+ dx− / 2 per settore
    def density(x_plus, x_minus, p_plus, p_minus):
        return 0.25 * fn(
            (x_plus + x_minus) / 2.0,
            (p_plus + p_minus) / 2.0,
            (x_plus - x_minus) / 2.0,
            (p_plus - p_minus) / 2.0,
            p,
        )

    return density


# ---------------------------------------------------------------------------
# Q function
# ---------------------------------------------------------------------------

def test_q_density_vacuum_origin():
    assert q_density(ORIGIN, SqueezeParams(0.0)) == pytest.approx(1.0 / (4.0 * math.pi**2))


def test_q_density_concentrates_on_epr_lines():
    p = SqueezeParams(3.0)
    along_x = q_density(PhasePoint(2.0, 0.0, 2.0, 0.0), p)
    against_x = q_density(PhasePoint(2.0, 0.0, -2.0, 0.0), p)
    along_p = q_density(PhasePoint(0.0, 2.0, 0.0, -2.0), p)
    against_p = q_density(PhasePoint(0.0, 2.0, 0.0, 2.0), p)
    assert along_x / against_x > 1e3
    assert along_p / against_p > 1e3


def test_q_density_normalization_gauss_hermite():
    p = SqueezeParams(0.5)
    x_sector = q_sector_variances(p, 0.0, "x")
    p_sector = q_sector_variances(p, 0.0, "p")
    variances = (x_sector.variance_sum, x_sector.variance_diff, p_sector.variance_sum, p_sector.variance_diff)
    total = _gauss_hermite_4d(_from_sum_difference(q_density_arrays, p), variances)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_q_density_factorizes_by_sector():
    p = SqueezeParams(1.3)
    pts = np.random.default_rng(9).normal(0.0, 2.0, (200, 4))
    x_A, p_A, x_B, p_B = pts.T
    full = np.log(q_density_arrays(x_A, p_A, x_B, p_B, p))
    split = np.log(q_density_x(x_A, x_B, p)) + np.log(q_density_p(p_A, p_B, p))
    np.testing.assert_allclose(full, split, rtol=0.0, atol=1e-10)


def test_q_sector_factors_normalized():
    p = SqueezeParams(0.7)
    total_x, _ = integrate.dblquad(lambda x_B, x_A: float(q_density_x(x_A, x_B, p)), -20, 20, -20, 20)
    total_p, _ = integrate.dblquad(lambda p_B, p_A: float(q_density_p(p_A, p_B, p)), -20, 20, -20, 20)
    assert total_x == pytest.approx(1.0, abs=1e-7)
    assert total_p == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize(
    "r, gT, diff, total",
    [
        (0.0, 0.0, 2.0, 2.0),
        (2.0, 0.0, 1.0183, 55.598),
        (2.0, 2.0, 2.0, 2981.96),
    ],
)
def test_q_sector_variances_values(r, gT, diff, total):
    x = q_sector_variances(SqueezeParams(r), gT, "x")
    assert x.variance_diff == pytest.approx(diff, abs=1e-3)
    assert x.variance_sum == pytest.approx(total, abs=1e-2)
    p_sec = q_sector_variances(SqueezeParams(r), gT, "p")
    assert (p_sec.variance_sum, p_sec.variance_diff) == (x.variance_diff, x.variance_sum)


def test_q_sector_variances_exact_formula():
    for r in (0.0, 0.5, 2.0):
        for gT in (0.0, 1.0, 2.5):
            x = q_sector_variances(SqueezeParams(r), gT)
            assert x.variance_diff == 1.0 + math.exp(2.0 * gT) * math.exp(-2.0 * r)
            assert x.variance_sum == 1.0 + math.exp(2.0 * gT) * math.exp(2.0 * r)


def test_q_sector_variances_validation():
    with pytest.raises(DomainError):
        q_sector_variances(SqueezeParams(1.0), -0.5)
    with pytest.raises(DomainError):
        q_sector_variances(SqueezeParams(1.0), 1.0, "z")
    with pytest.raises(DomainError):
        SectorGaussian(variance_sum=0.0, variance_diff=1.0, sector="x")


def test_large_r_difference_hits_hidden_vacuum_level():
    x = q_sector_variances(SqueezeParams(4.0), 0.0)
    assert abs(x.variance_diff - 1.0) < 1e-3


@pytest.mark.parametrize("r", [0.0, 1.0, 2.0])
def test_q_variance_exceeds_symmetric_by_half(r):
    p = SqueezeParams(r)
    assert q_single_quadrature_variance(p) - quadrature_variance(p) == pytest.approx(Q_EXCESS)
    # Var(x_A) = (Var(x+) + Var(x−))/4 dalla Q di settore
    x = q_sector_variances(p, 0.0)
    assert (x.variance_sum + x.variance_diff) / 4.0 == pytest.approx(q_single_quadrature_variance(p))


# ---------------------------------------------------------------------------
# Campionamento
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("sector", ["x", "p"])
def test_sample_q_moments(sector):
    p = SqueezeParams(1.0)
    n = 200_000
    draws = sample_q(p, 0.5, sector, n, RngStream(31))
    target = q_sector_variances(p, 0.5, sector)
    for column, v in ((0, target.variance_sum), (1, target.variance_diff)):
        se = v * math.sqrt(2.0 / (n - 1))
        assert abs(np.var(draws[:, column], ddof=1) - v) < 5 * se
    cov = float(np.mean(draws[:, 0] * draws[:, 1]))
    se_cov = math.sqrt(target.variance_sum * target.variance_diff / n)
    assert abs(cov) < 5 * se_cov


def test_sample_q_is_deterministic_per_stream():
    p = SqueezeParams(2.0)
    a = sample_q(p, 1.0, "x", 100, RngStream(7).child(3))
    b = sample_q(p, 1.0, "x", 100, RngStream(7).child(3))
    c = sample_q(p, 1.0, "x", 100, RngStream(7).child(4))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_q_requires_positive_count():
    with pytest.raises(DomainError):
        sample_q(SqueezeParams(1.0), 0.0, "x", 0, RngStream(1))


def test_rng_stream_paths():
    root = RngStream(5)
    child = root.child(2).child(7)
    assert child.path == (2, 7)
    assert child.seed == 5
    assert np.array_equal(child.generator().random(4), RngStream(5, (2, 7)).generator().random(4))
    assert not np.array_equal(root.generator().random(4), child.generator().random(4))


# ---------------------------------------------------------------------------
# Wigner
# ---------------------------------------------------------------------------

def test_wigner_density_vacuum_origin():
    assert wigner_density(ORIGIN, SqueezeParams(0.0)) == pytest.approx(0.10132, abs=1e-5)


@pytest.mark.parametrize("r", [0.5, 2.0])
def test_wigner_density_non_negative(r):
    pts = np.random.default_rng(int(10 * r)).normal(0.0, 3.0, (100_000, 4))
    values = wigner_density_arrays(*pts.T, SqueezeParams(r))
    assert np.all(values >= 0.0)


def test_wigner_density_normalization_gauss_hermite():
    r = 0.5
    p = SqueezeParams(r)
    e2r = math.exp(2.0 * r)
    variances = (e2r, 1.0 / e2r, 1.0 / e2r, e2r)
    total = _gauss_hermite_4d(_from_sum_difference(wigner_density_arrays, p), variances)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_wigner_marginal_xA_pB_is_product():
    m0 = wigner_marginal_xA_pB(SqueezeParams(0.0))
    np.testing.assert_allclose(m0.matrix, 0.5 * np.eye(2))

    m2 = wigner_marginal_xA_pB(SqueezeParams(2.0))
    assert m2.cov[0][0] == pytest.approx(13.6541, abs=1e-4)
    assert m2.cov[1][1] == m2.cov[0][0]
    assert m2.cov[0][1] == 0.0
    assert m2.marginal(1).variance == SqueezeParams(2.0).sigma_sq


@pytest.mark.parametrize("x_A, p_B", [(0.0, 0.0), (0.8, -0.3), (-1.2, 1.5)])
def test_wigner_marginal_by_integration(x_A, p_B):
    p = SqueezeParams(0.5)
    value, _ = integrate.dblquad(
        lambda p_A, x_B: float(wigner_density_arrays(x_A, p_A, x_B, p_B, p)),
        -12.0,
        12.0,
        -12.0,
        12.0,
        epsabs=1e-12,
        epsrel=1e-12,
    )
    assert value == pytest.approx(float(wigner_marginal_density(x_A, p_B, p)), abs=1e-8)
    assert float(wigner_marginal_density(x_A, p_B, p)) == pytest.approx(
        float(wigner_marginal_xA_pB(p).pdf(x_A, p_B)), rel=1e-12
    )


def test_phase_point_rejects_non_finite():
    with pytest.raises(DomainError):
        PhasePoint(0.0, float("nan"), 0.0, 0.0)
