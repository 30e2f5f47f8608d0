"""Marginal model tests: quadrature, bisection and finite-difference oracles."""

import numpy as np
import pytest
from scipy.integrate import quad

from vsuq.errors import DomainError
from vsuq.families import MarginalFamily as M
from vsuq.marginals import MarginalModel, ParameterBox, data_supported, fit_box

MODELS = [
    MarginalModel(M.GAUSS, (0.0, 1.0)),
    MarginalModel(M.GAUSS, (2.5, 0.2)),
    MarginalModel(M.GAMMA, (2.0, 1.5)),
    MarginalModel(M.LOGNORMAL, (0.3, 0.6)),
    MarginalModel(M.UNIFORM, (-1.0, 3.0)),
]


# ---------------------------------------------------------------------------
# pdf
# ---------------------------------------------------------------------------


def test_standard_normal_pdf_at_zero():
    m = MarginalModel(M.GAUSS, (0.0, 1.0))
    assert m.pdf(0.0) == pytest.approx(0.3989422804, abs=1e-9)


def test_uniform_pdf_inside_support():
    m = MarginalModel(M.UNIFORM, (0.0, 1.0))
    assert m.pdf(0.5) == 1.0
    assert m.pdf(1.5) == 0.0


def test_gamma_pdf_integrates_to_one():
    m = MarginalModel(M.GAMMA, (2.0, 1.5))
    val, _ = quad(m.pdf, 0.0, 60.0, epsabs=1e-10)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_pdf_zero_outside_support():
    assert MarginalModel(M.GAMMA, (2.0, 1.5)).pdf(-0.5) == 0.0
    assert MarginalModel(M.LOGNORMAL, (0.0, 1.0)).pdf(-2.0) == 0.0


# ---------------------------------------------------------------------------
# cdf
# ---------------------------------------------------------------------------


def test_gauss_cdf_at_mean_is_half():
    assert MarginalModel(M.GAUSS, (2.5, 0.2)).cdf(2.5) == pytest.approx(0.5, abs=1e-15)


def test_lognormal_median():
    m = MarginalModel(M.LOGNORMAL, (0.3, 0.6))
    assert m.cdf(np.exp(0.3)) == pytest.approx(0.5, abs=1e-14)


def test_gamma_cdf_against_pdf_quadrature():
    m = MarginalModel(M.GAMMA, (2.0, 1.5))
    val, _ = quad(m.pdf, 0.0, 3.0, epsabs=1e-12)
    assert m.cdf(3.0) == pytest.approx(val, abs=1e-7)


@pytest.mark.parametrize("m", MODELS)
def test_cdf_monotone_with_limits(m):
    x = np.linspace(m.quantile(0.001) - 1.0, m.quantile(0.999) + 1.0, 300)
    c = m.cdf(x)
    assert np.all(np.diff(c) >= -1e-15)
    assert m.cdf(-1e12) == pytest.approx(0.0, abs=1e-12)
    assert m.cdf(1e12) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# quantile
# ---------------------------------------------------------------------------


def test_gauss_quantile_median():
    assert MarginalModel(M.GAUSS, (0.0, 0.2)).quantile(0.5) == 0.0


def test_uniform_quantile_affine():
    m = MarginalModel(M.UNIFORM, (-1.0, 3.0))
    p = np.linspace(0, 1, 9)
    assert np.allclose(m.quantile(p), -1.0 + p * 4.0)


def test_gauss_quantile_against_bisection_oracle():
    m = MarginalModel(M.GAUSS, (0.0, 0.2))
    lo, hi = -10.0, 10.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if m.cdf(mid) < 0.975:
            lo = mid
        else:
            hi = mid
    assert m.quantile(0.975) == pytest.approx(0.5 * (lo + hi), abs=1e-10)


@pytest.mark.parametrize("m", MODELS)
def test_quantile_cdf_roundtrip(m, rng):
    p = rng.uniform(1e-4, 1.0 - 1e-4, 1000)
    assert np.max(np.abs(m.cdf(m.quantile(p)) - p)) < 1e-8


@pytest.mark.parametrize("m", MODELS)
def test_pdf_matches_cdf_finite_difference(m, rng):
    x = m.quantile(rng.uniform(0.05, 0.95, 200))
    e = 1e-6 * max(1.0, float(np.max(np.abs(x))))
    fd = (m.cdf(x + e) - m.cdf(x - e)) / (2 * e)
    pdf = m.pdf(x)
    assert np.max(np.abs(pdf - fd) / np.maximum(np.abs(pdf), 1e-10)) < 1e-5


@pytest.mark.parametrize("m", MODELS)
def test_transformed_uniform_moments(m, rng):
    u = rng.uniform(0.0, 1.0, 100_000)
    x = m.quantile(np.clip(u, 1e-12, 1 - 1e-12))
    mean_ref, _ = quad(lambda p: m.quantile(p), 0, 1, limit=200)
    se = x.std(ddof=1) / np.sqrt(x.size)
    assert abs(x.mean() - mean_ref) < 3 * se


def test_invalid_beta_raises_at_construction():
    with pytest.raises(DomainError):
        MarginalModel(M.GAUSS, (0.0, -1.0))
    with pytest.raises(DomainError):
        MarginalModel(M.GAMMA, (0.0, 1.0))
    with pytest.raises(DomainError):
        MarginalModel(M.UNIFORM, (2.0, 1.0))


# ---------------------------------------------------------------------------
# parameter boxes
# ---------------------------------------------------------------------------


def test_parameter_box_invariants():
    box = ParameterBox((0.0, 1.0), (2.0, 3.0))
    assert box.lengths == (2.0, 2.0)
    assert box.measure() == 4.0
    with pytest.raises(DomainError):
        ParameterBox((1.0,), (1.0,))


@pytest.mark.parametrize("fam", [M.GAUSS, M.GAMMA, M.LOGNORMAL, M.UNIFORM])
def test_fit_box_contains_estimate(fam, rng):
    x = rng.gamma(3.0, 2.0, 500)  # positive data fits every family
    est, box = fit_box(fam, x)
    for e, lo, hi in zip(est, box.lows, box.highs):
        assert lo <= e <= hi
        assert lo < hi
    # models built anywhere inside the box are valid
    mid = tuple(0.5 * (l + h) for l, h in zip(box.lows, box.highs))
    MarginalModel(fam, mid)


def test_fit_box_rejects_unsupported_data(rng):
    x = rng.normal(0.0, 1.0, 200)
    assert not data_supported(M.GAMMA, x)
    with pytest.raises(DomainError):
        fit_box(M.LOGNORMAL, x)
    with pytest.raises(DomainError):
        fit_box(M.GAUSS, x[:5])  # too few observations
