import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.stats import multivariate_normal

from conftest import random_spd
from mgcdiff import (
    GaussianParams,
    NotPositiveDefiniteError,
    ValidationError,
    gaussian_correlation,
    gaussian_logpdf,
    gaussian_pdf,
    gaussian_product,
)


def test_standard_normal_mode():
    p = GaussianParams([0.0], [[1.0]])
    assert gaussian_logpdf([0.0], p) == pytest.approx(-0.5 * np.log(2 * np.pi), abs=1e-14)


def test_density_at_mean_2d():
    p = GaussianParams([0.3, -1.2], np.eye(2))
    assert gaussian_logpdf([0.3, -1.2], p) == pytest.approx(-np.log(2 * np.pi), abs=1e-14)


def test_scalar_offset_value():
    # mpmath reference
    p = GaussianParams([1.0], [[4.0]])
    assert gaussian_logpdf([3.0], p) == pytest.approx(-2.112085713764618, abs=1e-12)


def test_batch_matches_scipy(rng):
    cov = random_spd(rng, 3)
    p = GaussianParams(rng.standard_normal(3), cov)
    x = rng.standard_normal((20, 3))
    ref = multivariate_normal(p.mean, cov).logpdf(x)
    np.testing.assert_allclose(gaussian_logpdf(x, p), ref, rtol=1e-12)


def test_non_spd_reports_pivot():
    with pytest.raises(NotPositiveDefiniteError) as err:
        GaussianParams([0.0, 0.0], [[1.0, 0.0], [0.0, -1.0]])
    assert err.value.pivot == 1


def test_asymmetric_rejected():
    with pytest.raises(ValidationError):
        GaussianParams([0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        gaussian_logpdf([0.0, 1.0], GaussianParams([0.0], [[1.0]]))


def test_product_of_standard_normals():
    p = GaussianParams([0.0], [[1.0]])
    merged, scale = gaussian_product(p, p)
    assert merged.cov[0, 0] == pytest.approx(0.5)
    assert merged.mean[0] == pytest.approx(0.0)
    assert scale == pytest.approx(1 / np.sqrt(4 * np.pi), rel=1e-14)
    integral = quad(lambda t: gaussian_pdf([t], p) ** 2, -np.inf, np.inf)[0]
    assert integral == pytest.approx(scale, rel=1e-10)


def test_product_flat_prior_limit():
    wide = GaussianParams([5.0], [[1e10]])
    narrow = GaussianParams([-1.0], [[0.3]])
    merged, _ = gaussian_product(wide, narrow)
    assert merged.mean[0] == pytest.approx(-1.0, abs=1e-8)
    assert merged.cov[0, 0] == pytest.approx(0.3, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 3))
def test_product_identity_pointwise(seed, m):
    rng = np.random.default_rng(seed)
    pi = GaussianParams(rng.standard_normal(m), random_spd(rng, m))
    pj = GaussianParams(rng.standard_normal(m), random_spd(rng, m))
    merged, scale = gaussian_product(pi, pj)
    y = rng.standard_normal((5, m))
    lhs = gaussian_logpdf(y, pi) + gaussian_logpdf(y, pj)
    rhs = gaussian_logpdf(y, merged) + np.log(scale)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


def test_correlation_values(rng):
    p = GaussianParams([0.0], [[1.0]])
    assert gaussian_correlation(p, p) == pytest.approx(0.28209479177387814, rel=1e-14)
    cov_i, cov_j = random_spd(rng, 2), random_spd(rng, 2)
    a = GaussianParams([1.0, 1.0], cov_i)
    b = GaussianParams([1.0, 1.0], cov_j)
    peak = (2 * np.pi) ** -1 * np.linalg.det(cov_i + cov_j) ** -0.5
    assert gaussian_correlation(a, b) == pytest.approx(peak, rel=1e-12)
    far = GaussianParams([100.0, 0.0], cov_j)
    assert gaussian_correlation(a, far) < 1e-300
