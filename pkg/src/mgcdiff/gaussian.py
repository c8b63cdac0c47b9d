"""Multivariate normal densities and the closed-form Gaussian identities.

All evaluations go through a Cholesky factor; log-determinants are read off
the factor diagonal so that nothing underflows in moderate dimension.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.linalg.lapack import dpotrf

from .errors import NotPositiveDefiniteError, ValidationError

LOG_2PI = np.log(2.0 * np.pi)
ASYMMETRY_TOL = 1e-8


def symmetrize(cov, what="covariance", component=None):
    """Return ``(cov + cov.T) / 2`` after checking the input is nearly symmetric."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValidationError(f"{what} must be a square matrix, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise ValidationError(f"{what} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(cov))))
    asym = float(np.max(np.abs(cov - cov.T))) / scale
    if asym >= ASYMMETRY_TOL:
        where = "" if component is None else f" of component {component}"
        raise ValidationError(f"{what}{where} is not symmetric (max asymmetry {asym:.2e})")
    return 0.5 * (cov + cov.T)


def cholesky(cov, what="covariance", component=None):
    """Lower Cholesky factor, raising :class:`NotPositiveDefiniteError` on failure."""
    c, info = dpotrf(np.asarray(cov, dtype=float), lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1, component=component, what=what)
    if info < 0:
        raise ValidationError(f"invalid argument passed to the factorization of {what}")
    return c


def log_det_from_chol(chol):
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def logpdf_chol(x, mean, chol):
    """Log-density of N(mean, L L^T) at the rows of ``x``.

    ``x`` may be a single point of shape (m,) or a batch of shape (N, m).
    """
    x = np.asarray(x, dtype=float)
    m = chol.shape[0]
    diff = np.atleast_2d(x - mean)
    z = solve_triangular(chol, diff.T, lower=True, check_finite=False)
    maha = np.sum(z * z, axis=0)
    out = -0.5 * (m * LOG_2PI + log_det_from_chol(chol) + maha)
    return out[0] if x.ndim == 1 else out


@dataclass(frozen=True)
class GaussianParams:
    """Mean vector and symmetric positive-definite covariance of a normal law."""

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        if mean.ndim != 1:
            raise ValidationError(f"mean must be a vector, got shape {mean.shape}")
        cov = symmetrize(self.cov)
        if cov.shape != (mean.size, mean.size):
            raise ValidationError(
                f"mean has dimension {mean.size} but covariance is {cov.shape}"
            )
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", cholesky(cov))

    @property
    def dim(self):
        return self.mean.size

    @property
    def log_det(self):
        return log_det_from_chol(self.chol)


def _check_point(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (dim,):
        raise ValidationError(f"point has dimension {x.shape[-1:]} but the Gaussian has {dim}")
    return x


def gaussian_logpdf(x, p):
    """Log of the normalized Gaussian density g_m(x; mean, cov).

    Accepts a single point (m,) or a batch (N, m).
    """
    x = _check_point(x, p.dim)
    return logpdf_chol(x, p.mean, p.chol)


def gaussian_pdf(x, p):
    return np.exp(gaussian_logpdf(x, p))


def _check_pair(pi, pj):
    if pi.dim != pj.dim:
        raise ValidationError(f"dimension mismatch: {pi.dim} vs {pj.dim}")


def gaussian_product(pi, pj):
    """Product of two Gaussian densities as a scaled Gaussian density.

    Returns ``(merged, scale)`` such that, pointwise,
    ``g(y; pi) * g(y; pj) == g(y; merged) * scale``.  The merged precision is
    the sum of the precisions and ``scale = g(mean_i; mean_j, cov_i + cov_j)``.
    """
    _check_pair(pi, pj)
    m = pi.dim
    eye = np.eye(m)
    prec_i = solve_triangular(pi.chol.T, solve_triangular(pi.chol, eye, lower=True), lower=False)
    prec_j = solve_triangular(pj.chol.T, solve_triangular(pj.chol, eye, lower=True), lower=False)
    prec = symmetrize(prec_i + prec_j, what="summed precision")
    chol_prec = cholesky(prec, what="summed precision")
    inv_chol = solve_triangular(chol_prec, eye, lower=True)
    merged_cov = inv_chol.T @ inv_chol
    merged_mean = merged_cov @ (prec_i @ pi.mean + prec_j @ pj.mean)
    merged = GaussianParams(merged_mean, 0.5 * (merged_cov + merged_cov.T))
    return merged, gaussian_correlation(pi, pj)


def gaussian_correlation(pi, pj):
    """L2 inner product of two Gaussian densities, g(mean_i; mean_j, cov_i + cov_j)."""
    _check_pair(pi, pj)
    chol = cholesky(pi.cov + pj.cov, what="summed covariance")
    return float(np.exp(logpdf_chol(pi.mean, pj.mean, chol)))
