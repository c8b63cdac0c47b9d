"""Gaussian mixture model: representation, density, EM fitting, sampling, I/O."""
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DegenerateComponentError,
    NotPositiveDefiniteError,
    ValidationError,
)
from .gaussian import GaussianParams, cholesky, logpdf_chol, symmetrize

WEIGHT_SUM_TOL = 1e-12
COV_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class GmmModel:
    """Mixture sum_j a_j N(theta_j, Sigma_j).

    Parameters
    ----------
    weights : array of shape (n,)
    means : array of shape (n, m)
    covariances : array of shape (n, m, m)
    tied : bool
        If set, all covariances must be bit-identical.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    tied: bool = False
    chols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        mu = np.asarray(self.means, dtype=float)
        if mu.ndim == 1:
            mu = mu[:, None] if w.size > 1 else mu[None, :]
        cov = np.asarray(self.covariances, dtype=float)
        if cov.ndim == 2:
            cov = np.broadcast_to(cov, (w.size,) + cov.shape).copy()
        if w.ndim != 1 or w.size == 0:
            raise ValidationError("weights must be a non-empty vector")
        n, m = w.size, mu.shape[-1]
        if mu.shape != (n, m):
            raise ValidationError(f"means: expected shape ({n}, m), got {mu.shape}")
        if cov.shape != (n, m, m):
            raise ValidationError(f"covariances: expected shape ({n}, {m}, {m}), got {cov.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(mu))):
            raise ValidationError("weights and means must be finite")
        if np.any(w < 0):
            raise ValidationError(f"weights: negative entry at component {int(np.argmin(w))}")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights: sum to {w.sum():.15g}, expected 1")
        cov = np.stack([symmetrize(c, component=j) for j, c in enumerate(cov)])
        if self.tied and not all(np.array_equal(cov[0], c) for c in cov[1:]):
            raise ValidationError("covariances: tied model has differing covariances")
        chols = np.stack([cholesky(c, component=j) for j, c in enumerate(cov)])
        for name, val in (("weights", w), ("means", mu), ("covariances", cov), ("chols", chols)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "tied", bool(self.tied))

    @property
    def n_components(self):
        return self.weights.size

    @property
    def dim(self):
        return self.means.shape[1]

    def component(self, j):
        return GaussianParams(self.means[j], self.covariances[j])

    def component_logpdf(self, r):
        """Array (N, n) of log g_m(r; theta_j, Sigma_j) for a batch of points."""
        r = _as_points(r, self.dim)
        return np.stack(
            [logpdf_chol(r, self.means[j], self.chols[j]) for j in range(self.n_components)],
            axis=-1,
        )

    def __eq__(self, other):
        if not isinstance(other, GmmModel):
            return NotImplemented
        return (
            self.tied == other.tied
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.means, other.means)
            and np.array_equal(self.covariances, other.covariances)
        )

    __hash__ = None


def _as_points(r, dim):
    r = np.atleast_2d(np.asarray(r, dtype=float))
    if r.shape[-1] != dim:
        raise ValidationError(f"points have dimension {r.shape[-1]}, model has {dim}")
    return r


def gmm_density(model, r):
    """q(r) = sum_j a_j g_m(r; theta_j, Sigma_j) for a point or a batch of points."""
    single = np.ndim(r) == 1
    logp = model.component_logpdf(r)
    with np.errstate(divide="ignore"):
        out = np.exp(logsumexp(logp + np.log(model.weights), axis=1))
    return float(out[0]) if single else out


def gmm_sample(model, count, seed=None):
    """Draw ``count`` i.i.d. points; returns an array of shape (count, m)."""
    if count < 0:
        raise ValidationError("count must be non-negative")
    rng = np.random.default_rng(seed)
    comps = rng.choice(model.n_components, size=count, p=model.weights)
    z = rng.standard_normal((count, model.dim))
    return model.means[comps] + np.einsum("nij,nj->ni", model.chols[comps], z)


def _kmeanspp(X, k, rng):
    centers = [X[rng.integers(len(X))]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(len(X))
        else:
            idx = rng.choice(len(X), p=d2 / total)
        centers.append(X[idx])
        d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
    return np.array(centers)


def _floored(cov, j):
    m = cov.shape[0]
    tr = np.trace(cov)
    if not np.isfinite(tr) or tr <= 0:
        raise DegenerateComponentError(j, "zero scatter")
    cov = 0.5 * (cov + cov.T) + COV_FLOOR * tr / m * np.eye(m)
    try:
        cholesky(cov, component=j)
    except NotPositiveDefiniteError as exc:
        raise DegenerateComponentError(j, str(exc)) from None
    return cov


def _log_resp(X, weights, means, covs):
    logp = np.stack(
        [logpdf_chol(X, means[j], cholesky(covs[j], component=j)) for j in range(len(weights))],
        axis=1,
    )
    with np.errstate(divide="ignore"):
        joint = logp + np.log(weights)
    norm = logsumexp(joint, axis=1)
    return joint - norm[:, None], float(np.mean(norm))


def gmm_fit_em(data, n_components, tied=False, seed=0, tol=1e-6, max_iter=500,
               return_history=False):
    """Maximum-likelihood mixture fit by expectation-maximization.

    Means are seeded k-means++ style, covariances start at the pooled sample
    covariance and weights uniform.  Each M-step adds
    ``1e-8 * trace(Sigma) / m`` to the covariance diagonal.  Iteration stops
    when the mean per-point log-likelihood improves by less than ``tol``.

    With ``return_history`` the per-iteration mean log-likelihoods are
    returned alongside the model.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] == 0:
        raise ValidationError("data is empty")
    if n_components < 1:
        raise ValidationError("n_components must be at least 1")
    if not np.all(np.isfinite(X)):
        raise ValidationError("data contains non-finite values")
    N, m = X.shape
    k = n_components
    rng = np.random.default_rng(seed)

    means = _kmeanspp(X, k, rng)
    pooled = _floored(np.atleast_2d(np.cov(X.T, bias=True)), 0)
    covs = np.repeat(pooled[None], k, axis=0)
    weights = np.full(k, 1.0 / k)

    history = []
    for _ in range(max_iter):
        log_resp, ll = _log_resp(X, weights, means, covs)
        if history and ll - history[-1] < tol:
            history.append(ll)
            break
        history.append(ll)

        resp = np.exp(log_resp)
        nk = resp.sum(axis=0)
        empty = np.flatnonzero(nk < 1e-10 * N)
        if empty.size:
            raise DegenerateComponentError(int(empty[0]), "no responsibility mass")
        weights = nk / N
        means = (resp.T @ X) / nk[:, None]
        scatter = np.stack(
            [(resp[:, j, None] * (X - means[j])).T @ (X - means[j]) for j in range(k)]
        )
        if tied:
            shared = _floored(scatter.sum(axis=0) / N, 0)
            covs = np.repeat(shared[None], k, axis=0)
        else:
            covs = np.stack([_floored(scatter[j] / nk[j], j) for j in range(k)])
    weights = weights / weights.sum()
    model = GmmModel(weights, means, covs, tied=tied)
    return (model, history) if return_history else model


def gmm_store(model, path):
    doc = {
        "dim": model.dim,
        "tied": model.tied,
        "weights": model.weights.tolist(),
        "means": model.means.tolist(),
        "covariances": [c.ravel().tolist() for c in model.covariances],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def gmm_load(path):
    """Read a model written by :func:`gmm_store`; all invariants are re-checked."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not a JSON document ({exc})") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be an object")
    for key in ("dim", "tied", "weights", "means", "covariances"):
        if key not in doc:
            raise ValidationError(f"{path}: missing field '{key}'")

    def field_array(key, shape):
        try:
            arr = np.asarray(doc[key], dtype=float)
        except (TypeError, ValueError):
            raise ValidationError(f"{path}: field '{key}' is not numeric") from None
        if arr.shape != shape:
            raise ValidationError(f"{path}: field '{key}' has shape {arr.shape}, expected {shape}")
        return arr

    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ValidationError(f"{path}: field 'dim' must be a positive integer")
    if not isinstance(doc["tied"], bool):
        raise ValidationError(f"{path}: field 'tied' must be a boolean")
    if not isinstance(doc["weights"], list) or not doc["weights"]:
        raise ValidationError(f"{path}: field 'weights' must be a non-empty list")
    n = len(doc["weights"])
    weights = field_array("weights", (n,))
    means = field_array("means", (n, dim))
    covs = field_array("covariances", (n, dim * dim)).reshape(n, dim, dim)
    return GmmModel(weights, means, covs, tied=doc["tied"])


def read_points(path):
    """Load a header-less CSV of points, one per row."""
    try:
        pts = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed point file ({exc})") from None
    return pts


def write_points(path, points):
    np.savetxt(path, np.atleast_2d(points), delimiter=",", fmt="%.17g")


__all__ = [
    "GmmModel",
    "gmm_density",
    "gmm_fit_em",
    "gmm_sample",
    "gmm_store",
    "gmm_load",
    "read_points",
    "write_points",
]
