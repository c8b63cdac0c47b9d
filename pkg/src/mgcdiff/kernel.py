"""Closed-form MGC diffusion quantities under a Gaussian-mixture measure.

For a mixture q = sum_j a_j N(theta_j, Sigma_j) and scale eps the kernel,
stationary density, Gram inner product W and the one-step diffusion distance
are finite sums of Gaussian densities.  Every function accepts either single
points of shape (m,) or batches of shape (N, m); batched ``x``/``z`` pairs are
evaluated row by row.
"""
import hashlib

import numpy as np
from scipy.special import logsumexp

from .errors import NegligibleMassError, NumericalError, ValidationError
from .gaussian import LOG_2PI, cholesky, log_det_from_chol, symmetrize

NU_FLOOR = 1e-12


def _chol_precision(chol):
    inv = np.linalg.inv(chol)
    return np.swapaxes(inv, -1, -2) @ inv


def _batched_logpdf(x, means, prec, log_dets):
    """log g(x; means, cov) with covariances given by precision and log-det.

    Leading axes of ``x``, ``means``, ``prec`` and ``log_dets`` broadcast.
    """
    diff = x - means
    m = x.shape[-1]
    maha = np.einsum("...a,...ab,...b->...", diff, prec, diff)
    return -0.5 * (m * LOG_2PI + log_dets + maha)


class MgcContext:
    """A mixture model together with the scale eps and the derived matrices.

    Attributes
    ----------
    sigma_tilde : (n, m, m) array, eps/2 I + Sigma_j
    d : (n, m, m) array, (eps^-1 I + (eps I + 4 Sigma_j)^-1)^-1
    affine_m, affine_v : the affine maps c_j(x) = affine_m[j] @ x + affine_v[j]
    """

    def __init__(self, model, epsilon):
        epsilon = float(epsilon)
        if not np.isfinite(epsilon) or epsilon <= 0:
            raise ValidationError(f"epsilon must be positive and finite, got {epsilon}")
        self.model = model
        self.epsilon = epsilon
        n, m = model.n_components, model.dim
        eye = np.eye(m)

        st, dd, am, av = [], [], [], []
        for j in range(n):
            sig = model.covariances[j]
            inv_e4 = np.linalg.inv(epsilon * eye + 4.0 * sig)
            inv_e4 = 0.5 * (inv_e4 + inv_e4.T)
            d = np.linalg.inv(eye / epsilon + inv_e4)
            d = symmetrize(d, what="D matrix", component=j)
            st.append(symmetrize(0.5 * epsilon * eye + sig, what="smoothed covariance", component=j))
            dd.append(d)
            am.append(d @ (eye / epsilon - inv_e4))
            av.append(2.0 * d @ inv_e4 @ model.means[j])
        self.sigma_tilde = np.array(st)
        self.d = np.array(dd)
        self.affine_m = np.array(am)
        self.affine_v = np.array(av)

        self.st_chol = np.array([cholesky(s, "smoothed covariance", j) for j, s in enumerate(st)])
        self.st_logdet = np.array([log_det_from_chol(c) for c in self.st_chol])
        self.d_chol = np.array([cholesky(s, "D matrix", j) for j, s in enumerate(dd)])
        self.d_logdet = np.array([log_det_from_chol(c) for c in self.d_chol])
        pair = self.d[:, None] + self.d[None, :]
        dsum_chol = np.linalg.cholesky(pair)
        self.dsum_logdet = 2.0 * np.sum(
            np.log(np.diagonal(dsum_chol, axis1=-2, axis2=-1)), axis=-1
        )
        self.st_prec = _chol_precision(self.st_chol)
        self.d_prec = _chol_precision(self.d_chol)
        self.dsum_prec = _chol_precision(dsum_chol)
        self.log_weights = np.log(model.weights, where=model.weights > 0,
                                  out=np.full(n, -np.inf))
        for arr in (self.sigma_tilde, self.d, self.affine_m, self.affine_v):
            arr.setflags(write=False)

    @property
    def dim(self):
        return self.model.dim

    @property
    def n_components(self):
        return self.model.n_components

    @property
    def tied(self):
        return self.model.tied

    def fingerprint(self):
        """Short hex digest identifying the model parameters and eps."""
        h = hashlib.sha256()
        mdl = self.model
        for arr in (mdl.weights, mdl.means, mdl.covariances):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(np.float64(self.epsilon).tobytes())
        h.update(b"tied" if mdl.tied else b"full")
        return h.hexdigest()[:16]

    def points(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,) or x.ndim > 2:
            raise ValidationError(
                f"expected points of dimension {self.dim}, got array of shape {x.shape}"
            )
        return np.atleast_2d(x)

    def log_h(self, x):
        """(N, n) array of log a_j g_m(x; theta_j, Sigma~_j)."""
        x = self.points(x)
        n = self.n_components
        means = np.broadcast_to(self.model.means, (x.shape[0], n, self.dim))
        return self.log_weights + _batched_logpdf(x[:, None, :], means, self.st_prec, self.st_logdet)

    def centers(self, x):
        """(N, n, m) array of c_j(x)."""
        x = self.points(x)
        return np.einsum("jab,nb->nja", self.affine_m, x) + self.affine_v


def context_new(model, epsilon):
    return MgcContext(model, epsilon)


def _unbatch(x, out):
    return float(out[0]) if np.ndim(x) == 1 else out


def log_stationary_density(ctx, x):
    return logsumexp(ctx.log_h(x), axis=1)


def stationary_density(ctx, x):
    """nu_eps(x) = sum_j a_j g_m(x; theta_j, eps/2 I + Sigma_j)."""
    return _unbatch(x, np.exp(log_stationary_density(ctx, x)))


def log_kernel(ctx, x, z):
    xb, zb = ctx.points(x), ctx.points(z)
    xb, zb = np.broadcast_arrays(xb, zb)
    c = ctx.centers(xb)
    log_g = _batched_logpdf(zb[:, None, :], c, ctx.d_prec, ctx.d_logdet)
    return logsumexp(ctx.log_h(xb) + log_g, axis=1)


def kernel(ctx, x, z):
    """k_eps(x, z) = sum_j a_j g_m(x; theta_j, Sigma~_j) g_m(z; c_j(x), D_j)."""
    return _unbatch(x if np.ndim(z) == 1 else z, np.exp(log_kernel(ctx, x, z)))


def _check_mass(log_nu, floor):
    if floor > 0 and np.any(log_nu < np.log(floor)):
        bad = float(np.exp(np.min(log_nu)))
        raise NegligibleMassError(bad, floor)


def transition(ctx, x, z, nu_floor=NU_FLOOR):
    """p_eps(x, z) = k_eps(x, z) / nu_eps(x)."""
    xb, zb = np.broadcast_arrays(ctx.points(x), ctx.points(z))
    log_nu = log_stationary_density(ctx, xb)
    _check_mass(log_nu, nu_floor)
    out = np.exp(log_kernel(ctx, xb, zb) - log_nu)
    return _unbatch(x if np.ndim(z) == 1 else z, out)


def _log_w_parts(ctx, log_hx, cx, log_hz, cz):
    """log W for row-aligned pairs given per-point h and centers."""
    # G[p, j, i] = g(c_j(x_p); c_i(z_p), D_j + D_i)
    P = cx.shape[0]
    log_g = _batched_logpdf(cx[:, :, None, :], cz[:, None, :, :], ctx.dsum_prec, ctx.dsum_logdet)
    terms = log_hx[:, :, None] + log_hz[:, None, :] + log_g
    return logsumexp(terms.reshape(P, -1), axis=1)


def log_inner_product_w(ctx, x, z):
    xb, zb = np.broadcast_arrays(ctx.points(x), ctx.points(z))
    return _log_w_parts(ctx, ctx.log_h(xb), ctx.centers(xb), ctx.log_h(zb), ctx.centers(zb))


def inner_product_w(ctx, x, z):
    """W_{x,z} = <k_eps(x, .), k_eps(z, .)> in L2."""
    return _unbatch(x if np.ndim(z) == 1 else z, np.exp(log_inner_product_w(ctx, x, z)))


class _PointCache:
    """Per-point quantities reused across many pairs."""

    def __init__(self, ctx, x):
        self.x = ctx.points(x)
        self.log_h = ctx.log_h(self.x)
        self.log_nu = logsumexp(self.log_h, axis=1)
        self.centers = ctx.centers(self.x)
        self.log_wself = _log_w_parts(ctx, self.log_h, self.centers, self.log_h, self.centers)
        # normalized self term W_xx / nu(x)^2
        self.self_term = np.exp(self.log_wself - 2.0 * self.log_nu)


def _squared_distance(ctx, a, ia, b, ib, chunk=4096):
    out = np.empty(len(ia))
    for s in range(0, len(ia), chunk):
        sa, sb = ia[s:s + chunk], ib[s:s + chunk]
        log_w = _log_w_parts(ctx, a.log_h[sa], a.centers[sa], b.log_h[sb], b.centers[sb])
        cross = np.exp(log_w - a.log_nu[sa] - b.log_nu[sb])
        out[s:s + chunk] = a.self_term[sa] + b.self_term[sb] - 2.0 * cross
    return out


def _finish_distance(d2, scale):
    tol = 1e-12 * np.maximum(scale, 1.0)
    if np.any(d2 < -tol):
        worst = float(np.min(d2))
        raise NumericalError(f"squared diffusion distance is negative ({worst:.3e})")
    return np.sqrt(np.maximum(d2, 0.0))


def squared_diffusion_distance(ctx, x, z, nu_floor=NU_FLOOR):
    """Squared one-step diffusion distance for row-aligned pairs (no clamping)."""
    xb, zb = np.broadcast_arrays(ctx.points(x), ctx.points(z))
    a, b = _PointCache(ctx, xb), _PointCache(ctx, zb)
    _check_mass(a.log_nu, nu_floor)
    _check_mass(b.log_nu, nu_floor)
    idx = np.arange(len(xb))
    return _squared_distance(ctx, a, idx, b, idx), a.self_term + b.self_term


def diffusion_distance(ctx, x, z, nu_floor=NU_FLOOR):
    """d(x, z) = || p_eps(x, .) - p_eps(z, .) ||_{L2}.

    Computed as the square root of
    ``W_xx / nu(x)^2 + W_zz / nu(z)^2 - 2 W_xz / (nu(x) nu(z))``; negative
    round-off down to -1e-12 (relative to the self terms) is clamped to zero.
    """
    d2, scale = squared_diffusion_distance(ctx, x, z, nu_floor)
    return _unbatch(x if np.ndim(z) == 1 else z, _finish_distance(d2, scale))


def pairwise_diffusion_distances(ctx, x, z=None, nu_floor=NU_FLOOR):
    """Matrix of diffusion distances between the rows of ``x`` and ``z``.

    Per-point quantities are computed once and shared across the matrix.
    """
    a = _PointCache(ctx, x)
    b = a if z is None else _PointCache(ctx, z)
    _check_mass(a.log_nu, nu_floor)
    _check_mass(b.log_nu, nu_floor)
    ia, ib = np.meshgrid(np.arange(len(a.x)), np.arange(len(b.x)), indexing="ij")
    ia, ib = ia.ravel(), ib.ravel()
    d2 = _squared_distance(ctx, a, ia, b, ib)
    d = _finish_distance(d2, a.self_term[ia] + b.self_term[ib])
    d = d.reshape(len(a.x), len(b.x))
    if z is None:
        np.fill_diagonal(d, 0.0)
    return d


def indexed_squared_distances(ctx, x, ia, ib, nu_floor=NU_FLOOR):
    """Squared diffusion distances between rows ``x[ia]`` and ``x[ib]``.

    Per-point quantities are computed once for all of ``x``.
    """
    a = _PointCache(ctx, x)
    _check_mass(a.log_nu, nu_floor)
    ia, ib = np.asarray(ia), np.asarray(ib)
    return _squared_distance(ctx, a, ia, a, ib)
