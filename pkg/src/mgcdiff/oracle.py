"""Independent numerical ground truth for the closed forms.

Everything here integrates the defining integrals directly on a grid (or with
adaptive quadrature) using only the mixture density and isotropic Gaussian
bumps; none of the product/convolution identities used by the fast path are
involved.  Intended for tests and validation at m <= 3.
"""
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.stats import norm

from .errors import NumericalError, ValidationError
from .gmm import gmm_density

SIGMAS = 6.0
MASS_TOL = 1e-6
SCHEMES = ("tensor-trapezoid", "adaptive")


@dataclass(frozen=True)
class QuadratureSpec:
    lower: np.ndarray
    upper: np.ndarray
    points_per_axis: int = 64
    scheme: str = "tensor-trapezoid"

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValidationError("quadrature box must be finite with matching bounds")
        if np.any(hi <= lo):
            raise ValidationError("quadrature box has an empty axis")
        if self.points_per_axis < 16:
            raise ValidationError("points_per_axis must be at least 16")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"scheme must be one of {SCHEMES}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size


def _factors(ctx, points):
    """(mean, per-axis std) of every Gaussian factor appearing in the integrands."""
    half = np.sqrt(ctx.epsilon / 2.0)
    out = []
    for j in range(ctx.n_components):
        out.append((ctx.model.means[j], np.sqrt(np.diag(ctx.model.covariances[j]))))
    for x in points:
        out.append((x, np.full(ctx.dim, half)))
        for j, c in enumerate(ctx.centers(x)[0]):
            out.append((c, np.sqrt(np.diag(ctx.d[j]))))
    return out


def auto_spec(ctx, *points, scheme="tensor-trapezoid", sigmas=SIGMAS, refine=4.0):
    """Box covering ``sigmas`` standard deviations of every factor, widened by the bump width.

    The spacing is ``refine`` points per smallest standard deviation of any
    integrand (trapezoid error for Gaussian integrands decays like
    exp(-2 pi^2 refine^2)).
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    facs = _factors(ctx, pts)
    lo = np.min([mu - sigmas * sd for mu, sd in facs], axis=0)
    hi = np.max([mu + sigmas * sd for mu, sd in facs], axis=0)
    pad = sigmas * np.sqrt(ctx.epsilon / 2.0)
    lo, hi = lo - pad, hi + pad
    min_sd = min(np.sqrt(ctx.epsilon / 4.0),
                 min(np.sqrt(np.linalg.eigvalsh(c)[0]) for c in ctx.model.covariances))
    h = min_sd / refine
    n_pts = int(max(16, np.ceil(np.max(hi - lo) / h) + 1))
    return QuadratureSpec(lo, hi, n_pts, scheme)


def check_mass(ctx, spec, *points):
    """Raise if any Gaussian factor has less than 1 - 1e-6 of its mass inside the box."""
    for mu, sd in _factors(ctx, [np.asarray(p, dtype=float) for p in points]):
        mass = np.prod(norm.cdf(spec.upper, mu, sd) - norm.cdf(spec.lower, mu, sd))
        if mass < 1.0 - MASS_TOL:
            raise NumericalError(
                f"quadrature box too small: factor centred at {np.round(mu, 4)} keeps mass {mass:.8f}"
            )


class _Grid:
    def __init__(self, ctx, spec):
        if spec.dim != ctx.dim:
            raise ValidationError("quadrature box dimension does not match the model")
        self.ctx = ctx
        self.axes = [np.linspace(a, b, spec.points_per_axis) for a, b in zip(spec.lower, spec.upper)]
        wts = []
        for t in self.axes:
            w = np.full(t.size, t[1] - t[0])
            w[[0, -1]] *= 0.5
            wts.append(w)
        mesh = np.meshgrid(*self.axes, indexing="ij")
        self.shape = mesh[0].shape
        self.points = np.stack([g.ravel() for g in mesh], axis=1)
        self.weights = np.ones(self.shape)
        for ax, w in enumerate(wts):
            shp = [1] * len(self.shape)
            shp[ax] = w.size
            self.weights = self.weights * w.reshape(shp)
        self.q = gmm_density(ctx.model, self.points).reshape(self.shape)
        var = ctx.epsilon / 2.0
        # bump[a][r, y] = g_1(r; y, eps/2) along axis a
        self.bump_1d = [norm.pdf(t[:, None], t[None, :], np.sqrt(var)) for t in self.axes]

    def bump(self, x):
        """Isotropic Gaussian g_m(r; x, eps/2 I) on the grid."""
        sd = np.sqrt(self.ctx.epsilon / 2.0)
        out = np.ones(self.shape)
        for ax, t in enumerate(self.axes):
            shp = [1] * len(self.shape)
            shp[ax] = t.size
            out = out * norm.pdf(t, x[ax], sd).reshape(shp)
        return out

    def kernel_row(self, x):
        """k(x, y) for every grid point y, by quadrature over r."""
        v = self.weights * self.bump(x) * self.q
        for ax, g in enumerate(self.bump_1d):
            v = np.moveaxis(np.tensordot(v, g, axes=([ax], [0])), -1, ax)
        return v


def _points(ctx, *xs):
    out = []
    for x in xs:
        x = np.asarray(x, dtype=float)
        if x.shape != (ctx.dim,):
            raise ValidationError(f"expected a point of dimension {ctx.dim}")
        out.append(x)
    return out


def _prepare(ctx, spec, points):
    if spec is None:
        spec = auto_spec(ctx, *points)
    check_mass(ctx, spec, *points)
    return spec


def _adaptive(fun, spec):
    ranges = list(zip(spec.lower, spec.upper))
    opts = {"epsabs": 1e-14, "epsrel": 1e-11, "limit": 200}
    if spec.dim == 1:
        val, _ = integrate.quad(lambda t: fun(np.array([t])), *ranges[0], **opts)
    else:
        val, _ = integrate.nquad(lambda *t: fun(np.array(t)), ranges, opts=opts)
    return val


def _adaptive_kernel_integrand(ctx):
    sd = np.sqrt(ctx.epsilon / 2.0)

    def bump(r, x):
        return np.prod(norm.pdf(r, x, sd))
    return bump


def kernel_by_quadrature(ctx, x, z, spec=None):
    """int g(r; x, eps/2 I) g(r; z, eps/2 I) q(r) dr."""
    x, z = _points(ctx, x, z)
    spec = _prepare(ctx, spec, (x, z))
    if spec.scheme == "adaptive":
        bump = _adaptive_kernel_integrand(ctx)
        return _adaptive(lambda r: bump(r, x) * bump(r, z) * gmm_density(ctx.model, r), spec)
    g = _Grid(ctx, spec)
    return float(np.sum(g.weights * g.bump(x) * g.bump(z) * g.q))


def nu_by_quadrature(ctx, x, spec=None):
    """int k(x, y) dy, reduced to int g(r; x, eps/2 I) q(r) dr by unit mass of the y-bump."""
    (x,) = _points(ctx, x)
    spec = _prepare(ctx, spec, (x,))
    if spec.scheme == "adaptive":
        bump = _adaptive_kernel_integrand(ctx)
        return _adaptive(lambda r: bump(r, x) * gmm_density(ctx.model, r), spec)
    g = _Grid(ctx, spec)
    return float(np.sum(g.weights * g.bump(x) * g.q))


def _density_1d(ctx):
    """Scalar mixture density for m = 1 without per-call array validation."""
    w = ctx.model.weights
    mu = ctx.model.means[:, 0]
    var = ctx.model.covariances[:, 0, 0]
    coef = w / np.sqrt(2.0 * np.pi * var)
    return lambda t: float(np.dot(coef, np.exp(-0.5 * (t - mu) ** 2 / var)))


def _nested_kernels(ctx, x, z, spec):
    """y -> (k(x, y), k(z, y)) by adaptive quadrature over r (m = 1 only)."""
    var = ctx.epsilon / 2.0
    c = 1.0 / (2.0 * np.pi * var)
    lo, hi = spec.lower[0], spec.upper[0]
    centers = np.array([x[0], z[0]])
    q = _density_1d(ctx)

    def k(y):
        def integrand(t):
            return c * np.exp(-0.5 * ((t - centers) ** 2 + (t - y) ** 2) / var) * q(t)
        return integrate.quad_vec(integrand, lo, hi, epsabs=1e-15, epsrel=1e-11)[0]
    return k


def _require_1d_adaptive(ctx, what):
    if ctx.dim != 1:
        raise ValidationError(f"adaptive {what} quadrature is only available for m = 1")


def w_by_quadrature(ctx, x, z, spec=None):
    """int k(x, y) k(z, y) dy with k itself computed by quadrature."""
    x, z = _points(ctx, x, z)
    spec = _prepare(ctx, spec, (x, z))
    if spec.scheme == "adaptive":
        _require_1d_adaptive(ctx, "W")
        k = _nested_kernels(ctx, x, z, spec)
        return integrate.quad(lambda y: np.prod(k(y)), spec.lower[0], spec.upper[0],
                              epsabs=1e-15, epsrel=1e-10, limit=200)[0]
    g = _Grid(ctx, spec)
    return float(np.sum(g.weights * g.kernel_row(x) * g.kernel_row(z)))


def distance_by_quadrature(ctx, x, z, spec=None):
    """|| k(x, .) / nu(x) - k(z, .) / nu(z) ||_{L2} on the grid."""
    x, z = _points(ctx, x, z)
    spec = _prepare(ctx, spec, (x, z))
    if spec.scheme == "adaptive":
        _require_1d_adaptive(ctx, "distance")
        k = _nested_kernels(ctx, x, z, spec)
        scale = np.array([1.0 / nu_by_quadrature(ctx, x, spec), -1.0 / nu_by_quadrature(ctx, z, spec)])
        d2 = integrate.quad(lambda y: np.sum(k(y) * scale) ** 2,
                            spec.lower[0], spec.upper[0], epsabs=1e-15, epsrel=1e-10, limit=200)[0]
        return float(np.sqrt(d2))
    g = _Grid(ctx, spec)
    nx = np.sum(g.weights * g.bump(x) * g.q)
    nz = np.sum(g.weights * g.bump(z) * g.q)
    diff = g.kernel_row(x) / nx - g.kernel_row(z) / nz
    return float(np.sqrt(np.sum(g.weights * diff * diff)))


def trp_bruteforce(problem, samples=10_000, seed=0, polish_steps=100, n_starts=10):
    """Lower bound on max ||A x - b||^2 over the ball from random boundary points.

    The best ``n_starts`` samples are polished by conditional-gradient ascent
    (move to the boundary point along the gradient), which never decreases a
    convex objective.
    """
    if samples < 1:
        raise ValidationError("samples must be positive")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, problem.dim))
    x *= problem.rho / np.linalg.norm(x, axis=1, keepdims=True)
    vals = problem.objective(x)
    best = float(vals.max())
    starts = x[np.argsort(vals)[-n_starts:]]
    a, b = problem.a, problem.b
    for _ in range(polish_steps):
        grad = (starts @ a.T - b) @ a
        gn = np.linalg.norm(grad, axis=1, keepdims=True)
        moved = np.where(gn > 0, problem.rho * grad / np.where(gn > 0, gn, 1.0), starts)
        keep = problem.objective(moved) >= problem.objective(starts)
        starts = np.where(keep[:, None], moved, starts)
    return max(best, float(problem.objective(starts).max()))
