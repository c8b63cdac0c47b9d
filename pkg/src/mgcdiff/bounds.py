"""Certified error bounds for the truncated embedding and truncation-order selection."""
import json
from dataclasses import asdict, dataclass
from math import factorial

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import TiedCovarianceRequired, TruncationNotFound, ValidationError
from .gaussian import LOG_2PI
from .trp import TrpProblem, trp_solve

H_MODES = ("unit", "strict")


def lagrange_remainder(gamma, gamma_max, l):
    """Upper bound e^{gamma_max} gamma^{l+1} / (l+1)! on the order-l Maclaurin tail of e^gamma."""
    if not 0.0 <= gamma <= gamma_max:
        raise ValidationError(f"need 0 <= gamma <= gamma_max, got gamma={gamma}, gamma_max={gamma_max}")
    if l < 0:
        raise ValidationError("order must be non-negative")
    return float(np.exp(gamma_max) * gamma ** (l + 1) / factorial(l + 1))


def _sym_sqrt(mat):
    vals, vecs = np.linalg.eigh(mat)
    return (vecs * np.sqrt(vals)) @ vecs.T


def trp_assemble(ctx, j, rho_x=1.0):
    """Trust-region problem whose optimal value is max_{||x||<=rho_x} ||c^_j(x)||^2."""
    if not ctx.tied:
        raise TiedCovarianceRequired("trust-region assembly")
    m = ctx.dim
    eye = np.eye(m)
    eps = ctx.epsilon
    d_half = _sym_sqrt(ctx.d[j])
    inv_e4 = np.linalg.inv(eps * eye + 4.0 * ctx.model.covariances[j])
    a = d_half @ (eye / eps - inv_e4) / np.sqrt(2.0)
    b = np.sqrt(2.0) * d_half @ inv_e4 @ ctx.model.means[j]
    return TrpProblem(a, b, rho_x)


def worst_case_norms(ctx, rho_x=1.0):
    """s_j = max over the data ball of ||c^_j(x)||^2, one trust-region solve per component."""
    return np.array([trp_solve(trp_assemble(ctx, j, rho_x)).value
                     for j in range(ctx.n_components)])


def _check_norms(worst_norms):
    s = np.atleast_1d(np.asarray(worst_norms, dtype=float))
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise ValidationError("worst-case norms must be finite and non-negative")
    return s


def bound_gb1(worst_norms, l):
    """sum_j s_j^{l+1} / (l+1)!."""
    s = _check_norms(worst_norms)
    with np.errstate(divide="ignore"):
        logs = (l + 1) * np.log(s) - gammaln(l + 2)
    return float(np.sum(np.exp(logs)))


def bound_gb2(worst_norms, l):
    """sum_j [1 - e^{-s_j} sum_{i<=l} s_j^i / i!].

    The bracket is the regularized lower incomplete gamma function P(l+1, s_j),
    evaluated without cancellation.
    """
    s = _check_norms(worst_norms)
    return float(np.sum(gammainc(l + 1, s)))


def log_gram_prefactor(ctx):
    """log of (2 pi)^{-m/2} |2D|^{-1/2}."""
    _, logdet = np.linalg.slogdet(2.0 * ctx.d[0])
    return -0.5 * ctx.dim * LOG_2PI - 0.5 * logdet


def h_norm_bound(ctx, h_mode="unit"):
    """Bound used for ||h(x)||: 1 in "unit" mode, or the sum of the smoothed peak heights in "strict" mode."""
    if h_mode == "unit":
        return 1.0
    if h_mode == "strict":
        peaks = np.exp(-0.5 * ctx.dim * LOG_2PI - 0.5 * ctx.st_logdet)
        return float(np.sum(ctx.model.weights * peaks))
    raise ValidationError(f"h_mode must be one of {H_MODES}, got {h_mode!r}")


def bound_eta(ctx, l, nu_min, h_mode="unit", rho_x=1.0, worst_norms=None):
    """Bound on ||f(x) - f_l(x)||^2 for points in the ball with nu(x) >= nu_min."""
    if not nu_min > 0:
        raise ValidationError("nu_min must be positive")
    if not ctx.tied:
        raise TiedCovarianceRequired("the truncation bound")
    if worst_norms is None:
        worst_norms = worst_case_norms(ctx, rho_x)
    b = min(bound_gb1(worst_norms, l), bound_gb2(worst_norms, l))
    return float(np.exp(log_gram_prefactor(ctx)) / nu_min ** 2 * b * h_norm_bound(ctx, h_mode) ** 2)


@dataclass(frozen=True)
class TruncationBudget:
    zeta: float
    nu_min: float
    l_max: int
    gb1: float
    gb2: float
    b_lmax: float
    eta: float
    worst_norms: tuple
    prefactor: float
    h_bound: float
    h_mode: str
    rho_x: float
    epsilon: float

    def recomputed_eta(self):
        return self.prefactor / self.nu_min ** 2 * self.b_lmax * self.h_bound ** 2

    def to_json(self):
        doc = asdict(self)
        doc["worst_norms"] = list(self.worst_norms)
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        doc["worst_norms"] = tuple(doc["worst_norms"])
        return cls(**doc)


def select_truncation(ctx, zeta, nu_min, rho_x=1.0, l_cap=100, h_mode="unit"):
    """Smallest order l >= 1 whose bound satisfies eta(l) <= zeta^2 / 4."""
    if not zeta > 0:
        raise ValidationError("zeta must be positive")
    if not nu_min > 0:
        raise ValidationError("nu_min must be positive")
    s = worst_case_norms(ctx, rho_x)
    pref = float(np.exp(log_gram_prefactor(ctx)))
    hb = h_norm_bound(ctx, h_mode)
    target = zeta ** 2 / 4.0
    eta = np.inf
    for l in range(1, l_cap + 1):
        g1, g2 = bound_gb1(s, l), bound_gb2(s, l)
        b = min(g1, g2)
        eta = pref / nu_min ** 2 * b * hb ** 2
        if eta <= target:
            return TruncationBudget(
                zeta=float(zeta), nu_min=float(nu_min), l_max=l, gb1=g1, gb2=g2,
                b_lmax=b, eta=eta, worst_norms=tuple(float(v) for v in s),
                prefactor=pref, h_bound=hb, h_mode=h_mode, rho_x=float(rho_x),
                epsilon=ctx.epsilon,
            )
    raise TruncationNotFound(l_cap, eta, target)


def certify_pair_error(budget, d_truncated):
    """Interval guaranteed to contain the exact diffusion distance."""
    return max(0.0, d_truncated - budget.zeta), d_truncated + budget.zeta
