"""Maximization of ||A x - b||^2 over the ball ||x|| <= rho.

The objective is convex, so a maximizer lies on the sphere unless A = 0.
With B = A^T A and g = -A^T b the first-order conditions read
``(tau I - B) x = g`` with ``tau >= lambda_max(B)``.  In the eigenbasis of B
the secular function ``||x(tau)||`` is strictly decreasing for tau above
lambda_max, so a bracketed Newton iteration finds the multiplier.  When g has
no weight on the top eigenspace and the remaining solution is strictly inside
the ball (the hard case) a top eigenvector is added to reach the boundary.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

HARD_CASE_TOL = 1e-10
MAX_ITER = 200

INTERIOR = "interior-degenerate"
EASY = "easy"
HARD = "hard"


@dataclass(frozen=True)
class TrpProblem:
    a: np.ndarray
    b: np.ndarray
    rho: float = 1.0

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape[0] != b.size:
            raise ValidationError(f"A has {a.shape[0]} rows but b has {b.size} entries")
        rho = float(self.rho)
        if not (np.isfinite(rho) and rho > 0):
            raise ValidationError(f"radius must be positive and finite, got {rho}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValidationError("A and b must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self):
        return self.a.shape[1]

    def objective(self, x):
        """||A x - b||^2 for a point (m,) or the rows of a batch (N, m)."""
        r = np.asarray(x) @ self.a.T - self.b
        return np.sum(r * r, axis=-1)


@dataclass(frozen=True)
class TrpSolution:
    x_star: np.ndarray
    tau: float
    value: float
    case: str

    def kkt_residuals(self, problem):
        """Feasibility, stationarity, complementarity and second-order residuals.

        Each entry is non-positive or zero at an exact solution; see
        :func:`check_kkt` for the tolerances.
        """
        B = problem.a.T @ problem.a
        g = -problem.a.T @ problem.b
        x = self.x_star
        lam_max = float(np.linalg.eigvalsh(B)[-1]) if B.size else 0.0
        return {
            "feasibility": float(np.linalg.norm(x) - problem.rho),
            "stationarity": float(np.linalg.norm(self.tau * x - B @ x - g)),
            "complementarity": float(abs(self.tau * (x @ x - problem.rho ** 2))),
            "second_order": float(lam_max - self.tau),
        }


def check_kkt(solution, problem):
    """True when every optimality residual meets the package tolerances."""
    r = solution.kkt_residuals(problem)
    g = problem.a.T @ problem.b
    return (
        r["feasibility"] <= 1e-10
        and r["stationarity"] <= 1e-8 * (1.0 + np.linalg.norm(g))
        and r["complementarity"] <= 1e-8
        and r["second_order"] <= 1e-8
    )


def _secular_root(lam, gamma, rho, max_iter):
    """Find sigma > 0 with sum gamma_k^2 / (sigma + gap_k)^2 = rho^2.

    ``lam`` holds the eigenvalue gaps lambda_max - lambda_k (all >= 0).
    """
    gnorm = np.linalg.norm(gamma)
    lo, hi = 0.0, max(1e-12, gnorm / rho)

    def norm_at(sigma):
        return np.linalg.norm(gamma / (sigma + lam))

    sigma = hi
    for _ in range(max_iter):
        q = gamma / (sigma + lam)
        nrm = np.linalg.norm(q)
        if abs(nrm - rho) <= 1e-15 * rho or hi - lo <= 1e-16 * max(hi, 1.0):
            return sigma
        if nrm > rho:
            lo = sigma
        else:
            hi = sigma
        # Newton on 1/rho - 1/||x(sigma)||, which is close to linear in sigma
        dnorm = -np.sum(q * q / (sigma + lam)) / nrm
        step = -(1.0 / rho - 1.0 / nrm) * nrm * nrm / dnorm
        cand = sigma + step
        sigma = cand if lo < cand < hi else 0.5 * (lo + hi)
    raise NumericalError(
        f"secular equation did not converge in {max_iter} iterations: "
        f"bracket [{lo:.17g}, {hi:.17g}], norm at upper end {norm_at(hi):.17g}, radius {rho}"
    )


def trp_solve(problem, max_iter=MAX_ITER):
    """Globally maximize ||A x - b||^2 subject to ||x|| <= rho."""
    a, b, rho = problem.a, problem.b, problem.rho
    m = problem.dim
    if not np.any(a):
        x = np.zeros(m)
        return TrpSolution(x, 0.0, float(b @ b), INTERIOR)

    B = a.T @ a
    B = 0.5 * (B + B.T)
    lam, Q = np.linalg.eigh(B)
    lam_max = lam[-1]
    g = -(a.T @ b)
    gamma = Q.T @ g
    gaps = lam_max - lam
    # columns treated as the top eigenspace
    top = gaps <= 1e-12 * max(lam_max, 1.0)
    gaps[top] = 0.0
    gnorm = np.linalg.norm(gamma)

    case = EASY
    if np.linalg.norm(gamma[top]) <= HARD_CASE_TOL * gnorm or gnorm == 0.0:
        rest = ~top
        coef = np.zeros(m)
        coef[rest] = gamma[rest] / gaps[rest]
        inner = np.linalg.norm(coef)
        if inner < rho:
            coef[np.flatnonzero(top)[-1]] = np.sqrt(rho * rho - inner * inner)
            x = Q @ coef
            return TrpSolution(x, float(lam_max), float(problem.objective(x)), HARD)
        gamma = gamma.copy()
        gamma[top] = 0.0
    sigma = _secular_root(gaps, gamma, rho, max_iter)
    x = Q @ (gamma / (sigma + gaps))
    return TrpSolution(x, float(lam_max + sigma), float(problem.objective(x)), case)
