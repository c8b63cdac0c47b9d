"""Reproduction runs on the two-squares density.

``run_example1`` compares the closed-form stationary density of a fitted
tied mixture with its analytic value.  ``run_example2`` sweeps the scale eps and the
truncation order l, measuring the realized distance error of the truncated
embedding against the certified bound eta.
"""
import csv
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import erf

from .bounds import bound_eta, worst_case_norms
from .errors import BoundViolationError, ValidationError
from .features import block_offsets, embed_batch
from .gmm import GmmModel, gmm_fit_em, gmm_store
from .kernel import MgcContext, indexed_squared_distances, stationary_density

log = logging.getLogger(__name__)

OUT_ENV = "MGCDIFF_OUT"
LOW_WEIGHT, HIGH_WEIGHT = 0.2, 0.8
LOW_SQUARE, HIGH_SQUARE = (0.0, 1.0), (3.0, 4.0)
QUANTILES = (0.5, 0.9, 0.99)


def default_out_dir():
    return Path(os.environ.get(OUT_ENV, "mgcdiff-out"))


def two_squares_density(r):
    """1/5 on the unit square [0,1]^2, 4/5 on [3,4]^2, zero elsewhere."""
    r = np.atleast_2d(r)

    def inside(lo, hi):
        return np.all((r >= lo) & (r <= hi), axis=1)

    return LOW_WEIGHT * inside(*LOW_SQUARE) + HIGH_WEIGHT * inside(*HIGH_SQUARE)


def sample_two_squares(count, seed=None):
    """Uniform draws from the lower square w.p. 1/5 and the upper square w.p. 4/5."""
    if count < 1:
        raise ValidationError("count must be at least 1")
    rng = np.random.default_rng(seed)
    upper = rng.random(count) < HIGH_WEIGHT
    offset = np.where(upper, HIGH_SQUARE[0], LOW_SQUARE[0])
    return rng.random((count, 2)) + offset[:, None]


def box_smoothing(a, b, x1, x2, epsilon=1.0):
    """Mass of N(x, eps/2 I) on [a,b]^2; equals H(a, b, x1, x2) at eps = 1."""
    s = np.sqrt(epsilon)
    return 0.25 * (erf((b - x1) / s) - erf((a - x1) / s)) * (erf((b - x2) / s) - erf((a - x2) / s))


def analytic_stationary(x1, x2, epsilon=1.0):
    """Exact stationary density of the two-squares measure."""
    return (LOW_WEIGHT * box_smoothing(*LOW_SQUARE, x1, x2, epsilon)
            + HIGH_WEIGHT * box_smoothing(*HIGH_SQUARE, x1, x2, epsilon))


def tiling_model(tiles_per_side=12):
    """Tied mixture of narrow Gaussians, one per sub-square, mimicking the two squares.

    Each tile carries its share of the square's weight and the covariance of a
    uniform law on the tile.
    """
    k = tiles_per_side
    centers = (np.arange(k) + 0.5) / k
    cx, cy = np.meshgrid(centers, centers, indexing="ij")
    tile = np.stack([cx.ravel(), cy.ravel()], axis=1)
    means = np.concatenate([tile + LOW_SQUARE[0], tile + HIGH_SQUARE[0]])
    weights = np.concatenate([np.full(k * k, LOW_WEIGHT / k ** 2), np.full(k * k, HIGH_WEIGHT / k ** 2)])
    weights /= weights.sum()
    cov = np.eye(2) / (12.0 * k * k)
    return GmmModel(weights, means, np.repeat(cov[None], len(weights), axis=0), tied=True)


@dataclass
class Example1Report:
    grid: np.ndarray
    analytic: np.ndarray
    closed_form: np.ndarray
    sup_rel_error: float
    mean_rel_error: float
    model: GmmModel = field(repr=False)

    @property
    def error(self):
        return self.closed_form - self.analytic

    def summary(self):
        return {
            "grid_size": int(self.grid.size),
            "extent": [float(self.grid[0]), float(self.grid[-1])],
            "analytic_peak": float(self.analytic.max()),
            "sup_rel_error": self.sup_rel_error,
            "mean_rel_error": self.mean_rel_error,
            "n_components": self.model.n_components,
        }


def _write_surface(path, grid, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "value"])
        for i, a in enumerate(grid):
            for j, b in enumerate(grid):
                w.writerow([repr(float(a)), repr(float(b)), repr(float(values[i, j]))])


def run_example1(n_samples=2000, n_components=10, seed=0, grid_size=48,
                 extent=(-0.5, 4.5), epsilon=1.0, model=None, out_dir=None, plots=False):
    """Closed-form versus analytic stationary density on a square grid.

    If ``model`` is given it replaces the fitted mixture.  Errors are reported
    relative to the analytic peak.
    """
    if model is None:
        data = sample_two_squares(n_samples, seed)
        model = gmm_fit_em(data, n_components, tied=True, seed=seed)
    grid = np.linspace(extent[0], extent[1], grid_size)
    g1, g2 = np.meshgrid(grid, grid, indexing="ij")
    analytic = analytic_stationary(g1, g2, epsilon)
    ctx = MgcContext(model, epsilon)
    pts = np.stack([g1.ravel(), g2.ravel()], axis=1)
    closed = stationary_density(ctx, pts).reshape(g1.shape)
    err = np.abs(closed - analytic) / analytic.max()
    report = Example1Report(grid, analytic, closed, float(err.max()), float(err.mean()), model)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_surface(out / "example1_analytic.csv", grid, analytic)
        _write_surface(out / "example1_closed_form.csv", grid, closed)
        _write_surface(out / "example1_error.csv", grid, closed - analytic)
        gmm_store(model, out / "example1_model.json")
        (out / "example1_summary.json").write_text(json.dumps(report.summary(), indent=2) + "\n")
        if plots:
            from .plots import plot_example1
            plot_example1(out)
    log.info("example 1: sup relative error %.4f", report.sup_rel_error)
    return report


def _default_epsilons():
    return tuple(2.0 ** k for k in range(-5, 6))


@dataclass
class SweepConfig:
    epsilons: tuple = field(default_factory=_default_epsilons)
    orders: tuple = tuple(range(1, 15))
    n_points: int = 3000
    nu_min: float = 1e-3
    seed: int = 0
    n_components: int = 10
    n_pairs: int = 10_000
    n_extreme: int = 100
    literal_delta: bool = False
    h_mode: str = "unit"
    out_dir: object = None
    plots: bool = False

    def __post_init__(self):
        if not self.epsilons or not self.orders:
            raise ValidationError("sweep grids must be non-empty")
        if not self.nu_min > 0:
            raise ValidationError("nu_min must be positive")
        if min(self.orders) < 0:
            raise ValidationError("orders must be non-negative")
        self.epsilons = tuple(float(e) for e in self.epsilons)
        self.orders = tuple(sorted(int(l) for l in self.orders))


@dataclass
class Example2Report:
    rows: list
    radius: float
    model: GmmModel = field(repr=False)
    config: SweepConfig = field(repr=False)

    def cell(self, epsilon, l):
        for row in self.rows:
            if row["epsilon"] == epsilon and row["l"] == l:
                return row
        raise KeyError((epsilon, l))

    def column(self, name, epsilon=None, l=None):
        return np.array([r[name] for r in self.rows
                         if (epsilon is None or r["epsilon"] == epsilon) and (l is None or r["l"] == l)])

    @property
    def violations(self):
        return [r for r in self.rows if not r["bound_ok"]]


def _pairs(n, n_pairs, extreme_idx, rng):
    ia = rng.integers(0, n, n_pairs)
    ib = rng.integers(0, n - 1, n_pairs)
    ib = ib + (ib >= ia)
    ea, eb = np.triu_indices(len(extreme_idx), k=1)
    return (np.concatenate([ia, extreme_idx[ea]]), np.concatenate([ib, extreme_idx[eb]]))


def truncated_squared_distances(features, ia, ib, m, orders, batch=256):
    """||f_l(x_a) - f_l(x_b)||^2 for every order in ``orders`` (columns) and pair (rows).

    ``features`` holds order-max(orders) embeddings; lower orders are prefixes.
    """
    lmax = max(orders)
    offsets = block_offsets(m, lmax)
    out = np.empty((len(ia), len(orders)))
    for s in range(0, len(ia), batch):
        diff = features[ia[s:s + batch]] - features[ib[s:s + batch]]
        per_block = np.add.reduceat(diff * diff, offsets[:-1], axis=1)
        cum = np.cumsum(per_block, axis=1)
        out[s:s + batch] = cum[:, list(orders)]
    return out


def run_example2(config=None):
    """Truncation-error sweep over (eps, l); returns one row per grid cell."""
    cfg = config or SweepConfig()
    rng = np.random.default_rng(cfg.seed)
    data = sample_two_squares(cfg.n_points, rng.integers(2**32))
    model = gmm_fit_em(data, cfg.n_components, tied=True, seed=cfg.seed)
    radius = float(np.max(np.linalg.norm(data, axis=1)))
    lmax = max(cfg.orders)
    rows = []
    for k, eps in enumerate(cfg.epsilons):
        ctx = MgcContext(model, eps)
        nu = stationary_density(ctx, data)
        keep = np.flatnonzero(nu >= cfg.nu_min)
        pts = data[keep]
        order = np.argsort(nu[keep], kind="stable")
        extreme = np.unique(np.concatenate([order[:cfg.n_extreme], order[-cfg.n_extreme:]]))
        ia, ib = _pairs(len(pts), cfg.n_pairs, extreme, np.random.default_rng([cfg.seed, k]))
        exact = indexed_squared_distances(ctx, pts, ia, ib)
        feats = embed_batch(ctx, pts, lmax)
        approx = truncated_squared_distances(feats, ia, ib, ctx.dim, cfg.orders)
        del feats
        s = worst_case_norms(ctx, radius)
        for col, l in enumerate(cfg.orders):
            if cfg.literal_delta:
                delta = (exact - np.sqrt(approx[:, col])) ** 2
            else:
                delta = np.abs(exact - approx[:, col])
            eta = bound_eta(ctx, l, cfg.nu_min, cfg.h_mode, radius, worst_norms=s)
            wc = float(delta.max())
            row = {"epsilon": eps, "l": l, "n_points": int(len(pts)), "n_pairs": int(len(ia))}
            for qv, val in zip(QUANTILES, np.quantile(delta, QUANTILES)):
                row[f"delta_q{int(round(qv * 100))}"] = float(val)
            row.update(delta_wc=wc, eta=eta, bound_ok=bool(eta >= wc - 1e-12))
            rows.append(row)
        log.info("example 2: eps=%g done (%d points, %d pairs)", eps, len(pts), len(ia))
    report = Example2Report(rows, radius, model, cfg)
    if cfg.out_dir is not None:
        write_example2(report, cfg.out_dir)
    if not cfg.literal_delta and report.violations:
        bad = report.violations[0]
        raise BoundViolationError(
            f"eta = {bad['eta']:.3e} below worst-case delta = {bad['delta_wc']:.3e} "
            f"at eps = {bad['epsilon']}, l = {bad['l']}"
        )
    return report


def write_example2(report, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = list(report.rows[0].keys())
    with open(out / "example2.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in report.rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in (row[c] for c in cols)])
    cfg = asdict(report.config)
    cfg["out_dir"] = str(cfg["out_dir"])
    meta = {
        "config": cfg,
        "data_radius": report.radius,
        "data_centered": False,
        "violations": len(report.violations),
    }
    (out / "example2.json").write_text(json.dumps(meta, indent=2) + "\n")
    gmm_store(report.model, out / "example2_model.json")
    if report.config.plots:
        from .plots import plot_example2
        plot_example2(out / "example2.csv", out)
