"""Explicit Taylor feature embedding of the diffusion geometry.

The degree-i block of the feature map is ``x^{(x)i} / sqrt(i!)`` so that
``<phi_l(x), phi_l(y)> = sum_{i<=l} (x.y)^i / i!``.  For a tied mixture the
one-step diffusion Gram kernel factors through these blocks, and the
truncated representation ``f_l(x)`` is the contraction

    f_l(x) = (2 pi)^{-m/4} |2D|^{-1/4} / nu(x) * sum_j h_j(x) exp(-|c^_j(x)|^2 / 2) phi_l(c^_j(x))

with ``c^_j(x) = (2D)^{-1/2} c_j(x)``.  Its length, ``sum_{i<=l} m^i``, does not
depend on the number of mixture components.
"""
import json
from dataclasses import dataclass
from math import factorial, sqrt
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionCapError, TiedCovarianceRequired, ValidationError
from .kernel import NU_FLOOR, _check_mass

DIM_CAP = 10**7
_INT64_MAX = 2**63 - 1
# elements held in one intermediate (points x components x block) array
_WORK_ELEMENTS = 4_000_000


def embedding_dim(m, l):
    """Number of coordinates sum_{i=0}^{l} m^i of an order-l feature map."""
    if m < 1 or l < 0:
        raise ValidationError(f"need m >= 1 and l >= 0, got m={m}, l={l}")
    total = l + 1 if m == 1 else (m ** (l + 1) - 1) // (m - 1)
    if total > _INT64_MAX:
        raise ValidationError(f"embedding dimension for m={m}, l={l} overflows 64-bit integers")
    return total


def _check_cap(m, l, cap):
    need = embedding_dim(m, l)
    if need > cap:
        raise DimensionCapError(need, cap)
    return need


def taylor_blocks(x, l):
    """Blocks of the order-l feature map for a batch ``x`` of shape (N, m).

    Returns a list of ``l + 1`` arrays, block i of shape (N, m**i).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    blocks = [np.ones((x.shape[0], 1))]
    for i in range(l):
        nxt = blocks[-1][:, :, None] * x[:, None, :]
        blocks.append(nxt.reshape(x.shape[0], -1) / sqrt(i + 1))
    return blocks


@dataclass(frozen=True)
class FeatureVector:
    blocks: tuple
    order: int

    @property
    def dim(self):
        return sum(b.size for b in self.blocks)

    def flat(self):
        return np.concatenate(self.blocks)

    def dot(self, other):
        return float(sum(a @ b for a, b in zip(self.blocks, other.blocks)))


def taylor_feature_map(x, l, cap=DIM_CAP):
    """Order-l Kronecker-power feature map of a single point."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValidationError("taylor_feature_map expects a single point")
    if l < 0:
        raise ValidationError("order must be non-negative")
    _check_cap(x.size, l, cap)
    return FeatureVector(tuple(b[0] for b in taylor_blocks(x[None], l)), l)


def h_vector(ctx, x):
    """Component vector h_j(x) = a_j g_m(x; theta_j, Sigma~_j); sums to nu(x)."""
    out = np.exp(ctx.log_h(x))
    return out[0] if np.ndim(x) == 1 else out


def _require_tied(ctx, what):
    if not ctx.tied:
        raise TiedCovarianceRequired(what)


def whitening_matrix(ctx):
    """Symmetric inverse square root (2D)^{-1/2} of the shared D matrix."""
    _require_tied(ctx, "whitening of the component centers")
    vals, vecs = np.linalg.eigh(2.0 * ctx.d[0])
    return (vecs / np.sqrt(vals)) @ vecs.T


def whitened_centers(ctx, x):
    """c^_j(x) = (2D)^{-1/2} c_j(x); shape (n, m) for one point, (N, n, m) for a batch."""
    w = whitening_matrix(ctx)
    out = ctx.centers(x) @ w.T
    return out[0] if np.ndim(x) == 1 else out


def embedding_prefactor_log(ctx):
    """log of (2 pi)^{-m/4} |2D|^{-1/4}."""
    m = ctx.dim
    _, logdet_2d = np.linalg.slogdet(2.0 * ctx.d[0])
    return -0.25 * m * np.log(2.0 * np.pi) - 0.25 * logdet_2d


@dataclass(frozen=True)
class FeatureEmbedding:
    vector: np.ndarray
    order: int
    fingerprint: str
    point: np.ndarray

    @property
    def dim(self):
        return self.vector.size


def embed_batch(ctx, x, l, nu_floor=NU_FLOOR, cap=DIM_CAP):
    """Truncated diffusion representation f_l for every row of ``x``.

    Returns an array of shape (N, embedding_dim(m, l)).
    """
    _require_tied(ctx, "the explicit embedding")
    if l < 0:
        raise ValidationError("order must be non-negative")
    x = ctx.points(x)
    m, n = ctx.dim, ctx.n_components
    total = _check_cap(m, l, cap)
    log_h = ctx.log_h(x)
    log_nu = logsumexp(log_h, axis=1)
    _check_mass(log_nu, nu_floor)
    chat = ctx.centers(x) @ whitening_matrix(ctx).T
    log_w = log_h - log_nu[:, None] - 0.5 * np.sum(chat * chat, axis=-1)
    weights = np.exp(log_w + embedding_prefactor_log(ctx))

    out = np.empty((x.shape[0], total))
    offsets = block_offsets(m, l)
    scales = [1.0 / sqrt(factorial(i)) for i in range(l + 1)]
    step = max(1, _WORK_ELEMENTS // (n * m ** l))
    for s in range(0, x.shape[0], step):
        c, w = chat[s:s + step], weights[s:s + step, None, :]
        p = c.shape[0]
        # unscaled Kronecker powers of every component center; scaled after contraction
        cur = np.ones((p, n, 1))
        out[s:s + step, 0] = w[:, 0].sum(axis=1)
        for i in range(1, l + 1):
            cur = (cur[:, :, :, None] * c[:, :, None, :]).reshape(p, n, -1)
            out[s:s + step, offsets[i]:offsets[i + 1]] = scales[i] * (w @ cur)[:, 0, :]
    return out


def embed(ctx, x, l, nu_floor=NU_FLOOR, cap=DIM_CAP):
    """Truncated diffusion representation of a single point."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValidationError("embed expects a single point; use embed_batch for many")
    vec = embed_batch(ctx, x[None], l, nu_floor=nu_floor, cap=cap)[0]
    return FeatureEmbedding(vec, l, ctx.fingerprint(), x.copy())


def embedded_distance(ctx, x, z, l, nu_floor=NU_FLOOR, cap=DIM_CAP):
    """Euclidean distance between f_l(x) and f_l(z); row-aligned for batches."""
    fx = embed_batch(ctx, x, l, nu_floor, cap)
    fz = embed_batch(ctx, z, l, nu_floor, cap)
    d = np.sqrt(np.sum((fx - fz) ** 2, axis=1))
    return float(d[0]) if np.ndim(x) == 1 and np.ndim(z) == 1 else d


def block_offsets(m, l):
    """Start offsets of each degree block inside a flat order-l vector."""
    return np.concatenate([[0], np.cumsum([m ** i for i in range(l + 1)])])


def taylor_partial_sum(t, l):
    """sum_{i<=l} t^i / i!, the value <phi_l(x), phi_l(y)> takes at t = x.y."""
    t = np.asarray(t, dtype=float)
    return sum(t ** i / factorial(i) for i in range(l + 1))


def write_embeddings(path, vectors, order, ctx):
    """Write embedding rows as CSV plus a JSON sidecar ``<path>.json``."""
    vectors = np.atleast_2d(vectors)
    header = ",".join(f"f{i}" for i in range(vectors.shape[1]))
    np.savetxt(path, vectors, delimiter=",", header=header, comments="", fmt="%.17g")
    meta = {
        "order": int(order),
        "epsilon": ctx.epsilon,
        "fingerprint": ctx.fingerprint(),
        "dim": ctx.dim,
        "length": int(vectors.shape[1]),
        "rows": int(vectors.shape[0]),
    }
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2) + "\n")
    return meta


def read_embeddings(path):
    vectors = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    meta = json.loads(Path(str(path) + ".json").read_text())
    return vectors, meta
