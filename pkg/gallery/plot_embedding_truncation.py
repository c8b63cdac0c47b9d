"""
How many Taylor terms does the embedding need?
==============================================

With a tied mixture every point maps to an explicit vector whose Euclidean
distances reproduce the diffusion distance as the order l grows. The vector
length depends only on the dimension and l, not on the number of components.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mgcdiff import GmmModel, MgcContext, diffusion_distance, embed_batch, embedding_dim

rng = np.random.default_rng(0)
model = GmmModel([0.3, 0.7], [[-0.5, 0.0], [0.6, 0.3]], [0.2 * np.eye(2)] * 2, tied=True)
x = rng.uniform(-1, 1, (200, 2))
z = rng.uniform(-1, 1, (200, 2))

orders = list(range(0, 15))
fig, ax = plt.subplots()
for eps in (1.0, 2.0, 8.0):
    ctx = MgcContext(model, eps)
    exact = diffusion_distance(ctx, x, z)
    f14x, f14z = embed_batch(ctx, x, 14), embed_batch(ctx, z, 14)
    worst = []
    for l in orders:
        k = embedding_dim(2, l)  # lower orders are prefixes of the order-14 vector
        approx = np.linalg.norm(f14x[:, :k] - f14z[:, :k], axis=1)
        worst.append(np.abs(approx - exact).max())
    ax.semilogy(orders, np.maximum(worst, 1e-17), marker="o", label=f"eps = {eps:g}")
ax.set_xlabel("order l")
ax.set_ylabel("worst |d_l - d| over 200 pairs")
ax.legend()
fig.savefig("embedding_truncation.png", dpi=100)
