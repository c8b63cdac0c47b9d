"""
Diffusion distances from one anchor point
=========================================

The diffusion distance compares the one-step transition densities of two
points. Points inside the same square are close even when far apart in the
plane, while points in different squares are far.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mgcdiff import MgcContext, gmm_fit_em, pairwise_diffusion_distances
from mgcdiff.experiments import sample_two_squares

data = sample_two_squares(1500, seed=1)
model = gmm_fit_em(data, 10, tied=True, seed=1)

fig, axes = plt.subplots(1, 3, figsize=(12, 3.8))
anchor = np.array([[0.5, 0.5]])
for ax, eps in zip(axes, (0.25, 1.0, 4.0)):
    ctx = MgcContext(model, eps)
    d = pairwise_diffusion_distances(ctx, anchor, data)[0]
    sc = ax.scatter(data[:, 0], data[:, 1], c=d, s=4)
    ax.plot(*anchor[0], "r+", ms=12)
    fig.colorbar(sc, ax=ax)
    ax.set_title(f"eps = {eps:g}")
    ax.set_aspect("equal")
fig.tight_layout()
fig.savefig("diffusion_distance.png", dpi=100)
