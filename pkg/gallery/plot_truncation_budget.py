"""
Choosing the order from a distance tolerance
============================================

A certified bound on the squared truncation error turns a tolerance zeta on
distances into a truncation order. Every truncated distance then comes with
an interval that is guaranteed to hold the exact one.
"""

import numpy as np

from mgcdiff import (
    GmmModel,
    MgcContext,
    bound_eta,
    certify_pair_error,
    diffusion_distance,
    embed_batch,
    select_truncation,
)

model = GmmModel([0.5, 0.5], [[-0.4], [0.7]], [[[0.1]], [[0.1]]], tied=True)
ctx = MgcContext(model, 2.0)

for l in (2, 6, 10, 14):
    print(f"l = {l:2d}  eta = {bound_eta(ctx, l, nu_min=1e-3, rho_x=1.0):.3e}")

budget = select_truncation(ctx, zeta=0.05, nu_min=1e-3, rho_x=1.0)
print(f"selected l_max = {budget.l_max}, eta = {budget.eta:.2e}")

rng = np.random.default_rng(3)
x, z = rng.uniform(-1, 1, (5, 1)), rng.uniform(-1, 1, (5, 1))
exact = diffusion_distance(ctx, x, z)
trunc = np.linalg.norm(embed_batch(ctx, x, budget.l_max) - embed_batch(ctx, z, budget.l_max), axis=1)
for d, dl in zip(exact, trunc):
    lo, hi = certify_pair_error(budget, dl)
    print(f"exact {d:.6f} in [{lo:.6f}, {hi:.6f}]")
