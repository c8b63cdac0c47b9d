"""
Farthest point of an affine map over a ball
===========================================

The bound needs the largest value of ||A x - b||^2 over a ball. The solver
works in the eigenbasis of A^T A and handles the degenerate case where b has
no weight on the top eigenvector.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mgcdiff import TrpProblem, trp_solve

problem = TrpProblem(np.array([[1.5, 0.4], [0.0, 0.7]]), np.array([0.3, -0.2]), rho=1.0)
sol = trp_solve(problem)
print(f"max = {sol.value:.6f} at {sol.x_star}, case = {sol.case}")

t = np.linspace(0, 2 * np.pi, 400)
circle = np.stack([np.cos(t), np.sin(t)], axis=1)
fig, ax = plt.subplots()
ax.plot(t, problem.objective(circle))
ax.axhline(sol.value, ls="--", color="k")
ax.set_xlabel("angle on the unit circle")
ax.set_ylabel("||A x - b||^2")
fig.savefig("trust_region.png", dpi=100)

hard = TrpProblem(np.diag([2.0, 1.0]), np.zeros(2))
print("degenerate case:", trp_solve(hard).case, trp_solve(hard).value)
